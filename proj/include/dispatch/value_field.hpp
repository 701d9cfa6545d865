#ifndef DISPATCH_VALUE_FIELD_HPP
#define DISPATCH_VALUE_FIELD_HPP

#include <string>
#include <vector>

#include "dispatch/grid.hpp"

namespace dispatch {

// One-sided space derivatives of the value function per dimension. At a
// domain face only the interior difference exists and both sides carry it.
struct GradientPair {
  std::vector<double> minus;
  std::vector<double> plus;
  // Midpoint of the two one-sided differences; exact wherever they agree.
  std::vector<double> central() const;
};

// Value function U on the space-time grid, USD. Terminal level is zero;
// levels run 0..steps() with level j at time j*dt.
class ValueField {
 public:
  ValueField() = default;
  explicit ValueField(const Grid& grid);

  const Grid& grid() const { return grid_; }
  double& at(int level, std::size_t node) { return u_[offset(level, node)]; }
  double at(int level, std::size_t node) const { return u_[offset(level, node)]; }
  const double* level_data(int level) const { return u_.data() + offset(level, 0); }
  double* level_data(int level) { return u_.data() + offset(level, 0); }

  // Multilinear interpolation of U at a normalized state.
  double value_at(int level, const std::vector<double>& x) const;

  // One-sided node differences, multilinearly interpolated to x. `t` snaps to
  // the nearest time level.
  GradientPair gradient_at(double t, const std::vector<double>& x) const;
  GradientPair gradient_at_level(int level, const std::vector<double>& x) const;

  void dump(const std::string& path) const;
  static ValueField load(const std::string& path);

  bool all_finite() const;

 private:
  std::size_t offset(int level, std::size_t node) const {
    return static_cast<std::size_t>(level) * grid_.nodes() + node;
  }
  void check_x(const std::vector<double>& x) const;

  Grid grid_;
  std::vector<double> u_;
};

}  // namespace dispatch

#endif
