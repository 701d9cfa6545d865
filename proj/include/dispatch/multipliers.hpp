#ifndef DISPATCH_MULTIPLIERS_HPP
#define DISPATCH_MULTIPLIERS_HPP

#include <string>
#include <vector>

#include "dispatch/system.hpp"

namespace dispatch {

// Piecewise-constant Lagrange multipliers, one function per cascade link.
// Link j lives on [tau_j, T] with m_j = 2^(level-1) uniform segments; the
// coefficient vectors are the dual optimization variables.
class MultiplierSet {
 public:
  struct Link {
    int dam_pos = 0;      // upstream dam position in SystemSpec::dams
    double tau = 0.0;     // delay to the downstream dam, h
    std::vector<double> coeffs;  // USD/m3, one per segment
    int segments() const { return static_cast<int>(coeffs.size()); }
  };

  MultiplierSet() = default;
  // Level-1 set (one segment per link), all coefficients = coeff.
  static MultiplierSet initial(const SystemSpec& sys, double horizon, double coeff);

  double horizon() const { return horizon_; }
  int level() const { return level_; }
  int n_links() const { return static_cast<int>(links_.size()); }
  const std::vector<Link>& links() const { return links_; }
  int dimension() const;

  // Right-continuous evaluation; 0 for t < tau_j and for t >= T per the
  // horizon guard (the t+tau terms are indicator-weighted anyway).
  double eval(int link, double t) const;
  // Segment index with t in [t_k, t_{k+1}); -1 outside [tau_j, T).
  int segment_of(int link, double t) const;
  double segment_length(int link) const;

  // Next refinement level: segment count doubles, coefficients duplicate, so
  // the refined set evaluates identically to its parent everywhere.
  MultiplierSet refined() const;

  std::vector<double> flatten() const;
  void assign_flat(const std::vector<double>& x);

  std::string to_json() const;
  static MultiplierSet from_json(const std::string& text);

 private:
  double horizon_ = 0.0;
  int level_ = 1;
  std::vector<Link> links_;
};

}  // namespace dispatch

#endif
