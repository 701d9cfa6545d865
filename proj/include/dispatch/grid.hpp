#ifndef DISPATCH_GRID_HPP
#define DISPATCH_GRID_HPP

#include <cstddef>
#include <string>
#include <vector>

#include "dispatch/system.hpp"

namespace dispatch {

// Uniform rectangular space-time grid on [0,T] x [0,1]^(n_dams+1).
struct Grid {
  double horizon = 0.0;      // T, hours
  double dt = 0.0;           // hours
  std::vector<int> cells;    // M_k intervals per dimension (M_k+1 nodes)
  std::vector<double> dx;    // 1/M_k

  static Grid uniform(double horizon, double dt, double dx, int dims);

  int time_levels() const;   // N+1 including the terminal level
  int steps() const { return time_levels() - 1; }
  int dims() const { return static_cast<int>(cells.size()); }
  std::size_t nodes() const;
  double coord(int dim, int k) const;
  std::size_t flat_index(const std::vector<int>& idx) const;
  void unflatten(std::size_t node, std::vector<int>& idx) const;
};

// Per-dimension drift magnitudes entering the explicit-scheme step bound.
// `table_term` prices the controlled outflow alone (the report convention of
// the reference tables: max outflow / volume span, undivided by dx);
// `sup_drift` is the rigorous sup of |f_k| over the control box and the range
// of the inflow data. The stability gate uses the larger of the two.
struct CflReport {
  struct Dim {
    std::string name;
    double table_term = 0.0;  // 1/h
    double sup_drift = 0.0;   // 1/h
    double per_dx = 0.0;      // max(table, sup) / dx
  };
  std::vector<Dim> dims;
  double sum_per_dx = 0.0;
  double courant = 0.0;  // dt * sum_per_dx
  double dt_max = 0.0;   // margin / sum_per_dx
  double margin = 0.0;
  bool satisfied = false;
};

CflReport cfl_report(const SystemSpec& sys, const Grid& grid, const SeriesSet& series,
                     double margin);

std::string format_cfl_report(const CflReport& r, double dt);

}  // namespace dispatch

#endif
