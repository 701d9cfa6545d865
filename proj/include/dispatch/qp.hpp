#ifndef DISPATCH_QP_HPP
#define DISPATCH_QP_HPP

#include <vector>

#include "dispatch/lp.hpp"

namespace dispatch {

// Separable convex quadratic program over the per-step dispatch polytope:
//
//   minimize   sum_v  q_v (x_v - target_v)^2 + c_v x_v
//   s.t.       lo_v <= x_v <= hi_v
//              pa x_a + pb x_b in [slab.lo, slab.hi]   (one slab per pair)
//              sum_v bal_v x_v = demand
//
// Solved by bisection on the balance multiplier: for a fixed multiplier the
// problem separates into scalars and two-variable slab pairs with closed-form
// minimizers, and total generation is nonincreasing in the multiplier. The
// purely linear variables are then completed exactly by the bounded simplex
// with the quadratic variables frozen, which also resolves merit-order ties
// deterministically (lowest column index first, via Bland's rule).
struct SepQp {
  struct Col {
    double lo = 0.0, hi = 0.0;
    double c = 0.0;        // linear cost
    double q = 0.0;        // quadratic weight, >= 0
    double target = 0.0;   // quadratic center
    double bal = 0.0;      // balance-row coefficient (kW per unit)
  };
  struct Slab {
    int a = -1, b = -1;
    double pa = 0.0, pb = 0.0;
    double lo = 0.0, hi = 0.0;
  };
  std::vector<Col> cols;
  std::vector<Slab> slabs;  // each column appears in at most one slab
  double demand = 0.0;
};

struct SepQpResult {
  bool feasible = false;
  double value = 0.0;
  std::vector<double> x;
  double multiplier = 0.0;
};

SepQpResult solve_separable_qp(const SepQp& p, LpSolver& lp);

}  // namespace dispatch

#endif
