#ifndef DISPATCH_LP_HPP
#define DISPATCH_LP_HPP

#include <vector>

namespace dispatch {

// Small dense linear program with bounded variables and range rows:
//   minimize cost.x   s.t.  lower <= x <= upper,  row.lo <= row.coef.x <= row.hi.
// Equalities use lo == hi. All variable bounds must be finite.
struct LpProblem {
  std::vector<double> cost;
  std::vector<double> lower;
  std::vector<double> upper;
  struct Row {
    std::vector<double> coef;
    double lo = 0.0;
    double hi = 0.0;
  };
  std::vector<Row> rows;
  int n() const { return static_cast<int>(cost.size()); }
  void clear() { cost.clear(); lower.clear(); upper.clear(); rows.clear(); }
};

enum class LpStatus { kOptimal, kInfeasible };

struct LpResult {
  LpStatus status = LpStatus::kInfeasible;
  double value = 0.0;
  std::vector<double> x;
};

// Two-phase bounded-variable simplex with Bland's rule: the lowest eligible
// index enters, and among tied ratio-test rows the basic variable with the
// lowest index leaves, so degenerate minimizers resolve identically on every
// run. Reuses internal buffers across solves; one instance per thread.
class LpSolver {
 public:
  const LpResult& solve(const LpProblem& p);

 private:
  void setup(const LpProblem& p);
  bool iterate(bool phase1);
  void refresh_basics();

  int n_ = 0, m_ = 0, total_ = 0;
  std::vector<double> lower_, upper_, cost_, phase1_cost_, x_, cb_;
  std::vector<double> tab_;  // m_ x total_, row-major
  std::vector<signed char> state_;
  std::vector<int> basis_;
  double cost_scale_ = 1.0;
  bool need_phase1_ = false;
  LpResult result_;
};

LpResult solve_lp(const LpProblem& p);

}  // namespace dispatch

#endif
