#ifndef DISPATCH_LMBM_HPP
#define DISPATCH_LMBM_HPP

#include <functional>
#include <optional>
#include <vector>

namespace dispatch {

// Limited-memory bundle method for nonsmooth convex minimization. The oracle
// returns (f, subgradient) or nullopt on evaluation failure (treated as +inf,
// forcing a backtrack).
using LmbmOracle =
    std::function<std::optional<std::pair<double, std::vector<double>>>(
        const std::vector<double>&)>;

struct LmbmOptions {
  int memory = 7;           // correction pairs kept by the two-loop recursion
  double eps_line = 1e-4;   // serious-step descent fraction (epsilon_L)
  double eps_right = 0.25;  // null-step subgradient test (epsilon_R)
  double eps_stop = 1e-9;   // stopping tolerance on w_k
  double t_min = 1e-12;
  double t_max = 1e3;
  int max_oracle_calls = 30;
  double step_floor = 1.0;  // floor for the first trial step length, x units
};

struct LmbmHistoryRow {
  int oracle_calls = 0;
  double f = 0.0;          // value at the evaluated point
  char step = '-';         // 's' serious, 'n' null, 'b' backtrack, '0' initial
  double w = 0.0;          // stopping measure at the iteration start
  std::vector<double> x;   // evaluated point
};

struct LmbmResult {
  std::vector<double> best_x;
  double best_f = 0.0;
  int oracle_calls = 0;
  bool converged = false;  // w_k dropped below eps_stop
  std::vector<LmbmHistoryRow> history;
};

LmbmResult lmbm_minimize(const LmbmOracle& oracle, std::vector<double> x0,
                         const LmbmOptions& opts);

// Aggregation subproblem: minimize w^T M w + 2 b.w over the unit simplex in
// three weights, by deterministic face enumeration (vertices with the new
// subgradient's vertex first, then edges, then the interior stationary
// point). M is the Gram matrix of the metric-mapped subgradients.
std::array<double, 3> aggregate_weights(const std::array<std::array<double, 3>, 3>& m,
                                        const std::array<double, 3>& b);

}  // namespace dispatch

#endif
