#ifndef DISPATCH_RELAXATION_HPP
#define DISPATCH_RELAXATION_HPP

#include <string>
#include <vector>

#include "dispatch/lp.hpp"
#include "dispatch/multipliers.hpp"
#include "dispatch/qp.hpp"
#include "dispatch/system.hpp"

namespace dispatch {

// Normalized controls of the relaxed problem. `virt` holds the virtual
// inflow controls (one per cascade link); it is empty on admissible and
// smoothed paths where delayed arrivals are data instead.
struct ExtendedControl {
  std::vector<double> turbine;  // per dam, [0,1]
  std::vector<double> spill;    // per dam, [0,1]
  std::vector<double> ffs;      // per station, [0,1]
  double battery = 0.0;         // [-C_bat, 1]
  std::vector<double> virt;     // per link, [0,1]
  double slack_kw = 0.0;        // unmet demand picked up by the penalty column
};

// Flat column order of the per-step optimization variables.
struct ControlLayout {
  int nd = 0, nf = 0, nl = 0;
  bool with_virtuals = false;
  int turbine(int i) const { return i; }
  int spill(int i) const { return nd + i; }
  int ffs(int c) const { return 2 * nd + c; }
  int battery() const { return 2 * nd + nf; }
  int virt(int l) const { return 2 * nd + nf + 1 + l; }
  int n_controls() const { return 2 * nd + nf + 1 + (with_virtuals ? nl : 0); }
  int slack() const { return n_controls(); }
  int size() const { return n_controls() + 1; }
};

// Sign policy for one state dimension's drift in the upwind objective.
// kForceUp/kForceDown additionally impose the boundary outflow constraint
// (state pinned at the lower/upper end of its range).
enum class DriftMode : unsigned char { kFree, kForceUp, kForceDown };

// Everything the per-step minimization needs, assembled by the HJB sweep or
// by a forward simulator.
struct StepInput {
  const SystemSpec* sys = nullptr;
  double t = 0.0;
  double demand = 0.0;               // kW
  std::vector<double> state;         // normalized, n_dams()+1
  std::vector<double> inflow;        // m3/h per dam
  std::vector<double> arrivals;      // m3/h per dam, delayed upstream water (data)
  bool with_virtuals = true;
  std::vector<double> du_minus;      // backward difference of the value field
  std::vector<double> du_plus;       // forward difference
  std::vector<DriftMode> mode;       // per state dimension
  std::vector<double> lambda_now;    // lambda_j(t) on [tau_j, T), else 0
  std::vector<double> lambda_ahead;  // lambda_j(t+tau_j) when t + tau_j < T, else 0
  double voll = 1e4;                 // unmet-demand penalty, USD/MWh
  // control smoothing: q (y - target)^2 per control column; empty = none
  std::vector<double> pen_q;
  std::vector<double> pen_target;

  // dam capacity tables at `state`; filled by prepare()
  std::vector<double> tur_cap;    // m3/h
  std::vector<double> spill_cap;  // m3/h
  std::vector<double> power_coef; // kW, clamped at zero

  void prepare();  // fills the tables and default modes/arrays
  ControlLayout layout() const;
};

struct StepResult {
  bool feasible = false;
  double objective = 0.0;        // minimized F, drift constants included
  ExtendedControl control;
  std::vector<double> drift;     // realized state velocity, 1/h
  std::vector<double> outflow;   // realized dam outflow h^(i), m3/h
  double generation = 0.0;       // kW, slack excluded
  double shortfall = 0.0;        // kW served by the slack column
};

// Pointwise minimizer of the relaxed (or delay-respecting) objective over the
// admissible set. Drift-sign ambiguity is resolved by enumerating the sign
// patterns of the ambiguous dimensions, solving one LP (or separable QP when
// smoothing is on) per pattern with the matching one-sided derivatives, and
// keeping the best feasible value; enumeration order and Bland's rule make the
// minimizer reproducible under degeneracy.
class StepSolver {
 public:
  StepResult minimize(const StepInput& in);

 private:
  LpSolver lp_;
  LpProblem prob_;
};

// Human-readable description of the admissible set at one (t, state):
// box bounds, the power-balance equality, and the active boundary rows.
struct ConstraintSet {
  ControlLayout layout;
  std::vector<std::pair<double, double>> box;
  struct LinRow {
    std::vector<double> coef;
    double lo = 0.0, hi = 0.0;
    std::string label;
  };
  std::vector<LinRow> rows;
  double max_generation = 0.0;  // kW at the current state
  double min_generation = 0.0;
};

ConstraintSet admissible_set(const StepInput& in);

// Boundary-rule helper: a component within `trigger` of 0 forces nonnegative
// drift, within `trigger` of 1 forces nonpositive drift.
DriftMode boundary_mode(double x, double trigger);

// Relaxed running cost (USD/h): instantaneous cost plus the multiplier terms.
double relaxed_running_cost(const SystemSpec& sys, const MultiplierSet& lambda, double t,
                            const std::vector<double>& outflow,
                            const std::vector<double>& ffs_frac,
                            const std::vector<double>& virt);

// State velocity (1/h) under the relaxed dynamics.
std::vector<double> relaxed_drift(const SystemSpec& sys, const std::vector<double>& state,
                                  const ExtendedControl& u, const std::vector<double>& inflow,
                                  const std::vector<double>& arrivals);

}  // namespace dispatch

#endif
