#include "dispatch/relaxation.hpp"

#include <algorithm>
#include <cmath>

#include "dispatch/errors.hpp"
#include "dispatch/units.hpp"

namespace dispatch {

namespace {

struct DimOption {
  double grad = 0.0;  // one-sided derivative matching the sign branch
  int sign = 0;       // +1: drift >= 0, -1: drift <= 0, 0: unconstrained
  bool add_row = false;
};

constexpr double kRangeEps = 1e-12;

}  // namespace

void StepInput::prepare() {
  const int nd = sys->n_dams();
  tur_cap.resize(nd);
  spill_cap.resize(nd);
  power_coef.resize(nd);
  for (int i = 0; i < nd; ++i) {
    const DamSpec& dam = sys->dams[i];
    double tur = dam.max_turbine_flow(state[i]);
    tur_cap[i] = flow_per_hour(tur);
    spill_cap[i] = flow_per_hour(dam.total_max_flow - tur);
    power_coef[i] = dam.power_coefficient_clamped(state[i]);
  }
  if (arrivals.empty()) arrivals.assign(nd, 0.0);
  if (mode.empty()) mode.assign(nd + 1, DriftMode::kFree);
  if (lambda_now.empty()) lambda_now.assign(sys->n_links(), 0.0);
  if (lambda_ahead.empty()) lambda_ahead.assign(sys->n_links(), 0.0);
}

ControlLayout StepInput::layout() const {
  ControlLayout l;
  l.nd = sys->n_dams();
  l.nf = sys->n_ffs();
  l.nl = sys->n_links();
  l.with_virtuals = with_virtuals;
  return l;
}

DriftMode boundary_mode(double x, double trigger) {
  if (x <= trigger) return DriftMode::kForceUp;
  if (x >= 1.0 - trigger) return DriftMode::kForceDown;
  return DriftMode::kFree;
}

namespace {

// Per-dimension sign-branch options. Forced boundary modes yield one option
// with a mandatory row; free dimensions split only when the drift can take
// both signs and the two one-sided derivatives differ.
void dim_options(const StepInput& in, int k, std::vector<DimOption>& out) {
  out.clear();
  const int nd = in.sys->n_dams();
  const double dplus = in.du_plus[k];
  const double dminus = in.du_minus[k];
  if (in.mode[k] == DriftMode::kForceUp) {
    out.push_back({dplus, +1, true});
    return;
  }
  if (in.mode[k] == DriftMode::kForceDown) {
    out.push_back({dminus, -1, true});
    return;
  }
  if (dplus == dminus) {
    out.push_back({dplus, 0, false});
    return;
  }
  double f_hi, f_lo;
  if (k < nd) {
    double virt_max = 0.0;
    if (in.with_virtuals) {
      for (int l = 0; l < in.sys->n_links(); ++l) {
        int up = in.sys->links[l];
        if (in.sys->dams[up].downstream && *in.sys->dams[up].downstream - 1 == k)
          virt_max += flow_per_hour(in.sys->dams[up].total_max_flow);
      }
    }
    double span = in.sys->dams[k].volume_span();
    f_hi = (in.inflow[k] + in.arrivals[k] + virt_max) / span;
    f_lo = (in.inflow[k] + in.arrivals[k] - in.tur_cap[k] - in.spill_cap[k]) / span;
  } else {
    double rate = in.sys->battery.max_discharge / in.sys->battery.capacity;
    f_hi = rate * in.sys->battery.charge_ratio();
    f_lo = -rate;
  }
  double eps = kRangeEps * std::max({1.0, std::fabs(f_hi), std::fabs(f_lo)});
  if (f_lo >= -eps) {
    out.push_back({dplus, +1, false});
  } else if (f_hi <= eps) {
    out.push_back({dminus, -1, false});
  } else {
    out.push_back({dplus, +1, true});
    out.push_back({dminus, -1, true});
  }
}

}  // namespace

StepResult StepSolver::minimize(const StepInput& in) {
  const SystemSpec& sys = *in.sys;
  const int nd = sys.n_dams();
  const int nl = sys.n_links();
  const ControlLayout lay = in.layout();
  const int ncols = lay.size();

  const bool quadratic = !in.pen_q.empty() &&
                         std::any_of(in.pen_q.begin(), in.pen_q.end(),
                                     [](double q) { return q > 0.0; });
  if (quadratic && in.with_virtuals)
    throw NumericError("step: smoothing penalties require the delay-respecting mode");

  std::vector<std::vector<DimOption>> options(nd + 1);
  std::vector<int> split_dims;
  for (int k = 0; k <= nd; ++k) {
    dim_options(in, k, options[k]);
    if (options[k].size() == 2) split_dims.push_back(k);
  }
  if (split_dims.size() > 24) throw NumericError("step: too many ambiguous drift signs");
  const unsigned patterns = 1u << split_dims.size();

  // column data independent of the pattern
  std::vector<double> base_cost(ncols, 0.0);
  std::vector<double> lo(ncols, 0.0), hi(ncols, 1.0);
  std::vector<double> bal(ncols, 0.0);
  for (int i = 0; i < nd; ++i) {
    int l = sys.link_of[i];
    double sell = l >= 0 ? in.lambda_ahead[l] : 0.0;
    base_cost[lay.turbine(i)] = in.tur_cap[i] * (sys.dams[i].water_cost - sell);
    base_cost[lay.spill(i)] = in.spill_cap[i] * (sys.dams[i].water_cost - sell);
    bal[lay.turbine(i)] = in.power_coef[i];
  }
  for (int c = 0; c < sys.n_ffs(); ++c) {
    base_cost[lay.ffs(c)] = sys.ffs[c].cost_rate();
    bal[lay.ffs(c)] = sys.ffs[c].max_power;
  }
  const double batt_rate = sys.battery.max_discharge / sys.battery.capacity;  // 1/h
  bal[lay.battery()] = sys.battery.max_discharge;
  lo[lay.battery()] = -sys.battery.charge_ratio();
  if (lay.with_virtuals) {
    for (int l = 0; l < nl; ++l)
      base_cost[lay.virt(l)] =
          in.lambda_now[l] * flow_per_hour(sys.dams[sys.links[l]].total_max_flow);
  }
  base_cost[lay.slack()] = in.voll / kKwPerMw;
  bal[lay.slack()] = 1.0;
  hi[lay.slack()] = std::max(in.demand, 0.0) + 1.0;

  StepResult best;
  std::vector<double> best_x;
  double best_obj = 0.0;

  std::vector<double> cost(ncols);
  std::vector<int> choice(nd + 1, 0);

  for (unsigned pat = 0; pat < patterns; ++pat) {
    for (std::size_t b = 0; b < split_dims.size(); ++b)
      choice[split_dims[b]] = (pat >> b) & 1u;

    cost = base_cost;
    double obj_const = 0.0;
    double batt_lo = lo[lay.battery()], batt_hi = hi[lay.battery()];
    for (int i = 0; i < nd; ++i) {
      const DimOption& opt = options[i][choice[i]];
      double difac = opt.grad / sys.dams[i].volume_span();  // USD per m3
      cost[lay.turbine(i)] -= in.tur_cap[i] * difac;
      cost[lay.spill(i)] -= in.spill_cap[i] * difac;
      obj_const += (in.inflow[i] + in.arrivals[i]) * difac;
      if (lay.with_virtuals) {
        for (int l = 0; l < nl; ++l) {
          int up = sys.links[l];
          if (sys.dams[up].downstream && *sys.dams[up].downstream - 1 == i)
            cost[lay.virt(l)] += flow_per_hour(sys.dams[up].total_max_flow) * difac;
        }
      }
    }
    {
      const DimOption& opt = options[nd][choice[nd]];
      cost[lay.battery()] = -batt_rate * opt.grad;
      if (opt.sign > 0) batt_hi = std::min(batt_hi, 0.0);   // drift >= 0: charging only
      if (opt.sign < 0) batt_lo = std::max(batt_lo, 0.0);   // drift <= 0: discharging only
      if (batt_lo > batt_hi) continue;
    }

    // rows: balance first, then the sign/boundary rows that are not box-implied
    prob_.clear();
    prob_.cost = cost;
    prob_.lower = lo;
    prob_.upper = hi;
    prob_.lower[lay.battery()] = batt_lo;
    prob_.upper[lay.battery()] = batt_hi;

    LpProblem::Row balance;
    balance.coef = bal;
    balance.lo = balance.hi = in.demand;
    prob_.rows.push_back(std::move(balance));

    bool pattern_ok = true;
    for (int i = 0; i < nd && pattern_ok; ++i) {
      const DimOption& opt = options[i][choice[i]];
      if (!opt.add_row || opt.sign == 0) continue;
      double rhs = in.inflow[i] + in.arrivals[i];
      double expr_max = in.tur_cap[i] + in.spill_cap[i];
      double expr_min = 0.0;
      LpProblem::Row row;
      row.coef.assign(ncols, 0.0);
      row.coef[lay.turbine(i)] = in.tur_cap[i];
      row.coef[lay.spill(i)] = in.spill_cap[i];
      if (lay.with_virtuals) {
        for (int l = 0; l < nl; ++l) {
          int up = sys.links[l];
          if (sys.dams[up].downstream && *sys.dams[up].downstream - 1 == i) {
            double psi = flow_per_hour(sys.dams[up].total_max_flow);
            row.coef[lay.virt(l)] = -psi;
            expr_min -= psi;
          }
        }
      }
      double pad = 1.0 + 0.1 * (std::fabs(expr_min) + std::fabs(expr_max));
      if (opt.sign > 0) {  // outflow - virtual inflow <= natural inflow
        row.lo = expr_min - pad;
        row.hi = rhs;
        if (expr_min > rhs) pattern_ok = false;
      } else {  // outflow - virtual inflow >= natural inflow
        row.lo = rhs;
        row.hi = expr_max + pad;
        if (expr_max < rhs) pattern_ok = false;
      }
      prob_.rows.push_back(std::move(row));
    }
    if (!pattern_ok) continue;

    double value = 0.0;
    const std::vector<double>* xout = nullptr;
    std::vector<double> qp_x;
    if (!quadratic) {
      const LpResult& r = lp_.solve(prob_);
      if (r.status != LpStatus::kOptimal) continue;
      value = r.value;
      xout = &r.x;
    } else {
      SepQp qp;
      qp.demand = in.demand;
      qp.cols.resize(ncols);
      for (int j = 0; j < ncols; ++j) {
        qp.cols[j] = {prob_.lower[j], prob_.upper[j], cost[j], 0.0, 0.0, bal[j]};
        if (j < lay.n_controls() && !in.pen_q.empty() && in.pen_q[j] > 0.0) {
          qp.cols[j].q = in.pen_q[j];
          qp.cols[j].target = in.pen_target[j];
        }
      }
      for (std::size_t r = 1; r < prob_.rows.size(); ++r) {
        const auto& row = prob_.rows[r];
        SepQp::Slab sl;
        int found = 0;
        for (int j = 0; j < ncols; ++j) {
          if (row.coef[j] == 0.0) continue;
          if (found == 0) { sl.a = j; sl.pa = row.coef[j]; }
          else if (found == 1) { sl.b = j; sl.pb = row.coef[j]; }
          ++found;
        }
        if (found > 2) throw NumericError("step: slab row with more than two columns");
        if (found == 1) { sl.b = sl.a; sl.pb = 0.0; }
        sl.lo = row.lo;
        sl.hi = row.hi;
        qp.slabs.push_back(sl);
      }
      SepQpResult r = solve_separable_qp(qp, lp_);
      if (!r.feasible) continue;
      value = r.value;
      qp_x = std::move(r.x);
      xout = &qp_x;
    }

    double total = value + obj_const;
    if (!std::isfinite(total)) throw NumericError("step: non-finite objective");
    if (!best.feasible || total < best_obj) {
      best.feasible = true;
      best_obj = total;
      best_x = *xout;
    }
  }

  if (!best.feasible) return best;

  best.objective = best_obj;
  const std::vector<double>& x = best_x;
  best.control.turbine.resize(nd);
  best.control.spill.resize(nd);
  best.control.ffs.resize(sys.n_ffs());
  best.outflow.resize(nd);
  best.drift.resize(nd + 1);
  for (int i = 0; i < nd; ++i) {
    best.control.turbine[i] = x[lay.turbine(i)];
    best.control.spill[i] = x[lay.spill(i)];
    best.outflow[i] = in.tur_cap[i] * x[lay.turbine(i)] + in.spill_cap[i] * x[lay.spill(i)];
  }
  for (int c = 0; c < sys.n_ffs(); ++c) best.control.ffs[c] = x[lay.ffs(c)];
  best.control.battery = x[lay.battery()];
  if (lay.with_virtuals) {
    best.control.virt.resize(nl);
    for (int l = 0; l < nl; ++l) best.control.virt[l] = x[lay.virt(l)];
  }
  best.control.slack_kw = x[lay.slack()];
  best.shortfall = x[lay.slack()];

  for (int i = 0; i < nd; ++i) {
    double virt_in = 0.0;
    for (int l = 0; l < nl; ++l) {
      int up = sys.links[l];
      if (lay.with_virtuals && sys.dams[up].downstream && *sys.dams[up].downstream - 1 == i)
        virt_in += flow_per_hour(sys.dams[up].total_max_flow) * best.control.virt[l];
    }
    best.drift[i] = (in.inflow[i] + in.arrivals[i] + virt_in - best.outflow[i]) /
                    sys.dams[i].volume_span();
  }
  best.drift[nd] = -batt_rate * best.control.battery;

  best.generation = 0.0;
  for (int i = 0; i < nd; ++i) best.generation += in.power_coef[i] * best.control.turbine[i];
  for (int c = 0; c < sys.n_ffs(); ++c)
    best.generation += sys.ffs[c].max_power * best.control.ffs[c];
  best.generation += sys.battery.max_discharge * best.control.battery;
  return best;
}

ConstraintSet admissible_set(const StepInput& in) {
  const SystemSpec& sys = *in.sys;
  const int nd = sys.n_dams();
  ConstraintSet cs;
  cs.layout = in.layout();
  const int ncols = cs.layout.size();
  cs.box.assign(ncols, {0.0, 1.0});
  cs.box[cs.layout.battery()] = {-sys.battery.charge_ratio(), 1.0};
  cs.box[cs.layout.slack()] = {0.0, std::max(in.demand, 0.0) + 1.0};

  ConstraintSet::LinRow balance;
  balance.coef.assign(ncols, 0.0);
  for (int i = 0; i < nd; ++i) balance.coef[cs.layout.turbine(i)] = in.power_coef[i];
  for (int c = 0; c < sys.n_ffs(); ++c)
    balance.coef[cs.layout.ffs(c)] = sys.ffs[c].max_power;
  balance.coef[cs.layout.battery()] = sys.battery.max_discharge;
  balance.coef[cs.layout.slack()] = 1.0;
  balance.lo = balance.hi = in.demand;
  balance.label = "power balance";
  cs.rows.push_back(std::move(balance));

  for (int i = 0; i < nd; ++i) {
    if (in.mode[i] == DriftMode::kFree) continue;
    ConstraintSet::LinRow row;
    row.coef.assign(ncols, 0.0);
    row.coef[cs.layout.turbine(i)] = in.tur_cap[i];
    row.coef[cs.layout.spill(i)] = in.spill_cap[i];
    double expr_min = 0.0, expr_max = in.tur_cap[i] + in.spill_cap[i];
    if (in.with_virtuals) {
      for (int l = 0; l < sys.n_links(); ++l) {
        int up = sys.links[l];
        if (sys.dams[up].downstream && *sys.dams[up].downstream - 1 == i) {
          double psi = flow_per_hour(sys.dams[up].total_max_flow);
          row.coef[cs.layout.virt(l)] = -psi;
          expr_min -= psi;
        }
      }
    }
    double rhs = in.inflow[i] + in.arrivals[i];
    if (in.mode[i] == DriftMode::kForceDown) {
      row.lo = rhs;
      row.hi = expr_max + 1.0;
      row.label = "dam " + sys.dams[i].name + ": outflow >= inflow (full reservoir)";
    } else {
      row.lo = expr_min - 1.0;
      row.hi = rhs;
      row.label = "dam " + sys.dams[i].name + ": outflow <= inflow (empty reservoir)";
    }
    cs.rows.push_back(std::move(row));
  }
  if (in.mode[nd] == DriftMode::kForceDown) {
    cs.box[cs.layout.battery()].first = 0.0;  // full battery: discharge only
  } else if (in.mode[nd] == DriftMode::kForceUp) {
    cs.box[cs.layout.battery()].second = 0.0;  // empty battery: charge only
  }

  cs.max_generation = 0.0;
  for (int i = 0; i < nd; ++i) cs.max_generation += in.power_coef[i];
  for (const auto& f : sys.ffs) cs.max_generation += f.max_power;
  cs.max_generation += sys.battery.max_discharge;
  cs.min_generation = -sys.battery.max_charge;
  return cs;
}

double relaxed_running_cost(const SystemSpec& sys, const MultiplierSet& lambda, double t,
                            const std::vector<double>& outflow,
                            const std::vector<double>& ffs_frac,
                            const std::vector<double>& virt) {
  double rate = instantaneous_cost(sys, outflow, ffs_frac);
  for (int l = 0; l < lambda.n_links(); ++l) {
    int up = sys.links[l];
    double psi_bar = flow_per_hour(sys.dams[up].total_max_flow);
    if (!virt.empty()) rate += lambda.eval(l, t) * psi_bar * virt[l];
    double tau = lambda.links()[l].tau;
    if (t + tau <= lambda.horizon()) rate -= lambda.eval(l, t + tau) * outflow[up];
  }
  return rate;
}

std::vector<double> relaxed_drift(const SystemSpec& sys, const std::vector<double>& state,
                                  const ExtendedControl& u, const std::vector<double>& inflow,
                                  const std::vector<double>& arrivals) {
  const int nd = sys.n_dams();
  std::vector<double> f(nd + 1, 0.0);
  for (int i = 0; i < nd; ++i) {
    const DamSpec& dam = sys.dams[i];
    double tur_cap = flow_per_hour(dam.max_turbine_flow(state[i]));
    double spill_cap = flow_per_hour(dam.total_max_flow) - tur_cap;
    double out = tur_cap * u.turbine[i] + spill_cap * u.spill[i];
    double virt_in = 0.0;
    if (!u.virt.empty()) {
      for (int l = 0; l < sys.n_links(); ++l) {
        int up = sys.links[l];
        if (sys.dams[up].downstream && *sys.dams[up].downstream - 1 == i)
          virt_in += flow_per_hour(sys.dams[up].total_max_flow) * u.virt[l];
      }
    }
    double arr = arrivals.empty() ? 0.0 : arrivals[i];
    f[i] = (inflow[i] + arr + virt_in - out) / dam.volume_span();
  }
  f[nd] = -(sys.battery.max_discharge / sys.battery.capacity) * u.battery;
  return f;
}

}  // namespace dispatch
