#include "dispatch/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "dispatch/errors.hpp"
#include "dispatch/units.hpp"

namespace dispatch {

namespace {

enum class PathKind { kRelaxed, kAdmissible, kSmoothed };

int delay_steps(double tau, double dt) {
  double s = tau / dt;
  if (std::fabs(s - std::round(s)) > 1e-9)
    throw ValidationError("delay of " + std::to_string(tau) +
                          " h is not a multiple of the time step");
  return static_cast<int>(std::round(s));
}

struct PathAccum {
  Trajectory traj;
  std::vector<std::vector<double>> xi;
  double lagrangian = 0.0;
};

PathAccum run_path(const SystemSpec& sys, const ValueField& field, const MultiplierSet& lambda,
                   const SeriesSet& series, const std::vector<double>& x0,
                   const PenaltyVector& beta, PathKind kind, const SimOptions& opts) {
  const Grid& grid = field.grid();
  const int nd = sys.n_dams();
  const int dims = grid.dims();
  if (static_cast<int>(x0.size()) != dims)
    throw ValidationError("initial state dimension mismatch");
  for (double v : x0)
    if (!(v >= 0.0 && v <= 1.0)) throw ValidationError("initial state outside [0,1]");
  series.check_cover(sys, grid.horizon);

  const bool relaxed = kind == PathKind::kRelaxed;
  const bool penalized = kind == PathKind::kSmoothed && beta.any();

  std::vector<int> dsteps(sys.n_links());
  for (int l = 0; l < sys.n_links(); ++l)
    dsteps[l] = delay_steps(lambda.links()[l].tau, grid.dt);

  PathAccum acc;
  Trajectory& traj = acc.traj;
  traj.dt = grid.dt;
  traj.beta = beta;
  acc.xi.resize(sys.n_links());
  for (int l = 0; l < sys.n_links(); ++l)
    acc.xi[l].assign(lambda.links()[l].coeffs.size(), 0.0);

  std::vector<double> state = x0;
  traj.states.push_back(state);

  StepSolver solver;
  StepInput in;
  in.sys = &sys;
  in.voll = opts.voll;
  in.with_virtuals = relaxed;

  // previous-step physical controls for the smoothing penalty
  std::vector<double> prev_tur_phys(nd, 0.0), prev_spill_phys(nd, 0.0);
  std::vector<double> prev_ffs_phys(sys.n_ffs(), 0.0);
  double prev_batt_phys = 0.0;

  const ControlLayout lay = [&] {
    StepInput probe;
    probe.sys = &sys;
    probe.with_virtuals = relaxed;
    return probe.layout();
  }();

  for (int s = 0; s < grid.steps(); ++s) {
    const double t = s * grid.dt;
    in.t = t;
    in.state = state;
    in.demand = series.demand.at(t);
    in.inflow.resize(nd);
    for (int i = 0; i < nd; ++i) in.inflow[i] = series.inflow[i].at(t);

    in.arrivals.assign(nd, 0.0);
    if (!relaxed) {
      for (int l = 0; l < sys.n_links(); ++l) {
        int up = sys.links[l];
        int down = *sys.dams[up].downstream - 1;
        int from = s - dsteps[l];
        if (from >= 0) in.arrivals[down] += traj.outflow[from][up];
      }
    }

    in.prepare();
    in.lambda_now.resize(sys.n_links());
    in.lambda_ahead.resize(sys.n_links());
    for (int l = 0; l < sys.n_links(); ++l) {
      in.lambda_now[l] = lambda.eval(l, t);
      in.lambda_ahead[l] = lambda.eval(l, t + lambda.links()[l].tau);
    }
    in.mode.resize(dims);
    for (int d = 0; d < dims; ++d)
      in.mode[d] = boundary_mode(state[d], 0.5 * grid.dx[d]);

    GradientPair gp = field.gradient_at_level(s, state);
    in.du_minus = gp.minus;
    in.du_plus = gp.plus;

    in.pen_q.clear();
    in.pen_target.clear();
    if (penalized && s > 0) {
      in.pen_q.assign(lay.n_controls(), 0.0);
      in.pen_target.assign(lay.n_controls(), 0.0);
      for (int i = 0; i < nd; ++i) {
        double scale = flow_per_hour(sys.dams[i].total_max_flow);
        if (beta.turbine > 0.0 && in.tur_cap[i] > 0.0) {
          double a = in.tur_cap[i] / (scale * grid.dt);
          in.pen_q[lay.turbine(i)] = beta.turbine * a * a;
          in.pen_target[lay.turbine(i)] = prev_tur_phys[i] / in.tur_cap[i];
        }
        if (beta.spill > 0.0 && in.spill_cap[i] > 0.0) {
          double a = in.spill_cap[i] / (scale * grid.dt);
          in.pen_q[lay.spill(i)] = beta.spill * a * a;
          in.pen_target[lay.spill(i)] = prev_spill_phys[i] / in.spill_cap[i];
        }
      }
      for (int c = 0; c < sys.n_ffs(); ++c) {
        if (beta.ffs > 0.0) {
          double a = 1.0 / grid.dt;  // physical scale cancels for constant capacity
          in.pen_q[lay.ffs(c)] = beta.ffs * a * a;
          in.pen_target[lay.ffs(c)] = prev_ffs_phys[c] / sys.ffs[c].max_power;
        }
      }
      if (beta.battery > 0.0) {
        double a = 1.0 / grid.dt;
        in.pen_q[lay.battery()] = beta.battery * a * a;
        in.pen_target[lay.battery()] = prev_batt_phys / sys.battery.max_discharge;
      }
    }

    StepResult r = solver.minimize(in);
    if (!r.feasible || r.shortfall > 1e-9 * std::max(1.0, std::fabs(in.demand))) {
      double shortfall = r.feasible ? r.shortfall : in.demand;
      throw InfeasibleError("demand cannot be met at t=" + std::to_string(t) + " h (shortfall " +
                            std::to_string(shortfall) + " kW)", t, shortfall);
    }

    traj.times.push_back(t);
    traj.controls.push_back(r.control);
    traj.outflow.push_back(r.outflow);
    traj.arrivals.push_back(in.arrivals);
    traj.generation.push_back(r.generation);
    traj.demand.push_back(in.demand);
    traj.primal_cost += grid.dt * instantaneous_cost(sys, r.outflow, r.control.ffs);

    if (relaxed) {
      acc.lagrangian += grid.dt * relaxed_running_cost(sys, lambda, t, r.outflow,
                                                       r.control.ffs, r.control.virt);
      for (int l = 0; l < sys.n_links(); ++l) {
        int up = sys.links[l];
        double psi_bar = flow_per_hour(sys.dams[up].total_max_flow);
        int k = lambda.segment_of(l, t);
        if (k >= 0) acc.xi[l][k] += grid.dt * psi_bar * r.control.virt[l];
        int k2 = lambda.segment_of(l, t + lambda.links()[l].tau);
        if (k2 >= 0) acc.xi[l][k2] -= grid.dt * r.outflow[up];
      }
    }

    // squared-variation integrals of the scaled physical controls (always
    // recorded; the L-curve tuning reads them off unpenalized runs too)
    for (int i = 0; i < nd; ++i) {
      double scale = flow_per_hour(sys.dams[i].total_max_flow);
      double tur_phys = in.tur_cap[i] * r.control.turbine[i];
      double spill_phys = in.spill_cap[i] * r.control.spill[i];
      if (s > 0) {
        double dtur = (tur_phys - prev_tur_phys[i]) / (scale * grid.dt);
        double dspill = (spill_phys - prev_spill_phys[i]) / (scale * grid.dt);
        traj.variation.turbine += grid.dt * dtur * dtur;
        traj.variation.spill += grid.dt * dspill * dspill;
      }
      prev_tur_phys[i] = tur_phys;
      prev_spill_phys[i] = spill_phys;
    }
    for (int c = 0; c < sys.n_ffs(); ++c) {
      double p = sys.ffs[c].max_power * r.control.ffs[c];
      if (s > 0) {
        double dp = (p - prev_ffs_phys[c]) / (sys.ffs[c].max_power * grid.dt);
        traj.variation.ffs += grid.dt * dp * dp;
      }
      prev_ffs_phys[c] = p;
    }
    double batt_phys = sys.battery.max_discharge * r.control.battery;
    if (s > 0) {
      double dpb = (batt_phys - prev_batt_phys) / (sys.battery.max_discharge * grid.dt);
      traj.variation.battery += grid.dt * dpb * dpb;
    }
    prev_batt_phys = batt_phys;

    for (int d = 0; d < dims; ++d) {
      double next = state[d] + grid.dt * r.drift[d];
      double clamped = std::clamp(next, 0.0, 1.0);
      traj.max_clamp = std::max(traj.max_clamp, std::fabs(next - clamped));
      state[d] = clamped;
    }
    traj.states.push_back(state);
  }
  return acc;
}

}  // namespace

std::vector<double> DualEval::xi_flat() const {
  std::vector<double> f;
  for (const auto& link : xi) f.insert(f.end(), link.begin(), link.end());
  return f;
}

DualEval simulate_relaxed(const SystemSpec& sys, const ValueField& field,
                          const MultiplierSet& lambda, const SeriesSet& series,
                          const std::vector<double>& x0, const SimOptions& opts) {
  PathAccum acc = run_path(sys, field, lambda, series, x0, {}, PathKind::kRelaxed, opts);
  DualEval ev;
  ev.theta = acc.lagrangian;
  ev.xi = std::move(acc.xi);
  ev.grid_value = field.value_at(0, x0);
  acc.traj.lagrangian = ev.theta;
  ev.traj = std::move(acc.traj);
  return ev;
}

Trajectory simulate_admissible(const SystemSpec& sys, const ValueField& field,
                               const MultiplierSet& lambda, const SeriesSet& series,
                               const std::vector<double>& x0, const SimOptions& opts) {
  return run_path(sys, field, lambda, series, x0, {}, PathKind::kAdmissible, opts).traj;
}

Trajectory simulate_smoothed(const SystemSpec& sys, const ValueField& field,
                             const MultiplierSet& lambda, const SeriesSet& series,
                             const std::vector<double>& x0, const PenaltyVector& beta,
                             const SimOptions& opts) {
  return run_path(sys, field, lambda, series, x0, beta, PathKind::kSmoothed, opts).traj;
}

double primal_cost(const SystemSpec& sys, const Trajectory& traj) {
  double total = 0.0;
  for (int s = 0; s < traj.steps(); ++s)
    total += traj.dt * instantaneous_cost(sys, traj.outflow[s], traj.controls[s].ffs);
  return total;
}

void write_trajectory_csv(const SystemSpec& sys, const Trajectory& traj,
                          const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write trajectory: " + path);
  const int nd = sys.n_dams();
  const int nf = sys.n_ffs();
  const int nl = sys.n_links();
  const bool virt = !traj.controls.empty() && !traj.controls.front().virt.empty();
  out << "# t in hours; v_hat/a_hat normalized; controls normalized; outflow and "
         "arrivals in m3/h; power and demand in kW; final row carries the terminal "
         "state with zero controls\n";
  out << "t_hours";
  for (int i = 0; i < nd; ++i) out << ",v_hat_" << i + 1;
  out << ",a_hat";
  for (int i = 0; i < nd; ++i) out << ",y_tur_" << i + 1;
  for (int i = 0; i < nd; ++i) out << ",y_spill_" << i + 1;
  for (int c = 0; c < nf; ++c) out << ",y_ffs_" << c + 1;
  out << ",y_battery";
  if (virt)
    for (int l = 0; l < nl; ++l) out << ",psi_hat_" << l + 1;
  for (int i = 0; i < nd; ++i) out << ",outflow_" << i + 1;
  for (int i = 0; i < nd; ++i) out << ",arrival_" << i + 1;
  for (int i = 0; i < nd; ++i) out << ",p_hydro_" << i + 1;
  for (int c = 0; c < nf; ++c) out << ",p_ffs_" << c + 1;
  out << ",p_battery,generation,demand\n";

  char buf[40];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof(buf), ",%.17g", v);
    out << buf;
  };
  for (int s = 0; s <= traj.steps(); ++s) {
    bool terminal = s == traj.steps();
    double t = terminal ? traj.steps() * traj.dt : traj.times[s];
    std::snprintf(buf, sizeof(buf), "%.17g", t);
    out << buf;
    for (int d = 0; d < nd + 1; ++d) put(traj.states[s][d]);
    const ExtendedControl* u = terminal ? nullptr : &traj.controls[s];
    for (int i = 0; i < nd; ++i) put(u ? u->turbine[i] : 0.0);
    for (int i = 0; i < nd; ++i) put(u ? u->spill[i] : 0.0);
    for (int c = 0; c < nf; ++c) put(u ? u->ffs[c] : 0.0);
    put(u ? u->battery : 0.0);
    if (virt)
      for (int l = 0; l < nl; ++l) put(u ? u->virt[l] : 0.0);
    for (int i = 0; i < nd; ++i) put(terminal ? 0.0 : traj.outflow[s][i]);
    for (int i = 0; i < nd; ++i) put(terminal ? 0.0 : traj.arrivals[s][i]);
    for (int i = 0; i < nd; ++i) {
      double p = 0.0;
      if (!terminal)
        p = sys.dams[i].power_coefficient_clamped(traj.states[s][i]) * u->turbine[i];
      put(p);
    }
    for (int c = 0; c < nf; ++c) put(terminal ? 0.0 : sys.ffs[c].max_power * u->ffs[c]);
    put(terminal ? 0.0 : sys.battery.max_discharge * u->battery);
    put(terminal ? 0.0 : traj.generation[s]);
    put(terminal ? 0.0 : traj.demand[s]);
    out << "\n";
  }
  if (!out) throw IoError("short write on trajectory: " + path);
}

}  // namespace dispatch
