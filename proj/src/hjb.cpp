#include "dispatch/hjb.hpp"

#include <cmath>

#include "dispatch/errors.hpp"
#include "dispatch/parallel.hpp"
#include "dispatch/relaxation.hpp"
#include "dispatch/units.hpp"

namespace dispatch {

ValueField solve_hjb(const SystemSpec& sys, const Grid& grid, const MultiplierSet& lambda,
                     const SeriesSet& series, const HjbOptions& opts) {
  series.check_cover(sys, grid.horizon);
  CflReport cfl = cfl_report(sys, grid, series, opts.cfl_margin);
  if (!cfl.satisfied)
    throw ValidationError("CFL violated: Courant number " + std::to_string(cfl.courant) +
                          " exceeds margin " + std::to_string(cfl.margin) +
                          "; dt_max = " + std::to_string(cfl.dt_max) + " h");

  const int nd = sys.n_dams();
  const int dims = grid.dims();

  // dam capacity tables per grid coordinate; node states repeat along each axis
  std::vector<std::vector<double>> tur_tab(nd), spill_tab(nd), power_tab(nd);
  for (int i = 0; i < nd; ++i) {
    int m = grid.cells[i];
    tur_tab[i].resize(m + 1);
    spill_tab[i].resize(m + 1);
    power_tab[i].resize(m + 1);
    for (int k = 0; k <= m; ++k) {
      double v = grid.coord(i, k);
      double tur = sys.dams[i].max_turbine_flow(v);
      tur_tab[i][k] = flow_per_hour(tur);
      spill_tab[i][k] = flow_per_hour(sys.dams[i].total_max_flow - tur);
      power_tab[i][k] = sys.dams[i].power_coefficient_clamped(v);
    }
  }

  ValueField field(grid);
  const std::size_t n_nodes = grid.nodes();
  std::vector<std::size_t> stride(dims, 1);
  for (int d = dims - 2; d >= 0; --d) stride[d] = stride[d + 1] * (grid.cells[d + 1] + 1);

  for (int level = grid.steps(); level >= 1; --level) {
    const double t = level * grid.dt;
    double demand = series.demand.at(t);
    std::vector<double> inflow(nd);
    for (int i = 0; i < nd; ++i) inflow[i] = series.inflow[i].at(t);
    std::vector<double> lam_now(sys.n_links()), lam_ahead(sys.n_links());
    for (int l = 0; l < sys.n_links(); ++l) {
      lam_now[l] = lambda.eval(l, t);
      lam_ahead[l] = lambda.eval(l, t + lambda.links()[l].tau);
    }
    const double* u_cur = field.level_data(level);
    double* u_prev = field.level_data(level - 1);

    parallel_for(n_nodes, opts.threads, [&](std::size_t node) {
      thread_local StepSolver solver;
      thread_local StepInput in;
      thread_local std::vector<int> idx;
      grid.unflatten(node, idx);

      in.sys = &sys;
      in.t = t;
      in.demand = demand;
      in.with_virtuals = true;
      in.voll = opts.voll;
      in.inflow = inflow;
      in.arrivals.assign(nd, 0.0);
      in.lambda_now = lam_now;
      in.lambda_ahead = lam_ahead;
      in.pen_q.clear();
      in.pen_target.clear();

      in.state.resize(dims);
      in.mode.resize(dims);
      in.du_minus.resize(dims);
      in.du_plus.resize(dims);
      in.tur_cap.resize(nd);
      in.spill_cap.resize(nd);
      in.power_coef.resize(nd);
      for (int d = 0; d < dims; ++d) {
        int k = idx[d];
        in.state[d] = grid.coord(d, k);
        if (k == 0)
          in.mode[d] = DriftMode::kForceUp;
        else if (k == grid.cells[d])
          in.mode[d] = DriftMode::kForceDown;
        else
          in.mode[d] = DriftMode::kFree;
        // one-sided differences; domain faces fall back to the interior side
        bool has_lo = k > 0, has_hi = k < grid.cells[d];
        double lo = has_lo ? (u_cur[node] - u_cur[node - stride[d]]) / grid.dx[d] : 0.0;
        double hi = has_hi ? (u_cur[node + stride[d]] - u_cur[node]) / grid.dx[d] : 0.0;
        if (!has_lo) lo = hi;
        if (!has_hi) hi = lo;
        in.du_minus[d] = lo;
        in.du_plus[d] = hi;
      }
      for (int i = 0; i < nd; ++i) {
        in.tur_cap[i] = tur_tab[i][idx[i]];
        in.spill_cap[i] = spill_tab[i][idx[i]];
        in.power_coef[i] = power_tab[i][idx[i]];
      }

      StepResult r = solver.minimize(in);
      if (!r.feasible)
        throw NumericError("hjb: infeasible node at t=" + std::to_string(t) + ", node " +
                           std::to_string(node));
      double updated = u_cur[node] + grid.dt * r.objective;
      if (!std::isfinite(updated))
        throw NumericError("hjb: non-finite update at t=" + std::to_string(t) + ", node " +
                           std::to_string(node));
      u_prev[node] = updated;
    });
  }
  return field;
}

}  // namespace dispatch
