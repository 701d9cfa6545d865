#include "dispatch/grid.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "dispatch/errors.hpp"
#include "dispatch/units.hpp"

namespace dispatch {

Grid Grid::uniform(double horizon, double dt, double dx, int dims) {
  if (!(horizon > 0.0) || !(dt > 0.0) || !(dx > 0.0) || dims < 1)
    throw ValidationError("grid: horizon, dt, dx must be positive");
  double n = horizon / dt;
  if (std::fabs(n - std::round(n)) > 1e-9)
    throw ValidationError("grid: dt must divide the horizon");
  double m = 1.0 / dx;
  if (std::fabs(m - std::round(m)) > 1e-9 || std::round(m) < 1.0)
    throw ValidationError("grid: dx must divide [0,1]");
  Grid g;
  g.horizon = horizon;
  g.dt = dt;
  g.cells.assign(dims, static_cast<int>(std::round(m)));
  g.dx.assign(dims, 1.0 / std::round(m));
  return g;
}

int Grid::time_levels() const {
  return static_cast<int>(std::llround(horizon / dt)) + 1;
}

std::size_t Grid::nodes() const {
  std::size_t n = 1;
  for (int m : cells) n *= static_cast<std::size_t>(m) + 1;
  return n;
}

double Grid::coord(int dim, int k) const {
  if (k == cells[dim]) return 1.0;
  return k * dx[dim];
}

std::size_t Grid::flat_index(const std::vector<int>& idx) const {
  std::size_t f = 0;
  for (int d = 0; d < dims(); ++d) f = f * (cells[d] + 1) + idx[d];
  return f;
}

void Grid::unflatten(std::size_t node, std::vector<int>& idx) const {
  idx.resize(dims());
  for (int d = dims() - 1; d >= 0; --d) {
    idx[d] = static_cast<int>(node % (cells[d] + 1));
    node /= cells[d] + 1;
  }
}

CflReport cfl_report(const SystemSpec& sys, const Grid& grid, const SeriesSet& series,
                     double margin) {
  if (grid.dims() != sys.state_dim())
    throw ValidationError("grid dimension does not match the system state");
  CflReport rep;
  rep.margin = margin;
  const int nd = sys.n_dams();
  for (int i = 0; i < nd; ++i) {
    const DamSpec& dam = sys.dams[i];
    CflReport::Dim d;
    d.name = dam.name;
    double out_max = flow_per_hour(dam.total_max_flow);
    d.table_term = out_max / dam.volume_span();
    double virt_max = 0.0;
    for (int up : sys.upstream[i]) virt_max += flow_per_hour(sys.dams[up].total_max_flow);
    double inflow_max = series.inflow[i].max_value();
    double inflow_min = series.inflow[i].min_value();
    d.sup_drift = std::max((inflow_max + virt_max) / dam.volume_span(),
                           (out_max - inflow_min) / dam.volume_span());
    d.per_dx = std::max(d.table_term, d.sup_drift) / grid.dx[i];
    rep.dims.push_back(std::move(d));
  }
  {
    CflReport::Dim d;
    d.name = "battery";
    double rate = sys.battery.max_discharge / sys.battery.capacity;
    d.table_term = rate * std::max(1.0, sys.battery.charge_ratio());
    d.sup_drift = d.table_term;
    d.per_dx = d.table_term / grid.dx[nd];
    rep.dims.push_back(std::move(d));
  }
  rep.sum_per_dx = 0.0;
  for (const auto& d : rep.dims) rep.sum_per_dx += d.per_dx;
  rep.courant = grid.dt * rep.sum_per_dx;
  rep.dt_max = rep.sum_per_dx > 0.0 ? margin / rep.sum_per_dx : 1e300;
  rep.satisfied = rep.courant <= margin;
  return rep;
}

std::string format_cfl_report(const CflReport& r, double dt) {
  std::ostringstream os;
  char buf[160];
  os << "dimension            outflow-term(1/h)   sup|f|(1/h)    term/dx(1/h)\n";
  for (const auto& d : r.dims) {
    std::snprintf(buf, sizeof(buf), "%-20s %15.6e %15.6e %15.6e\n", d.name.c_str(),
                  d.table_term, d.sup_drift, d.per_dx);
    os << buf;
  }
  std::snprintf(buf, sizeof(buf),
                "sum/dx = %.6e 1/h   courant(dt=%.4g h) = %.4f   margin = %.2f   dt_max = %.4f h\n",
                r.sum_per_dx, dt, r.courant, r.margin, r.dt_max);
  os << buf;
  os << (r.satisfied ? "CFL satisfied\n" : "CFL VIOLATED: reduce dt below dt_max\n");
  return os.str();
}

}  // namespace dispatch
