#include "dispatch/system.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "dispatch/errors.hpp"
#include "dispatch/units.hpp"

namespace dispatch {

double TurbineFlowModel::eval(double head_diff) const {
  if (is_constant) return constant;
  auto lower = [&](double x) { return (c2 * x + c1) * x + c0; };
  if (!has_upper_branch || head_diff <= breakpoint) return lower(head_diff);
  auto upper = [&](double x) { return (g2 * x + g1) * x + g0; };
  // anchor the upper branch at the lower branch's breakpoint value
  return upper(head_diff) - upper(breakpoint) + lower(breakpoint);
}

void DamSpec::check_vhat(double vhat) const {
  if (!(vhat >= 0.0 && vhat <= 1.0))
    throw DomainError("dam " + name + ": normalized volume " + std::to_string(vhat) +
                      " outside [0,1]");
}

double DamSpec::head_at(double vhat) const {
  check_vhat(vhat);
  return head(vhat);
}

double DamSpec::max_turbine_flow(double vhat) const {
  check_vhat(vhat);
  double f = flow.eval(head(vhat) - tailwater);
  return std::min(f, total_max_flow);
}

double DamSpec::max_spill_flow(double vhat) const {
  return total_max_flow - max_turbine_flow(vhat);
}

double DamSpec::power_coefficient(double vhat) const {
  double tur = max_turbine_flow(vhat);
  double s = efficiency * tur * (head(vhat) - tailwater - head_loss * tur);
  if (s < 0.0)
    throw DomainError("dam " + name + ": head below tailwater at v^=" + std::to_string(vhat));
  return s;
}

double DamSpec::power_coefficient_clamped(double vhat) const {
  double tur = max_turbine_flow(vhat);
  double s = efficiency * tur * (head(vhat) - tailwater - head_loss * tur);
  return std::max(s, 0.0);
}

double FfsSpec::cost_rate() const { return cost * max_power / kKwPerMw; }

namespace {

void sweep_dam(const DamSpec& dam, std::vector<std::string>& errors,
               std::vector<std::string>& warnings) {
  constexpr int kSweep = 1000;
  double prev_head = -1e300;
  bool warned_power = false;
  for (int k = 0; k <= kSweep; ++k) {
    double v = static_cast<double>(k) / kSweep;
    double h = dam.head(v);
    if (h < prev_head - 1e-9 * std::max(1.0, std::fabs(prev_head))) {
      errors.push_back("dam " + dam.name + ": head not nondecreasing near v^=" +
                       std::to_string(v));
      break;
    }
    prev_head = h;
    double tur = dam.flow.eval(h - dam.tailwater);
    if (!(tur > 0.0)) {
      errors.push_back("dam " + dam.name + ": max turbine flow not positive at v^=" +
                       std::to_string(v));
      break;
    }
    if (tur > dam.total_max_flow * (1.0 + 1e-9)) {
      errors.push_back("dam " + dam.name + ": max turbine flow exceeds total max flow at v^=" +
                       std::to_string(v));
      break;
    }
    double s = dam.efficiency * tur * (h - dam.tailwater - dam.head_loss * tur);
    if (s < 0.0 && !warned_power) {
      warnings.push_back("dam " + dam.name + ": head below tailwater at v^=" +
                         std::to_string(v) + "; power coefficient clamps to 0 there");
      warned_power = true;
    }
  }
}

}  // namespace

void SystemSpec::finalize() {
  std::vector<std::string> errors;
  warnings_.clear();

  for (const auto& dam : dams) {
    if (!(dam.v_min < dam.v_max))
      errors.push_back("dam " + dam.name + ": requires v_min < v_max");
    if (!(dam.efficiency > 0.0)) errors.push_back("dam " + dam.name + ": eta must be > 0");
    if (!(dam.head_loss > 0.0)) errors.push_back("dam " + dam.name + ": d must be > 0");
    if (dam.water_cost < 0.0) errors.push_back("dam " + dam.name + ": k_h must be >= 0");
    if (!(dam.total_max_flow > 0.0))
      errors.push_back("dam " + dam.name + ": phi_max must be > 0");
    if (dam.downstream && !(dam.delay_hours > 0.0))
      errors.push_back("dam " + dam.name + ": tau must be > 0 when a downstream dam is set");
    if (dam.downstream && (*dam.downstream < 1 || *dam.downstream > n_dams()))
      errors.push_back("dam " + dam.name + ": downstream index out of range");
    if (dam.downstream && *dam.downstream == dam.index)
      errors.push_back("dam " + dam.name + ": cannot be its own downstream neighbor");
    if (errors.empty()) sweep_dam(dam, errors, warnings_);
  }
  for (const auto& f : ffs) {
    if (!(f.max_power > 0.0)) errors.push_back("ffs " + f.name + ": max power must be > 0");
    if (!(f.cost > 0.0)) errors.push_back("ffs " + f.name + ": cost must be > 0");
  }
  if (battery.capacity > 0.0 || battery.max_discharge > 0.0 || battery.max_charge > 0.0) {
    if (!(battery.capacity > 0.0)) errors.push_back("battery: capacity must be > 0");
    if (!(battery.max_discharge > 0.0)) errors.push_back("battery: max discharge must be > 0");
    if (!(battery.max_charge > 0.0)) errors.push_back("battery: max charge must be > 0");
  } else {
    errors.push_back("battery: section required (capacity, max discharge, max charge)");
  }

  // dam indices must be 1..N in order
  for (int i = 0; i < n_dams(); ++i) {
    if (dams[i].index != i + 1)
      errors.push_back("dam sections must be numbered consecutively from 1");
  }

  upstream.assign(dams.size(), {});
  links.clear();
  link_of.assign(dams.size(), -1);
  if (errors.empty()) {
    for (int i = 0; i < n_dams(); ++i) {
      if (!dams[i].downstream) continue;
      upstream[*dams[i].downstream - 1].push_back(i);
      link_of[i] = static_cast<int>(links.size());
      links.push_back(i);
    }
    // acyclicity: follow downstream pointers from each dam; a cycle revisits
    for (int i = 0; i < n_dams(); ++i) {
      int steps = 0, cur = i;
      while (dams[cur].downstream) {
        cur = *dams[cur].downstream - 1;
        if (++steps > n_dams()) {
          errors.push_back("cascade topology has a cycle through dam " + dams[i].name);
          break;
        }
      }
    }
  }

  if (!errors.empty()) {
    std::ostringstream os;
    os << "system validation failed:";
    for (const auto& e : errors) os << "\n  - " << e;
    throw ValidationError(os.str());
  }
}

double SystemSpec::virtual_normalizer(int dam_pos) const {
  const DamSpec& dam = dams.at(dam_pos);
  // Turbine + spillage capacity sums to the constant total max flow; verify on
  // a fine sweep in case a flow model violates that.
  constexpr int kSweep = 1000;
  double best = 0.0;
  for (int k = 0; k <= kSweep; ++k) {
    double v = static_cast<double>(k) / kSweep;
    best = std::max(best, dam.max_turbine_flow(v) + dam.max_spill_flow(v));
  }
  if (std::fabs(best - dam.total_max_flow) > 1e-9 * dam.total_max_flow)
    throw NumericError("dam " + dam.name + ": turbine+spillage sweep max " +
                       std::to_string(best) + " differs from total max flow");
  return flow_per_hour(dam.total_max_flow);
}

double instantaneous_cost(const SystemSpec& sys, const std::vector<double>& dam_outflow,
                          const std::vector<double>& ffs_frac) {
  double rate = 0.0;
  for (int i = 0; i < sys.n_dams(); ++i) rate += sys.dams[i].water_cost * dam_outflow[i];
  for (int c = 0; c < sys.n_ffs(); ++c) rate += sys.ffs[c].cost_rate() * ffs_frac[c];
  return rate;
}

void SeriesSet::check_cover(const SystemSpec& sys, double horizon) const {
  if (!demand.covers(0.0, horizon))
    throw ValidationError("demand series does not cover [0, " + std::to_string(horizon) + "] h");
  if (static_cast<int>(inflow.size()) != sys.n_dams())
    throw ValidationError("expected one inflow series per dam");
  for (int i = 0; i < sys.n_dams(); ++i) {
    if (!inflow[i].covers(0.0, horizon))
      throw ValidationError("inflow series for dam " + sys.dams[i].name +
                            " does not cover the horizon");
    if (inflow[i].min_value() < 0.0)
      throw ValidationError("inflow series for dam " + sys.dams[i].name + " is negative");
  }
}

}  // namespace dispatch
