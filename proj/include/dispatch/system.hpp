#ifndef DISPATCH_SYSTEM_HPP
#define DISPATCH_SYSTEM_HPP

#include <optional>
#include <string>
#include <vector>

#include "dispatch/time_series.hpp"

namespace dispatch {

// Reservoir level above a common reference, as a quadratic in the normalized
// volume. Calibrated locally; must be nondecreasing on [0,1].
struct HeadPoly {
  double b2 = 0.0, b1 = 0.0, b0 = 0.0;
  double operator()(double vhat) const { return (b2 * vhat + b1) * vhat + b0; }
};

// Maximum turbine flow (m3/s) as a function of the head difference H(v) - h0.
// Either a constant or one/two polynomial branches split at `breakpoint`.
// The upper branch is anchored so both branches agree at the breakpoint; the
// data sheets carry a small mismatch there and the power coefficient must stay
// continuous in the volume. At the breakpoint itself the lower branch applies.
struct TurbineFlowModel {
  bool is_constant = false;
  double constant = 0.0;
  double c2 = 0.0, c1 = 0.0, c0 = 0.0;
  bool has_upper_branch = false;
  double g2 = 0.0, g1 = 0.0, g0 = 0.0;
  double breakpoint = 0.0;  // head-difference split, m

  double eval(double head_diff) const;
};

struct DamSpec {
  int index = 0;  // 1-based, as written in the configuration file
  std::string name;
  double v_min = 0.0, v_max = 0.0;  // reservoir volume bounds, m3
  HeadPoly head;
  double tailwater = 0.0;    // h0, m
  double efficiency = 0.0;   // eta, kW per (m3/s * m)
  double head_loss = 0.0;    // d, m per (m3/s)
  TurbineFlowModel flow;
  double total_max_flow = 0.0;  // turbine + spillage bound, m3/s
  double water_cost = 0.0;      // K_H, USD/m3
  std::optional<int> downstream;  // 1-based dam index
  double delay_hours = 0.0;       // water travel time to the downstream dam

  double volume_span() const { return v_max - v_min; }  // m3
  double head_at(double vhat) const;                    // m
  // Max turbine flow in m3/s, clamped into (0, total_max_flow].
  double max_turbine_flow(double vhat) const;
  // total_max_flow - max_turbine_flow, m3/s.
  double max_spill_flow(double vhat) const;
  // Generation per unit of normalized turbine control, kW. Throws DomainError
  // when the net head is negative (head below tailwater at this volume).
  double power_coefficient(double vhat) const;
  // Same, but negative values (degenerate low-volume fits) clamp to zero.
  double power_coefficient_clamped(double vhat) const;

 private:
  void check_vhat(double vhat) const;
};

struct FfsSpec {
  std::string name;
  double max_power = 0.0;  // kW
  double cost = 0.0;       // USD/MWh
  // Running cost at full output, USD/h.
  double cost_rate() const;
};

struct BatterySpec {
  double capacity = 0.0;       // kWh
  double max_discharge = 0.0;  // kW
  double max_charge = 0.0;     // kW, magnitude
  // C_bat: lower control bound is -charge_ratio().
  double charge_ratio() const { return max_charge / max_discharge; }
};

// The full plant: dams with cascade topology, fossil-fuel stations, battery.
// Immutable after finalize(); safe to share read-only across grid workers.
struct SystemSpec {
  std::vector<DamSpec> dams;
  std::vector<FfsSpec> ffs;
  BatterySpec battery;

  // Derived by finalize(). Dams are addressed by position in `dams`.
  std::vector<std::vector<int>> upstream;  // B(i)
  std::vector<int> links;     // positions of dams with a downstream neighbor, ascending
  std::vector<int> link_of;   // dam position -> index into links, or -1

  int n_dams() const { return static_cast<int>(dams.size()); }
  int n_ffs() const { return static_cast<int>(ffs.size()); }
  int n_links() const { return static_cast<int>(links.size()); }
  int state_dim() const { return n_dams() + 1; }

  // Validates every invariant and derives the topology; throws ValidationError
  // with one line per defect. `warnings` collects non-fatal model notes (e.g.
  // a negative power coefficient at low volume that will be clamped).
  void finalize();
  const std::vector<std::string>& warnings() const { return warnings_; }

  // Normalizer for the virtual control of link dam j: max over the volume of
  // turbine + spillage capacity, which equals total_max_flow. m3/h.
  double virtual_normalizer(int dam_pos) const;

 private:
  std::vector<std::string> warnings_;
};

// Instantaneous cost of a control setting, USD/h. Flows in m3/h.
// h_flow[i] is dam i's realized outflow, ffs_frac[i] in [0,1].
double instantaneous_cost(const SystemSpec& sys, const std::vector<double>& dam_outflow,
                          const std::vector<double>& ffs_frac);

// Demand and per-dam inflow forecasts on a common horizon.
struct SeriesSet {
  TimeSeries demand;                // kW
  std::vector<TimeSeries> inflow;   // m3/h, one per dam
  void check_cover(const SystemSpec& sys, double horizon) const;
};

}  // namespace dispatch

#endif
