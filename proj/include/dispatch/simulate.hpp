#ifndef DISPATCH_SIMULATE_HPP
#define DISPATCH_SIMULATE_HPP

#include <string>
#include <vector>

#include "dispatch/multipliers.hpp"
#include "dispatch/relaxation.hpp"
#include "dispatch/system.hpp"
#include "dispatch/value_field.hpp"

namespace dispatch {

// Smoothing penalty per control group (USD * h per unit of squared normalized
// control variation; physical controls are scaled by each unit's capacity).
struct PenaltyVector {
  double turbine = 0.0;
  double spill = 0.0;
  double battery = 0.0;
  double ffs = 0.0;
  bool any() const { return turbine > 0.0 || spill > 0.0 || battery > 0.0 || ffs > 0.0; }
};

// Forward-in-time Euler path on the HJB grid's time step. Controls are held
// constant per step; states clamp into [0,1] (the boundary trigger keeps the
// overshoot under half a space cell).
struct Trajectory {
  double dt = 0.0;
  std::vector<double> times;                  // step left endpoints
  std::vector<std::vector<double>> states;    // steps+1 entries
  std::vector<ExtendedControl> controls;      // per step
  std::vector<std::vector<double>> outflow;   // per step, per dam, m3/h
  std::vector<std::vector<double>> arrivals;  // per step, per dam, m3/h (delayed water)
  std::vector<double> generation;             // kW
  std::vector<double> demand;                 // kW
  double primal_cost = 0.0;                   // USD
  double lagrangian = 0.0;                    // USD, relaxed runs only
  PenaltyVector beta;                         // penalties this path was run with
  PenaltyVector variation;                    // squared-variation integrals, 1/h
  double max_clamp = 0.0;                     // largest state clamp observed

  int steps() const { return static_cast<int>(times.size()); }
};

// Dual evaluation at fixed multipliers: the approximate dual value, its
// subgradient per link segment, and the grid value at the initial state.
struct DualEval {
  double theta = 0.0;
  std::vector<std::vector<double>> xi;  // per link, per segment
  double grid_value = 0.0;
  Trajectory traj;
  std::vector<double> xi_flat() const;
};

struct SimOptions {
  double voll = 1e4;  // USD/MWh
};

// Relaxed path: virtual controls active, cost accumulation per the Lagrangian.
DualEval simulate_relaxed(const SystemSpec& sys, const ValueField& field,
                          const MultiplierSet& lambda, const SeriesSet& series,
                          const std::vector<double>& x0, const SimOptions& opts = {});

// Admissible path: virtual controls replaced by the recorded delayed outflows;
// minimizes the delay-respecting objective at each step.
Trajectory simulate_admissible(const SystemSpec& sys, const ValueField& field,
                               const MultiplierSet& lambda, const SeriesSet& series,
                               const std::vector<double>& x0, const SimOptions& opts = {});

// Admissible path with squared-variation penalties on the physical controls;
// beta = 0 reproduces simulate_admissible exactly (same solver route).
Trajectory simulate_smoothed(const SystemSpec& sys, const ValueField& field,
                             const MultiplierSet& lambda, const SeriesSet& series,
                             const std::vector<double>& x0, const PenaltyVector& beta,
                             const SimOptions& opts = {});

// Rectangle-rule primal cost of a trajectory; equals the stored integral.
double primal_cost(const SystemSpec& sys, const Trajectory& traj);

// CSV export (one row per step plus a terminal-state row; units in a comment).
void write_trajectory_csv(const SystemSpec& sys, const Trajectory& traj,
                          const std::string& path);

}  // namespace dispatch

#endif
