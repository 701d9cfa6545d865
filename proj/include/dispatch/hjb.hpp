#ifndef DISPATCH_HJB_HPP
#define DISPATCH_HJB_HPP

#include "dispatch/grid.hpp"
#include "dispatch/multipliers.hpp"
#include "dispatch/system.hpp"
#include "dispatch/value_field.hpp"

namespace dispatch {

struct HjbOptions {
  double cfl_margin = 0.8;  // Courant number bound; the solve refuses above it
  double voll = 1e4;        // unmet-demand penalty, USD/MWh
  unsigned threads = 0;     // 0 = hardware concurrency
};

// Backward-in-time explicit upwind finite-difference sweep of the relaxed
// HJB equation for fixed multipliers. Within a time level the node updates
// are independent and run data-parallel; levels are a sequential barrier.
ValueField solve_hjb(const SystemSpec& sys, const Grid& grid, const MultiplierSet& lambda,
                     const SeriesSet& series, const HjbOptions& opts = {});

}  // namespace dispatch

#endif
