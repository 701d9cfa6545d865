#ifndef DISPATCH_UNITS_HPP
#define DISPATCH_UNITS_HPP

// Internal unit convention: time in hours, flows in m3/h, power in kW,
// energy in kWh, money in USD. Flow model coefficients from dam data sheets
// are calibrated in m3/s; conversions happen at the model boundary.

namespace dispatch {

inline constexpr double kSecondsPerHour = 3600.0;
inline constexpr double kKwPerMw = 1000.0;

inline constexpr double flow_per_hour(double m3s) { return m3s * kSecondsPerHour; }
inline constexpr double flow_per_second(double m3h) { return m3h / kSecondsPerHour; }

}  // namespace dispatch

#endif
