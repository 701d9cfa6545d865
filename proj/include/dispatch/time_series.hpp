#ifndef DISPATCH_TIME_SERIES_HPP
#define DISPATCH_TIME_SERIES_HPP

#include <string>
#include <vector>

namespace dispatch {

// Piecewise-linear interpolant over strictly increasing sample times (hours).
// Evaluation outside the sampled range is a hard error; silent extrapolation
// would corrupt a dispatch schedule.
class TimeSeries {
 public:
  TimeSeries() = default;
  TimeSeries(std::vector<double> times, std::vector<double> values);

  // CSV with a `t_hours,value` header; `scale` converts units at ingestion
  // (e.g. m3/s inflow data to m3/h).
  static TimeSeries from_csv(const std::string& path, double scale = 1.0);

  double at(double t) const;
  double front_time() const { return times_.front(); }
  double back_time() const { return times_.back(); }
  double min_value() const;
  double max_value() const;
  bool covers(double t0, double t1) const;
  std::size_t size() const { return times_.size(); }

 private:
  std::vector<double> times_;
  std::vector<double> values_;
};

}  // namespace dispatch

#endif
