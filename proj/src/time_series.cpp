#include "dispatch/time_series.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "dispatch/errors.hpp"

namespace dispatch {

TimeSeries::TimeSeries(std::vector<double> times, std::vector<double> values)
    : times_(std::move(times)), values_(std::move(values)) {
  if (times_.size() != values_.size())
    throw ValidationError("time series: times and values differ in length");
  if (times_.size() < 2)
    throw ValidationError("time series: need at least two samples");
  for (std::size_t i = 0; i + 1 < times_.size(); ++i) {
    if (!(times_[i] < times_[i + 1]))
      throw ValidationError("time series: sample times must be strictly increasing");
  }
  for (double v : values_) {
    if (!std::isfinite(v)) throw ValidationError("time series: non-finite value");
  }
}

TimeSeries TimeSeries::from_csv(const std::string& path, double scale) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open time series file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty time series file: " + path);
  // tolerate a UTF-8 BOM and surrounding spaces in the header
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  std::string header = line;
  header.erase(std::remove_if(header.begin(), header.end(), ::isspace), header.end());
  if (header != "t_hours,value")
    throw IoError(path + ": expected header `t_hours,value`, got `" + line + "`");
  std::vector<double> t, v;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    std::string a, b;
    if (!std::getline(ss, a, ',') || !std::getline(ss, b))
      throw IoError(path + ":" + std::to_string(lineno) + ": expected two columns");
    try {
      t.push_back(std::stod(a));
      v.push_back(std::stod(b) * scale);
    } catch (const std::exception&) {
      throw IoError(path + ":" + std::to_string(lineno) + ": bad number");
    }
  }
  return TimeSeries(std::move(t), std::move(v));
}

double TimeSeries::at(double t) const {
  // Tolerate round-off at the endpoints only.
  const double eps = 1e-9 * std::max(1.0, std::fabs(times_.back()));
  if (t < times_.front() - eps || t > times_.back() + eps)
    throw DomainError("time series evaluated at t=" + std::to_string(t) +
                      " outside [" + std::to_string(times_.front()) + ", " +
                      std::to_string(times_.back()) + "]");
  if (t <= times_.front()) return values_.front();
  if (t >= times_.back()) return values_.back();
  auto it = std::upper_bound(times_.begin(), times_.end(), t);
  std::size_t hi = static_cast<std::size_t>(it - times_.begin());
  std::size_t lo = hi - 1;
  double w = (t - times_[lo]) / (times_[hi] - times_[lo]);
  return values_[lo] + w * (values_[hi] - values_[lo]);
}

double TimeSeries::min_value() const {
  return *std::min_element(values_.begin(), values_.end());
}

double TimeSeries::max_value() const {
  return *std::max_element(values_.begin(), values_.end());
}

bool TimeSeries::covers(double t0, double t1) const {
  const double eps = 1e-9 * std::max(1.0, std::fabs(times_.back()));
  return times_.front() <= t0 + eps && times_.back() >= t1 - eps;
}

}  // namespace dispatch
