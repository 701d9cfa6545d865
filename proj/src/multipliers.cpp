#include "dispatch/multipliers.hpp"

#include <cmath>

#include <json.hpp>

#include "dispatch/errors.hpp"

namespace dispatch {

MultiplierSet MultiplierSet::initial(const SystemSpec& sys, double horizon, double coeff) {
  MultiplierSet m;
  m.horizon_ = horizon;
  m.level_ = 1;
  for (int dam_pos : sys.links) {
    Link l;
    l.dam_pos = dam_pos;
    l.tau = sys.dams[dam_pos].delay_hours;
    if (!(l.tau < horizon))
      throw ValidationError("dam " + sys.dams[dam_pos].name +
                            ": delay must be shorter than the horizon");
    l.coeffs = {coeff};
    m.links_.push_back(std::move(l));
  }
  return m;
}

int MultiplierSet::dimension() const {
  int d = 0;
  for (const auto& l : links_) d += l.segments();
  return d;
}

double MultiplierSet::segment_length(int link) const {
  const Link& l = links_.at(link);
  return (horizon_ - l.tau) / l.segments();
}

int MultiplierSet::segment_of(int link, double t) const {
  const Link& l = links_.at(link);
  if (t < l.tau || t >= horizon_) return -1;
  double dt = segment_length(link);
  int k = static_cast<int>(std::floor((t - l.tau) / dt));
  if (k < 0) k = 0;
  if (k >= l.segments()) k = l.segments() - 1;
  return k;
}

double MultiplierSet::eval(int link, double t) const {
  int k = segment_of(link, t);
  return k < 0 ? 0.0 : links_[link].coeffs[k];
}

MultiplierSet MultiplierSet::refined() const {
  MultiplierSet m;
  m.horizon_ = horizon_;
  m.level_ = level_ + 1;
  for (const auto& l : links_) {
    Link r;
    r.dam_pos = l.dam_pos;
    r.tau = l.tau;
    r.coeffs.reserve(l.coeffs.size() * 2);
    for (double a : l.coeffs) {
      r.coeffs.push_back(a);
      r.coeffs.push_back(a);
    }
    m.links_.push_back(std::move(r));
  }
  return m;
}

std::vector<double> MultiplierSet::flatten() const {
  std::vector<double> x;
  for (const auto& l : links_) x.insert(x.end(), l.coeffs.begin(), l.coeffs.end());
  return x;
}

void MultiplierSet::assign_flat(const std::vector<double>& x) {
  std::size_t pos = 0;
  for (auto& l : links_) {
    for (double& a : l.coeffs) {
      if (pos >= x.size()) throw NumericError("multiplier vector too short");
      a = x[pos++];
    }
  }
  if (pos != x.size()) throw NumericError("multiplier vector too long");
}

std::string MultiplierSet::to_json() const {
  nlohmann::json j;
  j["horizon_hours"] = horizon_;
  j["level"] = level_;
  j["links"] = nlohmann::json::array();
  for (const auto& l : links_) {
    nlohmann::json lj;
    lj["dam"] = l.dam_pos + 1;
    lj["tau_hours"] = l.tau;
    lj["alpha"] = l.coeffs;
    j["links"].push_back(lj);
  }
  return j.dump(2);
}

MultiplierSet MultiplierSet::from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const std::exception& e) {
    throw IoError(std::string("bad multiplier file: ") + e.what());
  }
  MultiplierSet m;
  try {
    m.horizon_ = j.at("horizon_hours").get<double>();
    m.level_ = j.at("level").get<int>();
    for (const auto& lj : j.at("links")) {
      Link l;
      l.dam_pos = lj.at("dam").get<int>() - 1;
      l.tau = lj.at("tau_hours").get<double>();
      l.coeffs = lj.at("alpha").get<std::vector<double>>();
      if (l.coeffs.empty()) throw IoError("multiplier link without coefficients");
      m.links_.push_back(std::move(l));
    }
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("bad multiplier file: ") + e.what());
  }
  return m;
}

}  // namespace dispatch
