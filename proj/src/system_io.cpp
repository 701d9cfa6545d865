#include "dispatch/system_io.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "dispatch/errors.hpp"

namespace dispatch {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

double to_double(const std::string& v, const std::string& where) {
  try {
    std::size_t pos = 0;
    double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ValidationError(where + ": bad number `" + v + "`");
  }
}

int to_int(const std::string& v, const std::string& where) {
  try {
    std::size_t pos = 0;
    int x = std::stoi(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ValidationError(where + ": bad integer `" + v + "`");
  }
}

std::string fmt_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

std::string dir_of(const std::string& path) {
  std::size_t slash = path.find_last_of('/');
  return slash == std::string::npos ? std::string(".") : path.substr(0, slash);
}

std::string resolve(const std::string& base_dir, const std::string& p) {
  if (p.empty() || p[0] == '/') return p;
  return base_dir + "/" + p;
}

}  // namespace

std::vector<double> RunConfig::default_beta_sweep() {
  std::vector<double> g{0.0};
  for (int e = -2; e <= 6; ++e) g.push_back(std::pow(10.0, e));
  return g;
}

const std::string* ConfigFile::Section::find(const std::string& key) const {
  for (const auto& [k, v] : entries)
    if (k == key) return &v;
  return nullptr;
}

const ConfigFile::Section* ConfigFile::find(const std::string& name) const {
  for (const auto& s : sections)
    if (s.name == name) return &s;
  return nullptr;
}

ConfigFile parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open configuration file: " + path);
  ConfigFile cfg;
  std::string line;
  std::size_t lineno = 0;
  ConfigFile::Section* cur = nullptr;
  while (std::getline(in, line)) {
    ++lineno;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    if (t.front() == '[') {
      if (t.back() != ']')
        throw ValidationError(path + ":" + std::to_string(lineno) + ": unterminated section");
      cfg.sections.push_back({trim(t.substr(1, t.size() - 2)), {}});
      cur = &cfg.sections.back();
      continue;
    }
    std::size_t eq = t.find('=');
    if (eq == std::string::npos || cur == nullptr)
      throw ValidationError(path + ":" + std::to_string(lineno) + ": expected `key = value`");
    cur->entries.emplace_back(trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
  }
  return cfg;
}

namespace {

DamSpec parse_dam(const ConfigFile::Section& s, int index) {
  DamSpec dam;
  dam.index = index;
  dam.name = "dam." + std::to_string(index);
  const std::string where = "[" + s.name + "]";
  static const std::set<std::string> known = {
      "name", "v_min", "v_max", "b2", "b1", "b0", "h0",  "eta",        "d",
      "c2",   "c1",    "c0",    "g2", "g1", "g0", "breakpoint", "flow_constant",
      "phi_max", "k_h", "downstream", "tau_hours"};
  for (const auto& [k, v] : s.entries) {
    if (!known.count(k)) throw ValidationError(where + ": unknown key `" + k + "`");
    if (k == "name") dam.name = v;
    else if (k == "v_min") dam.v_min = to_double(v, where);
    else if (k == "v_max") dam.v_max = to_double(v, where);
    else if (k == "b2") dam.head.b2 = to_double(v, where);
    else if (k == "b1") dam.head.b1 = to_double(v, where);
    else if (k == "b0") dam.head.b0 = to_double(v, where);
    else if (k == "h0") dam.tailwater = to_double(v, where);
    else if (k == "eta") dam.efficiency = to_double(v, where);
    else if (k == "d") dam.head_loss = to_double(v, where);
    else if (k == "c2") dam.flow.c2 = to_double(v, where);
    else if (k == "c1") dam.flow.c1 = to_double(v, where);
    else if (k == "c0") dam.flow.c0 = to_double(v, where);
    else if (k == "g2") { dam.flow.g2 = to_double(v, where); dam.flow.has_upper_branch = true; }
    else if (k == "g1") { dam.flow.g1 = to_double(v, where); dam.flow.has_upper_branch = true; }
    else if (k == "g0") { dam.flow.g0 = to_double(v, where); dam.flow.has_upper_branch = true; }
    else if (k == "breakpoint") dam.flow.breakpoint = to_double(v, where);
    else if (k == "flow_constant") { dam.flow.is_constant = true; dam.flow.constant = to_double(v, where); }
    else if (k == "phi_max") dam.total_max_flow = to_double(v, where);
    else if (k == "k_h") dam.water_cost = to_double(v, where);
    else if (k == "downstream") dam.downstream = to_int(v, where);
    else if (k == "tau_hours") dam.delay_hours = to_double(v, where);
  }
  if (dam.flow.has_upper_branch && !(dam.flow.breakpoint > 0.0))
    throw ValidationError(where + ": upper flow branch requires a breakpoint");
  return dam;
}

FfsSpec parse_ffs(const ConfigFile::Section& s, int index) {
  FfsSpec f;
  f.name = "ffs." + std::to_string(index);
  const std::string where = "[" + s.name + "]";
  for (const auto& [k, v] : s.entries) {
    if (k == "name") f.name = v;
    else if (k == "p_max") f.max_power = to_double(v, where);
    else if (k == "k_f") f.cost = to_double(v, where);
    else throw ValidationError(where + ": unknown key `" + k + "`");
  }
  return f;
}

BatterySpec parse_battery(const ConfigFile::Section& s) {
  BatterySpec b;
  const std::string where = "[battery]";
  for (const auto& [k, v] : s.entries) {
    if (k == "capacity") b.capacity = to_double(v, where);
    else if (k == "p_discharge") b.max_discharge = to_double(v, where);
    else if (k == "p_charge") b.max_charge = to_double(v, where);
    else throw ValidationError(where + ": unknown key `" + k + "`");
  }
  return b;
}

}  // namespace

SystemSpec load_system(const ConfigFile& cfg) {
  SystemSpec sys;
  std::vector<std::pair<int, DamSpec>> dams;
  std::vector<std::pair<int, FfsSpec>> stations;
  for (const auto& s : cfg.sections) {
    if (s.name.rfind("dam.", 0) == 0) {
      int idx = to_int(s.name.substr(4), "[" + s.name + "]");
      dams.emplace_back(idx, parse_dam(s, idx));
    } else if (s.name.rfind("ffs.", 0) == 0) {
      int idx = to_int(s.name.substr(4), "[" + s.name + "]");
      stations.emplace_back(idx, parse_ffs(s, idx));
    } else if (s.name == "battery") {
      sys.battery = parse_battery(s);
    } else if (s.name != "run" && s.name != "grid" && s.name != "series") {
      throw ValidationError("unknown configuration section [" + s.name + "]");
    }
  }
  std::sort(dams.begin(), dams.end(), [](auto& a, auto& b) { return a.first < b.first; });
  std::sort(stations.begin(), stations.end(), [](auto& a, auto& b) { return a.first < b.first; });
  for (auto& [idx, d] : dams) sys.dams.push_back(std::move(d));
  for (auto& [idx, f] : stations) sys.ffs.push_back(std::move(f));
  sys.finalize();
  return sys;
}

void apply_run_sections(const ConfigFile& cfg, const std::string& config_path,
                        const SystemSpec& sys, RunConfig& rc) {
  const std::string base = dir_of(config_path);
  if (const auto* g = cfg.find("grid")) {
    for (const auto& [k, v] : g->entries) {
      if (k == "dt") rc.dt = to_double(v, "[grid]");
      else if (k == "dx") rc.dx = to_double(v, "[grid]");
      else if (k == "cfl_margin") rc.cfl_margin = to_double(v, "[grid]");
      else throw ValidationError("[grid]: unknown key `" + k + "`");
    }
  }
  if (const auto* r = cfg.find("run")) {
    for (const auto& [k, v] : r->entries) {
      if (k == "t_horizon") rc.horizon = to_double(v, "[run]");
      else if (k == "tol") rc.tol = to_double(v, "[run]");
      else if (k == "n_iter") rc.n_iter = to_int(v, "[run]");
      else if (k == "level_cap") rc.level_cap = to_int(v, "[run]");
      else if (k == "lambda0") rc.lambda0 = to_double(v, "[run]");
      else if (k == "lambda_box") rc.lambda_box = to_double(v, "[run]");
      else if (k == "lmbm_eps") rc.lmbm_eps = to_double(v, "[run]");
      else if (k == "voll") rc.voll = to_double(v, "[run]");
      else if (k == "beta_eps") rc.beta_eps = to_double(v, "[run]");
      else if (k == "beta_ffs") rc.beta_ffs = to_double(v, "[run]");
      else if (k == "x0") {
        rc.x0.clear();
        std::istringstream ss(v);
        double x;
        while (ss >> x) rc.x0.push_back(x);
      } else if (k == "beta_sweep") {
        rc.beta_sweep.clear();
        std::istringstream ss(v);
        double x;
        while (ss >> x) rc.beta_sweep.push_back(x);
      } else {
        throw ValidationError("[run]: unknown key `" + k + "`");
      }
    }
  }
  if (const auto* s = cfg.find("series")) {
    rc.inflow_paths.assign(sys.dams.size(), "");
    for (const auto& [k, v] : s->entries) {
      if (k == "demand") rc.demand_path = resolve(base, v);
      else if (k.rfind("inflow.", 0) == 0) {
        int idx = to_int(k.substr(7), "[series]");
        if (idx < 1 || idx > sys.n_dams())
          throw ValidationError("[series]: inflow index out of range: " + k);
        rc.inflow_paths[idx - 1] = resolve(base, v);
      } else {
        throw ValidationError("[series]: unknown key `" + k + "`");
      }
    }
  }
}

std::string serialize_system(const SystemSpec& sys) {
  std::ostringstream os;
  for (const auto& dam : sys.dams) {
    os << "[dam." << dam.index << "]\n";
    os << "name = " << dam.name << "\n";
    os << "v_min = " << fmt_double(dam.v_min) << "\n";
    os << "v_max = " << fmt_double(dam.v_max) << "\n";
    os << "b2 = " << fmt_double(dam.head.b2) << "\n";
    os << "b1 = " << fmt_double(dam.head.b1) << "\n";
    os << "b0 = " << fmt_double(dam.head.b0) << "\n";
    os << "h0 = " << fmt_double(dam.tailwater) << "\n";
    os << "eta = " << fmt_double(dam.efficiency) << "\n";
    os << "d = " << fmt_double(dam.head_loss) << "\n";
    if (dam.flow.is_constant) {
      os << "flow_constant = " << fmt_double(dam.flow.constant) << "\n";
    } else {
      os << "c2 = " << fmt_double(dam.flow.c2) << "\n";
      os << "c1 = " << fmt_double(dam.flow.c1) << "\n";
      os << "c0 = " << fmt_double(dam.flow.c0) << "\n";
      if (dam.flow.has_upper_branch) {
        os << "g2 = " << fmt_double(dam.flow.g2) << "\n";
        os << "g1 = " << fmt_double(dam.flow.g1) << "\n";
        os << "g0 = " << fmt_double(dam.flow.g0) << "\n";
        os << "breakpoint = " << fmt_double(dam.flow.breakpoint) << "\n";
      }
    }
    os << "phi_max = " << fmt_double(dam.total_max_flow) << "\n";
    os << "k_h = " << fmt_double(dam.water_cost) << "\n";
    if (dam.downstream) {
      os << "downstream = " << *dam.downstream << "\n";
      os << "tau_hours = " << fmt_double(dam.delay_hours) << "\n";
    }
    os << "\n";
  }
  int c = 1;
  for (const auto& f : sys.ffs) {
    os << "[ffs." << c++ << "]\n";
    os << "name = " << f.name << "\n";
    os << "p_max = " << fmt_double(f.max_power) << "\n";
    os << "k_f = " << fmt_double(f.cost) << "\n\n";
  }
  os << "[battery]\n";
  os << "capacity = " << fmt_double(sys.battery.capacity) << "\n";
  os << "p_discharge = " << fmt_double(sys.battery.max_discharge) << "\n";
  os << "p_charge = " << fmt_double(sys.battery.max_charge) << "\n";
  return os.str();
}

SystemSpec load_system_file(const std::string& path) {
  return load_system(parse_config_file(path));
}

SeriesSet load_series(const SystemSpec& sys, const RunConfig& cfg) {
  if (cfg.demand_path.empty()) throw ValidationError("no demand series configured");
  if (static_cast<int>(cfg.inflow_paths.size()) != sys.n_dams())
    throw ValidationError("expected one inflow path per dam");
  SeriesSet series;
  series.demand = TimeSeries::from_csv(cfg.demand_path);
  for (int i = 0; i < sys.n_dams(); ++i) {
    if (cfg.inflow_paths[i].empty())
      throw ValidationError("no inflow series configured for dam " + sys.dams[i].name);
    // inflow files carry m3/s; internal flows are m3/h
    series.inflow.push_back(TimeSeries::from_csv(cfg.inflow_paths[i], kSecondsPerHour));
  }
  series.check_cover(sys, cfg.horizon);
  return series;
}

}  // namespace dispatch
