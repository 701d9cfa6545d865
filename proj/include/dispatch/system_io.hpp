#ifndef DISPATCH_SYSTEM_IO_HPP
#define DISPATCH_SYSTEM_IO_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dispatch/system.hpp"

namespace dispatch {

// Solver settings. Defaults follow the reference setup; a [run]/[grid] section
// in the system configuration overrides them, and CLI flags override both.
struct RunConfig {
  double horizon = 24.0;        // h
  double dt = 0.25;             // h
  double dx = 0.25;             // normalized, all state dimensions
  double cfl_margin = 0.8;      // Courant number bound
  double tol = 0.02;            // duality-gap target (Error II)
  int n_iter = 30;              // oracle calls per refinement level
  int level_cap = 6;            // multiplier refinement cap (m_j <= 32)
  double lambda0 = 1e-4;        // initial multiplier coefficient, USD/m3
  double lambda_box = 1.0;      // |alpha| bound on multiplier coefficients
  double lmbm_eps = 1e-9;       // w_k stopping tolerance
  double voll = 1e4;            // unmet-demand penalty, USD/MWh
  std::vector<double> x0;       // initial state, defaults to all-ones
  std::vector<double> beta_sweep;  // penalty sweep grid
  double beta_eps = 10.0;       // L-curve slope-ratio threshold
  double beta_ffs = 0.0;        // FFS smoothing penalty (not swept)
  bool persist_field = false;
  bool reference_run = false;
  unsigned threads = 0;         // 0 = hardware concurrency

  std::string demand_path;
  std::vector<std::string> inflow_paths;  // one per dam
  std::string out_dir;

  static std::vector<double> default_beta_sweep();
};

// Parsed key/value configuration, grouped by section, in file order.
struct ConfigFile {
  struct Section {
    std::string name;
    std::vector<std::pair<std::string, std::string>> entries;
    const std::string* find(const std::string& key) const;
  };
  std::vector<Section> sections;
  const Section* find(const std::string& name) const;
};

ConfigFile parse_config_file(const std::string& path);

// Builds the system from [dam.N], [ffs.N], [battery] sections and finalizes it.
SystemSpec load_system(const ConfigFile& cfg);

// Applies [run], [grid] and [series] sections on top of `base`. Relative series
// paths resolve against the configuration file's directory.
void apply_run_sections(const ConfigFile& cfg, const std::string& config_path,
                        const SystemSpec& sys, RunConfig& base);

// Serializes the system back to the configuration format; numeric fields are
// written with enough digits to round-trip exactly.
std::string serialize_system(const SystemSpec& sys);

SystemSpec load_system_file(const std::string& path);

// Loads demand and inflow series per the config, converting inflows to m3/h.
SeriesSet load_series(const SystemSpec& sys, const RunConfig& cfg);

}  // namespace dispatch

#endif
