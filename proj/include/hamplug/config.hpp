#pragma once

// Run configuration: an INI file with sections, overridable by
// "section.key=value" strings from the command line.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "hamplug/trap.hpp"

namespace hamplug {

struct Tolerances {
  double solver = 1e-10;      // Reeb / Hamiltonian defining residuals
  double identity = 1e-8;     // dz(R_u) closed form, graph embedding
  double integrator = 1e-10;  // DOPRI5 rtol = atol for traversals
  double trap = 1e-12;        // DOPRI5 tolerance of long trapped runs
  double matching = 1e-6;
  double volume = 1e-6;
  double fd_step = 1e-7;  // finite-difference step of flow Jacobians
};

struct RunSettings {
  double t_max = 1e4;
  std::uint64_t seed = 1;
  int workers = 0;  // 0: hardware concurrency
  int residual_points = 1000;
  int shell_points = 1000;
  int g_grid_points = 100000;  // G grid over (r_1, ..., r_{n-1}, z)
  int matching_per_axis = 6;
  int trap_per_axis = 5;
  int volume_samples = 100;
  double volume_time = 1.0;
  int density_samples = 10000;
  int embedding_points = 100;
  int certificate_per_axis = 10;
};

struct HostSettings {
  bool enabled = true;
  int orbit = 1;
  double chart_delta = 0.4;
  double chart_eps = 0.5;
  double lambda = 0.0;  // 0: largest admissible
  double t_post = 1e3;
  int nearby = 50;
  double reject_radius = 0.05;
  double return_radius = 1e-3;
  double match_tol = 1e-5;
  double orbit_tol = 1e-8;
};

struct Config {
  int n = 3;
  double delta = 1.0;
  double eps = 1.0;
  double lambda = 0.25;
  TrapParams trap;
  Tolerances tol;
  RunSettings run;
  HostSettings host;

  Dimension dimension() const { return Dimension(n); }
  /// Throws ConfigError naming the offending key.
  void validate() const;
};

/// Sets one "section.key" from its textual value. Throws ConfigError for
/// unknown keys and malformed values.
void set_config_value(Config& cfg, const std::string& key, const std::string& value);

/// Applies "section.key=value" overrides in order.
void apply_overrides(Config& cfg, const std::vector<std::string>& overrides);

/// Reads an INI file over the defaults and validates.
Config load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides = {});

/// Defaults with overrides, validated.
Config default_config(const std::vector<std::string>& overrides = {});

nlohmann::json to_json(const Config& cfg);

}  // namespace hamplug
