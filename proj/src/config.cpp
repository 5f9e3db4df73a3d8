#include "hamplug/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>

#include "hamplug/host.hpp"
#include "hamplug/plug.hpp"

namespace hamplug {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  double v = 0.0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size()) {
    throw ConfigError(key + ": expected a number, got '" + text + "'");
  }
  return v;
}

long long parse_integer(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  long long v = 0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size()) {
    throw ConfigError(key + ": expected an integer, got '" + text + "'");
  }
  return v;
}

bool parse_bool(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
  if (t == "false" || t == "0" || t == "no" || t == "off") return false;
  throw ConfigError(key + ": expected true or false, got '" + text + "'");
}

std::vector<double> parse_list(const std::string& key, const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    if (!trim(cell).empty()) out.push_back(parse_double(key, cell));
  }
  return out;
}

using Setter = std::function<void(Config&, const std::string&, const std::string&)>;

template <class T>
Setter real(T Config::*section, double T::*field) {
  return [=](Config& c, const std::string& k, const std::string& v) {
    (c.*section).*field = parse_double(k, v);
  };
}

template <class T>
Setter integer(T Config::*section, int T::*field) {
  return [=](Config& c, const std::string& k, const std::string& v) {
    (c.*section).*field = static_cast<int>(parse_integer(k, v));
  };
}

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"geometry.n", [](Config& c, const std::string& k, const std::string& v) {
         c.n = static_cast<int>(parse_integer(k, v));
       }},
      {"plug.delta", [](Config& c, const std::string& k, const std::string& v) {
         c.delta = parse_double(k, v);
       }},
      {"plug.eps", [](Config& c, const std::string& k, const std::string& v) {
         c.eps = parse_double(k, v);
       }},
      {"plug.lambda", [](Config& c, const std::string& k, const std::string& v) {
         c.lambda = parse_double(k, v);
       }},
      {"trap.c", real(&Config::trap, &TrapParams::c)},
      {"trap.amplitude", real(&Config::trap, &TrapParams::amplitude)},
      {"trap.width_s", real(&Config::trap, &TrapParams::width_s)},
      {"trap.width_z", real(&Config::trap, &TrapParams::width_z)},
      {"trap.k_w", real(&Config::trap, &TrapParams::k_w)},
      {"trap.beta", [](Config& c, const std::string& k, const std::string& v) {
         c.trap.beta = parse_list(k, v);
       }},
      {"tolerance.solver", real(&Config::tol, &Tolerances::solver)},
      {"tolerance.identity", real(&Config::tol, &Tolerances::identity)},
      {"tolerance.integrator", real(&Config::tol, &Tolerances::integrator)},
      {"tolerance.trap", real(&Config::tol, &Tolerances::trap)},
      {"tolerance.matching", real(&Config::tol, &Tolerances::matching)},
      {"tolerance.volume", real(&Config::tol, &Tolerances::volume)},
      {"tolerance.fd_step", real(&Config::tol, &Tolerances::fd_step)},
      {"run.t_max", real(&Config::run, &RunSettings::t_max)},
      {"run.seed", [](Config& c, const std::string& k, const std::string& v) {
         const long long s = parse_integer(k, v);
         if (s < 0) throw ConfigError(k + ": must be non-negative");
         c.run.seed = static_cast<std::uint64_t>(s);
       }},
      {"run.workers", integer(&Config::run, &RunSettings::workers)},
      {"run.residual_points", integer(&Config::run, &RunSettings::residual_points)},
      {"run.shell_points", integer(&Config::run, &RunSettings::shell_points)},
      {"run.g_grid_points", integer(&Config::run, &RunSettings::g_grid_points)},
      {"run.matching_per_axis", integer(&Config::run, &RunSettings::matching_per_axis)},
      {"run.trap_per_axis", integer(&Config::run, &RunSettings::trap_per_axis)},
      {"run.volume_samples", integer(&Config::run, &RunSettings::volume_samples)},
      {"run.volume_time", real(&Config::run, &RunSettings::volume_time)},
      {"run.density_samples", integer(&Config::run, &RunSettings::density_samples)},
      {"run.embedding_points", integer(&Config::run, &RunSettings::embedding_points)},
      {"run.certificate_per_axis", integer(&Config::run, &RunSettings::certificate_per_axis)},
      {"host.enabled", [](Config& c, const std::string& k, const std::string& v) {
         c.host.enabled = parse_bool(k, v);
       }},
      {"host.orbit", integer(&Config::host, &HostSettings::orbit)},
      {"host.chart_delta", real(&Config::host, &HostSettings::chart_delta)},
      {"host.chart_eps", real(&Config::host, &HostSettings::chart_eps)},
      {"host.lambda", real(&Config::host, &HostSettings::lambda)},
      {"host.t_post", real(&Config::host, &HostSettings::t_post)},
      {"host.nearby", integer(&Config::host, &HostSettings::nearby)},
      {"host.reject_radius", real(&Config::host, &HostSettings::reject_radius)},
      {"host.return_radius", real(&Config::host, &HostSettings::return_radius)},
      {"host.match_tol", real(&Config::host, &HostSettings::match_tol)},
      {"host.orbit_tol", real(&Config::host, &HostSettings::orbit_tol)},
  };
  return table;
}

void require_positive(const std::string& key, double v) {
  if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(key + " must be positive");
}

}  // namespace

void set_config_value(Config& cfg, const std::string& key, const std::string& value) {
  const auto it = setters().find(key);
  if (it == setters().end()) throw ConfigError("unknown configuration key '" + key + "'");
  it->second(cfg, key, value);
}

void apply_overrides(Config& cfg, const std::vector<std::string>& overrides) {
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos) throw ConfigError("override '" + o + "' is not of the form key=value");
    set_config_value(cfg, trim(o.substr(0, eq)), o.substr(eq + 1));
  }
}

void Config::validate() const {
  if (n < 3 || n > kMaxN) {
    throw ConfigError("geometry.n must lie in 3.." + std::to_string(kMaxN) + ", got " +
                      std::to_string(n));
  }
  const ContactProfile profile(dimension(), trap);
  PlugGeometry(delta, eps, lambda).validate(profile);

  const std::pair<const char*, double> tols[] = {
      {"tolerance.solver", tol.solver},       {"tolerance.identity", tol.identity},
      {"tolerance.integrator", tol.integrator}, {"tolerance.trap", tol.trap},
      {"tolerance.matching", tol.matching},   {"tolerance.volume", tol.volume},
      {"tolerance.fd_step", tol.fd_step},     {"run.t_max", run.t_max},
      {"run.volume_time", run.volume_time},
  };
  for (const auto& [k, v] : tols) require_positive(k, v);

  const std::pair<const char*, int> counts[] = {
      {"run.residual_points", run.residual_points},
      {"run.shell_points", run.shell_points},
      {"run.g_grid_points", run.g_grid_points},
      {"run.matching_per_axis", run.matching_per_axis},
      {"run.trap_per_axis", run.trap_per_axis},
      {"run.volume_samples", run.volume_samples},
      {"run.density_samples", run.density_samples},
      {"run.embedding_points", run.embedding_points},
      {"run.certificate_per_axis", run.certificate_per_axis},
  };
  for (const auto& [k, v] : counts) {
    if (v < 1) throw ConfigError(std::string(k) + " must be at least 1");
  }
  if (run.workers < 0) throw ConfigError("run.workers must be non-negative");

  if (host.orbit < 1 || host.orbit > n) {
    throw ConfigError("host.orbit must lie in 1.." + std::to_string(n));
  }
  require_positive("host.chart_delta", host.chart_delta);
  require_positive("host.chart_eps", host.chart_eps);
  require_positive("host.t_post", host.t_post);
  require_positive("host.return_radius", host.return_radius);
  require_positive("host.match_tol", host.match_tol);
  require_positive("host.orbit_tol", host.orbit_tol);
  if (host.lambda < 0.0) throw ConfigError("host.lambda must be non-negative (0 selects the largest)");
  if (host.reject_radius < 0.0) throw ConfigError("host.reject_radius must be non-negative");
  if (host.nearby < 0) throw ConfigError("host.nearby must be non-negative");
  const auto a = prime_root_coefficients(n);
  if (!(2.0 * a[host.orbit - 1] * host.chart_eps < std::numbers::pi)) {
    throw ConfigError("host.chart_eps exceeds half the period of the chosen orbit");
  }
  if (host.lambda > 0.0) {
    try {
      PlugGeometry(host.chart_delta, host.chart_eps, host.lambda).validate(profile);
    } catch (const ConfigError& e) {
      throw ConfigError(std::string("host.lambda: ") + e.what());
    }
  }
}

Config default_config(const std::vector<std::string>& overrides) {
  Config cfg;
  apply_overrides(cfg, overrides);
  cfg.validate();
  return cfg;
}

Config load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(path.string(), tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(std::string("cannot read config: ") + e.what());
  }
  Config cfg;
  for (const auto& [section, body] : tree) {
    if (body.empty()) throw ConfigError("config key '" + section + "' is outside any section");
    for (const auto& [key, value] : body) {
      set_config_value(cfg, section + "." + key, value.data());
    }
  }
  apply_overrides(cfg, overrides);
  cfg.validate();
  return cfg;
}

nlohmann::json to_json(const Config& c) {
  return {
      {"geometry", {{"n", c.n}}},
      {"plug", {{"delta", c.delta}, {"eps", c.eps}, {"lambda", c.lambda}}},
      {"trap",
       {{"c", c.trap.c},
        {"amplitude", c.trap.amplitude},
        {"width_s", c.trap.width_s},
        {"width_z", c.trap.width_z},
        {"k_w", c.trap.k_w},
        {"beta", c.trap.beta}}},
      {"tolerance",
       {{"solver", c.tol.solver},
        {"identity", c.tol.identity},
        {"integrator", c.tol.integrator},
        {"trap", c.tol.trap},
        {"matching", c.tol.matching},
        {"volume", c.tol.volume},
        {"fd_step", c.tol.fd_step}}},
      {"run",
       {{"t_max", c.run.t_max},
        {"seed", c.run.seed},
        {"residual_points", c.run.residual_points},
        {"shell_points", c.run.shell_points},
        {"g_grid_points", c.run.g_grid_points},
        {"matching_per_axis", c.run.matching_per_axis},
        {"trap_per_axis", c.run.trap_per_axis},
        {"volume_samples", c.run.volume_samples},
        {"volume_time", c.run.volume_time},
        {"density_samples", c.run.density_samples},
        {"embedding_points", c.run.embedding_points},
        {"certificate_per_axis", c.run.certificate_per_axis}}},
      {"host",
       {{"enabled", c.host.enabled},
        {"orbit", c.host.orbit},
        {"chart_delta", c.host.chart_delta},
        {"chart_eps", c.host.chart_eps},
        {"lambda", c.host.lambda},
        {"t_post", c.host.t_post},
        {"nearby", c.host.nearby},
        {"reject_radius", c.host.reject_radius},
        {"return_radius", c.host.return_radius},
        {"match_tol", c.host.match_tol},
        {"orbit_tol", c.host.orbit_tol}}},
  };
}

}  // namespace hamplug
