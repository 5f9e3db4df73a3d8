#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <sstream>

#include "hamplug/config.hpp"
#include "hamplug/host.hpp"
#include "hamplug/parallel.hpp"
#include "hamplug/plug.hpp"
#include "hamplug/suites.hpp"

using namespace hamplug;

namespace {

struct Common {
  std::string config;
  std::vector<std::string> overrides;
  long long seed = -1;
  int workers = -1;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "INI configuration file")->check(CLI::ExistingFile);
  cmd->add_option("--set", c.overrides, "Override, section.key=value (repeatable)");
  cmd->add_option("--seed", c.seed, "Random seed (run.seed)");
  cmd->add_option("--workers", c.workers, "Worker threads (run.workers, 0 = all cores)");
}

Config resolve(const Common& c) {
  std::vector<std::string> o = c.overrides;
  if (c.seed >= 0) o.push_back("run.seed=" + std::to_string(c.seed));
  if (c.workers >= 0) o.push_back("run.workers=" + std::to_string(c.workers));
  return c.config.empty() ? default_config(o) : load_config(c.config, o);
}

std::filesystem::path run_dir() {
  const auto dir = run_directory("hamplug-run");
  std::filesystem::create_directories(dir);
  return dir;
}

void print_line(const VerificationReport& r) {
  const char* status = r.passed ? "PASS" : (r.expected_fail ? "XFAIL" : "FAIL");
  std::cout << status << "  " << r.suite << "  (" << r.wall_clock_s << " s)" << std::endl;
}

int finish(const std::vector<VerificationReport>& reports, const std::string& report_path) {
  append_reports(run_dir(), reports);
  if (!report_path.empty()) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : reports) arr.push_back(to_json(r));
    std::ofstream out(report_path);
    if (!out) throw std::runtime_error("cannot open " + report_path + " for writing");
    out << arr.dump(2) << '\n';
  }
  return all_ok(reports) ? 0 : 1;
}

Vec parse_point(const std::string& text, int size) {
  Vec v(size);
  std::stringstream ss(text);
  std::string cell;
  int k = 0;
  while (std::getline(ss, cell, ',')) {
    if (k >= size) throw PreconditionError("too many coordinates in '" + text + "'");
    v[k++] = std::stod(cell);
  }
  if (k != size) {
    throw PreconditionError("expected " + std::to_string(size) + " coordinates, got " + std::to_string(k));
  }
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hamiltonian plug construction and verification"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  Common common;
  std::string report_path;

  auto* verify = app.add_subcommand("verify", "Run the verification suites");
  add_common(verify, common);
  std::vector<std::string> only, skip;
  verify->add_option("--only", only, "Suite groups to run: geometry trap plug volume host")->delimiter(',');
  verify->add_option("--skip", skip, "Suite groups to skip")->delimiter(',');
  verify->add_option("--report", report_path, "Also write the reports as one JSON array");

  auto* traverse = app.add_subcommand("traverse", "Integrate entries through the plug");
  add_common(traverse, common);
  std::string entry_text, out_path, csv_path;
  int per_axis = 6;
  double radius = 0.0;
  traverse->add_option("--entry", entry_text, "Transverse entry x1,y1,...; default: a grid");
  traverse->add_option("--per-axis", per_axis, "Grid points per transverse axis");
  traverse->add_option("--radius", radius, "Grid radius (default: 1.1 x placed support)");
  traverse->add_option("--out", out_path, "JSON-lines file of traverse records");
  traverse->add_option("--csv", csv_path, "Trajectory CSV (single entry only)");

  auto* trap_scan_cmd = app.add_subcommand("trap-scan", "Search for trapped entries");
  add_common(trap_scan_cmd, common);
  trap_scan_cmd->add_option("--out", out_path, "JSON-lines file of traverse records");
  trap_scan_cmd->add_option("--report", report_path, "Report JSON");

  auto* orbit = app.add_subcommand("orbit", "Integrate a periodic orbit of the ellipsoid host");
  add_common(orbit, common);
  int orbit_index = 1;
  double periods = 1.0;
  orbit->add_option("--orbit", orbit_index, "Orbit index j (1-based)");
  orbit->add_option("--periods", periods, "Integration time in periods");
  orbit->add_option("--csv", csv_path, "Trajectory CSV");

  auto* density = app.add_subcommand("density-check", "Omega density, dz(R_u) > 0 and the dz identity");
  add_common(density, common);
  density->add_option("--report", report_path, "Report JSON");

  auto* volume = app.add_subcommand("volume-verify", "Density-Jacobian transport check");
  add_common(volume, common);
  volume->add_option("--report", report_path, "Report JSON");

  auto* demo = app.add_subcommand("insert-demo", "Open a periodic orbit of the host with the plug");
  add_common(demo, common);
  double chart_delta = 0.0, chart_eps = 0.0;
  std::string export_dir;
  demo->add_option("--orbit", orbit_index, "Orbit index j (1-based)");
  demo->add_option("--chart-delta", chart_delta, "Chart disc radius");
  demo->add_option("--chart-eps", chart_eps, "Chart half-height");
  demo->add_option("--report", report_path, "Report JSON");
  demo->add_option("--export-dir", export_dir, "Directory for pre/post orbit CSVs");

  CLI11_PARSE(app, argc, argv);

  try {
    if (verify->parsed()) {
      const Config cfg = resolve(common);
      SuiteSelection sel;
      if (!only.empty()) sel = {false, false, false, false, false};
      auto set = [&sel](const std::string& g, bool v) {
        if (g == "geometry") sel.geometry = v;
        else if (g == "trap") sel.trap = v;
        else if (g == "plug") sel.plug = v;
        else if (g == "volume") sel.volume = v;
        else if (g == "host") sel.host = v;
        else throw ConfigError("unknown suite group '" + g + "'");
      };
      for (const auto& g : only) set(g, true);
      for (const auto& g : skip) set(g, false);
      const auto reports = run_verify(cfg, sel, print_line);
      const int code = finish(reports, report_path);
      std::cout << (code == 0 ? "all suites passed" : "some suites failed") << std::endl;
      return code;
    }

    if (traverse->parsed()) {
      const Config cfg = resolve(common);
      const ContactProfile prof(cfg.dimension(), cfg.trap);
      const PlugField plug(prof, PlugGeometry(cfg.delta, cfg.eps, cfg.lambda));
      ScanOptions so;
      so.exit.integrator.rtol = so.exit.integrator.atol = cfg.tol.integrator;
      so.t_max = cfg.run.t_max;
      so.workers = cfg.run.workers > 0 ? cfg.run.workers : default_workers();
      std::vector<TraverseRecord> records;
      if (!entry_text.empty()) {
        const Vec entry = bottom_entry(plug, parse_point(entry_text, cfg.dimension().odd() - 1));
        Trajectory traj;
        traj.times.push_back(0.0);
        traj.states.push_back(entry);
        auto observer = [&traj](double t, const Vec& y, const DenseStep<Vec>&) {
          traj.times.push_back(t);
          traj.states.push_back(y);
        };
        records.push_back(integrate_until_exit(plug, plug.geometry().box(cfg.dimension()), entry,
                                               so.t_max, plug.capped(so.exit), observer));
        if (!csv_path.empty()) export_trajectory(traj, csv_path);
      } else {
        if (!csv_path.empty()) throw PreconditionError("--csv needs a single --entry");
        const double r = radius > 0.0 ? radius : std::min(cfg.delta, 1.1 * cfg.lambda * prof.transverse_radius());
        records = traverse_scan(plug, entry_grid(plug, r, per_axis), so);
      }
      const auto path = out_path.empty() ? run_dir() / "traverse.jsonl" : std::filesystem::path(out_path);
      write_records_jsonl(path, records);
      const MatchingSummary s = matching_summary(records);
      std::cout << records.size() << " entries, " << s.traversed
                << " traversed, max transverse mismatch " << s.max_mismatch << "\nrecords: " << path.string()
                << std::endl;
      return 0;
    }

    if (trap_scan_cmd->parsed()) {
      const Config cfg = resolve(common);
      const ContactProfile prof(cfg.dimension(), cfg.trap);
      const PlugField plug(prof, PlugGeometry(cfg.delta, cfg.eps, cfg.lambda), ReebPath::ClosedForm);
      ScanOptions so;
      so.exit.integrator.rtol = so.exit.integrator.atol = cfg.tol.trap;
      so.t_max = cfg.run.t_max;
      so.workers = cfg.run.workers > 0 ? cfg.run.workers : default_workers();
      const TrapScanResult res = trap_scan(plug, default_trap_region(plug, cfg.run.trap_per_axis), so);
      const auto path = out_path.empty() ? run_dir() / "trap_scan.jsonl" : std::filesystem::path(out_path);
      write_records_jsonl(path, res.records);
      std::cout << res.records.size() << " entries in " << res.rounds << " rounds, " << res.trapped.size()
                << " trapped\nrecords: " << path.string() << std::endl;
      for (const auto& d : res.trapped) {
        std::cout << "trapped entry " << d.record.entry.transpose() << "  torus distance "
                  << d.torus_distance_at_entry << " -> " << d.torus_distance_final << std::endl;
      }
      return res.trapped.empty() ? 1 : 0;
    }

    if (orbit->parsed()) {
      const Config cfg = resolve(common);
      const EllipsoidHost host(prime_root_coefficients(cfg.n));
      const PeriodicOrbit o = periodic_orbit(host, orbit_index);
      IntegratorOptions io;
      io.rtol = io.atol = cfg.tol.trap;
      io.h_max = o.period / 64.0;
      auto f = [&host](const Vec& y) -> Vec { return host.field(y); };
      const Trajectory traj = integrate(f, o.base_point, periods * o.period, io);
      const double ret = measure_return_time(host, orbit_index, cfg.tol.trap);
      double drift = 0.0;
      for (const Vec& p : traj.states) drift = std::max(drift, std::abs(host.K(p) - 1.0));
      std::cout << "orbit " << orbit_index << ": radius " << o.radius << ", period " << o.period
                << ", measured return time " << ret << ", endpoint distance "
                << (traj.states.back() - o.point(host, traj.times.back())).norm() << ", K drift " << drift
                << std::endl;
      if (!csv_path.empty()) export_trajectory(traj, csv_path);
      return 0;
    }

    if (density->parsed()) {
      const Config cfg = resolve(common);
      std::vector<VerificationReport> reports = {slice_positivity_suite(cfg), h_iv_suite(cfg)};
      for (const auto& r : reports) print_line(r);
      return finish(reports, report_path);
    }

    if (volume->parsed()) {
      const Config cfg = resolve(common);
      std::vector<VerificationReport> reports = {volume_suite(cfg)};
      print_line(reports.front());
      std::cout << "max ratio error " << reports.front().metrics["max_ratio_error"] << std::endl;
      return finish(reports, report_path);
    }

    if (demo->parsed()) {
      std::vector<std::string> o = common.overrides;
      if (orbit_index != 1) o.push_back("host.orbit=" + std::to_string(orbit_index));
      if (chart_delta > 0.0) o.push_back("host.chart_delta=" + format_double(chart_delta));
      if (chart_eps > 0.0) o.push_back("host.chart_eps=" + format_double(chart_eps));
      Common c = common;
      c.overrides = o;
      const Config cfg = resolve(c);
      const ContactProfile prof(cfg.dimension(), cfg.trap);
      const EllipsoidHost host(prime_root_coefficients(cfg.n));
      DemoOptions d = demo_options(cfg);
      d.export_dir = export_dir.empty() ? run_dir() : std::filesystem::path(export_dir);
      std::vector<VerificationReport> reports = {demo_open_orbit(host, prof, d)};
      print_line(reports.front());
      std::cout << reports.front().metrics.dump(2) << std::endl;
      return finish(reports, report_path);
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << std::endl;
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 1;
  }
  return 0;
}
