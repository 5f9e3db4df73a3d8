// Runs the full verification twice through the CLI and prints one line per
// acceptance criterion.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "hamplug/report.hpp"

namespace fs = std::filesystem;
using hamplug::VerificationReport;

namespace {

using Reports = std::map<std::string, VerificationReport>;

Reports run_cli(const fs::path& dir, const std::string& name) {
  const fs::path report = dir / (name + ".json");
  const std::string cmd = std::string("\"") + HAMPLUG_CLI + "\" verify --report \"" + report.string() +
                          "\" > \"" + (dir / (name + ".log")).string() + "\" 2>&1";
  const int code = std::system(cmd.c_str());
  std::cout << name << ": cli exit status " << code << "\n";
  Reports out;
  std::ifstream in(report);
  if (!in) return out;
  const nlohmann::json arr = nlohmann::json::parse(in);
  for (const auto& j : arr) {
    const VerificationReport r = hamplug::report_from_json(j);
    out[r.suite] = r;
  }
  return out;
}

struct Check {
  bool ok = false;
  std::string detail;
};

Check suite_passed(const Reports& rs, const std::string& suite, double max_wall = 0.0) {
  const auto it = rs.find(suite);
  if (it == rs.end()) return {false, suite + " missing"};
  const VerificationReport& r = it->second;
  Check c{r.passed, suite + (r.passed ? " passed" : " failed")};
  if (max_wall > 0.0) {
    c.detail += ", " + std::to_string(r.wall_clock_s) + " s";
    c.ok = c.ok && r.wall_clock_s < max_wall;
  }
  return c;
}

Check both(Check a, const Check& b) { return {a.ok && b.ok, a.detail + "; " + b.detail}; }

}  // namespace

int main() {
  const fs::path dir = fs::temp_directory_path() / "hamplug_acceptance";
  fs::remove_all(dir);
  fs::create_directories(dir);
  setenv(hamplug::kRunDirEnv, dir.string().c_str(), 1);

  const Reports first = run_cli(dir, "run1");
  const Reports second = run_cli(dir, "run2");

  const std::vector<std::pair<std::string, std::function<Check()>>> criteria = {
      {"residuals", [&] { return suite_passed(first, "geometry.residuals", 10.0); }},
      {"reeb identities", [&] { return suite_passed(first, "geometry.reeb_identities"); }},
      {"dz(R_u) identity", [&] { return suite_passed(first, "volume.h_iv_identity"); }},
      {"trap profile", [&] { return suite_passed(first, "trap.profile"); }},
      {"boundary and matching",
       [&] {
         Check c = both(suite_passed(first, "plug.boundary"), suite_passed(first, "plug.matching", 300.0));
         const auto it = first.find("plug.matching");
         if (it != first.end()) {
           const int traversed = it->second.metrics.value("traversed", 0);
           c.ok = c.ok && traversed >= 100;
           c.detail += ", " + std::to_string(traversed) + " traversed";
         }
         return c;
       }},
      {"trapped orbit", [&] { return suite_passed(first, "plug.trap_existence"); }},
      {"aperiodicity certificate", [&] { return suite_passed(first, "plug.aperiodicity"); }},
      {"volume preservation",
       [&] {
         Check c = both(suite_passed(first, "volume.preservation"),
                        suite_passed(first, "volume.slice_positivity"));
         const auto it = first.find("volume.preservation");
         if (it != first.end()) {
           const int samples = it->second.metrics.value("samples", 0);
           const double T = it->second.params.value("T", 0.0);
           c.ok = c.ok && samples >= 100 && T >= 1.0;
           c.detail += ", " + std::to_string(samples) + " samples at T=" + std::to_string(T);
         }
         return c;
       }},
      {"graph embedding", [&] { return suite_passed(first, "geometry.graph_embedding"); }},
      {"open orbit demo", [&] { return suite_passed(first, "host.demo", 600.0); }},
      {"determinism",
       [&] {
         if (first.empty() || first.size() != second.size()) return Check{false, "report sets differ"};
         for (const auto& [name, r] : first) {
           const auto it = second.find(name);
           if (it == second.end() || hamplug::canonical_dump(r) != hamplug::canonical_dump(it->second)) {
             return Check{false, name + " differs between runs"};
           }
         }
         return Check{true, std::to_string(first.size()) + " reports identical"};
       }},
  };

  int failures = 0;
  int index = 1;
  for (const auto& [name, check] : criteria) {
    const Check c = check();
    failures += !c.ok;
    std::cout << (c.ok ? "PASS" : "FAIL") << "  " << index++ << ". " << name << " (" << c.detail << ")\n";
  }
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed")
            << "\n";
  return failures == 0 ? 0 : 1;
}
