#include "hamplug/report.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace hamplug {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

nlohmann::json to_json(const VerificationReport& r) {
  return {{"suite", r.suite},       {"passed", r.passed},   {"expected_fail", r.expected_fail},
          {"metrics", r.metrics},   {"params", r.params},   {"seed", r.seed},
          {"wall_clock_s", r.wall_clock_s}, {"version", r.version}};
}

VerificationReport report_from_json(const nlohmann::json& j) {
  VerificationReport r;
  r.suite = j.at("suite").get<std::string>();
  r.passed = j.at("passed").get<bool>();
  r.expected_fail = j.value("expected_fail", false);
  r.metrics = j.at("metrics");
  r.params = j.at("params");
  r.seed = j.at("seed").get<std::uint64_t>();
  r.wall_clock_s = j.at("wall_clock_s").get<double>();
  r.version = j.at("version").get<std::string>();
  return r;
}

std::string canonical_dump(const VerificationReport& r) {
  nlohmann::json j = to_json(r);
  j.erase("wall_clock_s");
  return j.dump();
}

void append_reports(const std::filesystem::path& dir, const std::vector<VerificationReport>& rs) {
  std::filesystem::create_directories(dir);
  const auto path = dir / "reports.jsonl";
  std::ofstream out(path, std::ios::app);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for appending");
  for (const auto& r : rs) out << to_json(r).dump() << '\n';
  if (!out) throw std::runtime_error("write to " + path.string() + " failed");
}

std::filesystem::path run_directory(const std::filesystem::path& fallback) {
  const char* env = std::getenv(kRunDirEnv);
  return env && *env ? std::filesystem::path(env) : fallback;
}

namespace {

nlohmann::json vec_json(const Vec& v) {
  nlohmann::json a = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

}  // namespace

nlohmann::json to_json(const TraverseRecord& r) {
  nlohmann::json j = {{"entry", vec_json(r.entry)},
                      {"status", to_string(r.status)},
                      {"transit_time", r.transit_time},
                      {"face_residual", r.face_residual},
                      {"steps", r.steps}};
  if (r.exit.size() > 0) j["exit"] = vec_json(r.exit);
  if (!r.message.empty()) j["message"] = r.message;
  return j;
}

void write_records_jsonl(const std::filesystem::path& path, const std::vector<TraverseRecord>& rs) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  for (const auto& r : rs) out << to_json(r).dump() << '\n';
}

std::string csv_header(int state_dim, const std::string& extra_column) {
  std::string h = "t";
  // Odd states end in z; even states are host points (x_1, y_1, ..., x_n, y_n).
  const int planes = state_dim / 2;
  for (int j = 1; j <= planes; ++j) h += ",x" + std::to_string(j) + ",y" + std::to_string(j);
  if (state_dim % 2 == 1) h += ",z";
  if (!extra_column.empty()) h += "," + extra_column;
  return h;
}

void export_trajectory(const Trajectory& traj, const std::filesystem::path& path,
                       const std::string& extra_column) {
  if (traj.states.empty()) throw PreconditionError("empty trajectory");
  const int d = static_cast<int>(traj.states.front().size());
  const int base = extra_column.empty() ? d : d - 1;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << csv_header(base, extra_column) << '\n';
  for (std::size_t i = 0; i < traj.states.size(); ++i) {
    out << format_double(traj.times[i]);
    for (int k = 0; k < d; ++k) out << ',' << format_double(traj.states[i][k]);
    out << '\n';
  }
  if (!out) throw std::runtime_error("write to " + path.string() + " failed");
}

Trajectory import_trajectory(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  std::getline(in, line);
  Trajectory traj;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> vals;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      double v = 0.0;
      const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (res.ec != std::errc()) throw std::runtime_error("bad number '" + cell + "' in " + path.string());
      vals.push_back(v);
    }
    traj.times.push_back(vals.front());
    Vec s(static_cast<Eigen::Index>(vals.size() - 1));
    for (std::size_t k = 1; k < vals.size(); ++k) s[k - 1] = vals[k];
    traj.states.push_back(s);
  }
  return traj;
}

}  // namespace hamplug
