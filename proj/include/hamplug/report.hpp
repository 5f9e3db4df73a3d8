#pragma once

// Structured verification reports and data export.

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "hamplug/integrator.hpp"

namespace hamplug {

inline constexpr const char* kVersion = "0.1.0";

/// Name of the environment variable holding the run directory.
inline constexpr const char* kRunDirEnv = "HAMPLUG_RUN_DIR";

struct VerificationReport {
  std::string suite;
  bool passed = false;
  /// Set when failure is the expected outcome for the configuration
  /// (e.g. trap existence with H == 1).
  bool expected_fail = false;
  nlohmann::json metrics = nlohmann::json::object();
  nlohmann::json params = nlohmann::json::object();
  std::uint64_t seed = 0;
  double wall_clock_s = 0.0;
  std::string version = kVersion;

  /// Passed, or failed where failure was expected.
  bool ok() const { return passed != expected_fail; }
};

nlohmann::json to_json(const VerificationReport& r);
VerificationReport report_from_json(const nlohmann::json& j);

/// Report serialization with wall-clock fields removed, used for
/// determinism comparisons.
std::string canonical_dump(const VerificationReport& r);

/// Appends one JSON line per report to <dir>/reports.jsonl.
void append_reports(const std::filesystem::path& dir, const std::vector<VerificationReport>& rs);

/// Run directory from HAMPLUG_RUN_DIR, or the fallback.
std::filesystem::path run_directory(const std::filesystem::path& fallback);

nlohmann::json to_json(const TraverseRecord& r);
void write_records_jsonl(const std::filesystem::path& path, const std::vector<TraverseRecord>& rs);

/// CSV with header t,x1,y1,...,z and optional extra trailing column name.
void export_trajectory(const Trajectory& traj, const std::filesystem::path& path,
                       const std::string& extra_column = "");
Trajectory import_trajectory(const std::filesystem::path& path);
std::string csv_header(int state_dim, const std::string& extra_column = "");

/// Shortest round-trip decimal representation of a double.
std::string format_double(double v);

}  // namespace hamplug
