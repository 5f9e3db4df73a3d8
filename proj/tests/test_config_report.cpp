#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "hamplug/config.hpp"
#include "hamplug/errors.hpp"
#include "hamplug/integrator.hpp"
#include "hamplug/parallel.hpp"
#include "hamplug/random.hpp"
#include "hamplug/report.hpp"

using namespace hamplug;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("hamplug_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string config_error(const std::vector<std::string>& overrides) {
  try {
    default_config(overrides);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(ConfigTest, DefaultsValidate) {
  const Config cfg = default_config();
  EXPECT_NO_THROW(cfg.validate());
  EXPECT_EQ(cfg.n, 3);
  EXPECT_EQ(cfg.run.seed, 1u);
  EXPECT_EQ(cfg.tol.matching, 1e-6);
}

TEST(ConfigTest, ErrorsNameTheOffendingKey) {
  EXPECT_NE(config_error({"geometry.n=2"}).find("geometry.n"), std::string::npos);
  EXPECT_NE(config_error({"geometry.n=7"}).find("geometry.n"), std::string::npos);
  EXPECT_NE(config_error({"trap.amplitude=2"}).find("trap.amplitude"), std::string::npos);
  EXPECT_NE(config_error({"plug.lambda=0.9"}).find("plug.lambda"), std::string::npos);
  EXPECT_NE(config_error({"nonsense.key=1"}).find("nonsense.key"), std::string::npos);
  EXPECT_NE(config_error({"geometry.n=three"}).find("geometry.n"), std::string::npos);
  EXPECT_NE(config_error({"missing_equals"}), "");
}

TEST(ConfigTest, OverridesApply) {
  const Config cfg = default_config({"geometry.n=4", "plug.lambda=0.2", "run.seed=9", "trap.amplitude=0"});
  EXPECT_EQ(cfg.n, 4);
  EXPECT_EQ(cfg.run.seed, 9u);
  EXPECT_EQ(cfg.trap.amplitude, 0.0);
}

TEST(ConfigTest, LoadsIniFileAndAppliesOverridesLast) {
  const fs::path dir = scratch("ini");
  std::ofstream(dir / "c.ini") << "[geometry]\nn = 4\n[plug]\nlambda = 0.2\n[run]\nseed = 5\n[host]\nt_post = 12.5\n";
  const Config cfg = load_config(dir / "c.ini", {"run.seed=6"});
  EXPECT_EQ(cfg.n, 4);
  EXPECT_EQ(cfg.run.seed, 6u);
  EXPECT_EQ(cfg.host.t_post, 12.5);
  std::ofstream(dir / "bad.ini") << "[run]\nspeed = 5\n";
  EXPECT_THROW(load_config(dir / "bad.ini"), ConfigError);
  EXPECT_THROW(load_config(dir / "absent.ini"), ConfigError);
}

TEST(ConfigTest, JsonEchoContainsSections) {
  const nlohmann::json j = to_json(default_config());
  EXPECT_EQ(j["geometry"]["n"], 3);
  EXPECT_TRUE(j.contains("trap"));
  EXPECT_TRUE(j.contains("tolerance"));
}

TEST(Report, JsonRoundTripAndCanonicalDump) {
  VerificationReport r;
  r.suite = "demo.suite";
  r.passed = true;
  r.metrics = {{"a", 1.5}, {"b", {1, 2, 3}}};
  r.params = {{"p", "x"}};
  r.seed = 42;
  r.wall_clock_s = 3.25;
  const VerificationReport back = report_from_json(to_json(r));
  EXPECT_EQ(to_json(back), to_json(r));
  VerificationReport other = r;
  other.wall_clock_s = 99.0;
  EXPECT_EQ(canonical_dump(r), canonical_dump(other));
  EXPECT_EQ(canonical_dump(r).find("wall_clock"), std::string::npos);
  other.metrics["a"] = 1.6;
  EXPECT_NE(canonical_dump(r), canonical_dump(other));
}

TEST(Report, AppendWritesOneLinePerReport) {
  const fs::path dir = scratch("append");
  VerificationReport r;
  r.suite = "x";
  append_reports(dir, {r, r});
  append_reports(dir, {r});
  std::ifstream in(dir / "reports.jsonl");
  int lines = 0;
  for (std::string line; std::getline(in, line);) {
    EXPECT_EQ(nlohmann::json::parse(line)["suite"], "x");
    ++lines;
  }
  EXPECT_EQ(lines, 3);
}

TEST(Csv, HeaderNamesStateColumns) {
  EXPECT_EQ(csv_header(5), "t,x1,y1,x2,y2,z");
  EXPECT_EQ(csv_header(4), "t,x1,y1,x2,y2");
  EXPECT_EQ(csv_header(3, "g"), "t,x1,y1,z,g");
}

TEST(Csv, TrajectoryRoundTripIsByteIdentical) {
  auto f = [](const Vec&) -> Vec {
    Vec v(3);
    v << 1.0, 0.5, 0.25;
    return v;
  };
  IntegratorOptions io;
  io.h_init = io.h_max = 1.0 / 3.0;
  const Trajectory tr = integrate(f, Vec::Zero(3), 1.0, io);
  const fs::path dir = scratch("csv");
  export_trajectory(tr, dir / "a.csv");
  const std::string text = read_file(dir / "a.csv");
  int rows = 0;
  for (char c : text) rows += c == '\n';
  EXPECT_EQ(rows, 1 + static_cast<int>(tr.times.size()));
  EXPECT_EQ(tr.times.size(), 4u);
  const Trajectory back = import_trajectory(dir / "a.csv");
  ASSERT_EQ(back.times.size(), tr.times.size());
  for (std::size_t i = 0; i < tr.times.size(); ++i) {
    EXPECT_EQ(back.times[i], tr.times[i]);
    EXPECT_TRUE((back.states[i].array() == tr.states[i].array()).all());
  }
  export_trajectory(back, dir / "b.csv");
  EXPECT_EQ(read_file(dir / "b.csv"), text);
  EXPECT_EQ(std::stod(format_double(0.1)), 0.1);
}

TEST(Parallel, ResultsAreIndexOrderedAndErrorsPropagate) {
  const auto out = parallel_map<int>(100, 4, [](std::size_t i) { return static_cast<int>(i * i); });
  for (std::size_t i = 0; i < out.size(); ++i) EXPECT_EQ(out[i], static_cast<int>(i * i));
  EXPECT_THROW(parallel_map<int>(10, 3,
                                 [](std::size_t i) -> int {
                                   if (i == 7) throw StepFailure("boom");
                                   return 0;
                                 }),
               StepFailure);
}

TEST(RngTest, SameSeedSameStream) {
  Rng a(7), b(7), c(8);
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const double x = a.uniform(), y = b.uniform(), z = c.uniform();
    EXPECT_EQ(x, y);
    EXPECT_GE(x, 0.0);
    EXPECT_LT(x, 1.0);
    differs = differs || x != z;
  }
  EXPECT_TRUE(differs);
}
