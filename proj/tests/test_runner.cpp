#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "doctest.h"
#include "geoflow/config.hpp"
#include "geoflow/error.hpp"
#include "geoflow/parallel.hpp"
#include "geoflow/report.hpp"
#include "geoflow/scenarios.hpp"

using namespace geoflow;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace

TEST_SUITE("runner") {
TEST_CASE("config round trip") {
  ScenarioConfig c;
  CHECK(parse_config(serialize_config(c)) == c);
  c.epsilon_sweep = {0.1, 1.0 / 3.0, 0.007};
  c.seed = 18446744073709551615ULL;
  c.tau_ramp = 0.1 + 0.02;
  c.product_alpha = std::nextafter(0.6, 1.0);
  CHECK(parse_config(serialize_config(c)) == c);
  CHECK(parse_config("") == ScenarioConfig{});
}

TEST_CASE("config parsing accepts comments and spacing") {
  const ScenarioConfig c = parse_config("# header\n  epsilon_tube =0.01   # inline\n\nseed= 7\n");
  CHECK(c.epsilon_tube == 0.01);
  CHECK(c.seed == 7u);
}

TEST_CASE("config rejects bad input") {
  CHECK_THROWS_AS(parse_config("no_such_key = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("epsilon_tube\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("epsilon_tube = abc\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("axis_samples = 1.5\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("seed = -1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("cone_opening = 2.5\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("tau_ramp = 0.3\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("model_a_block = 4\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("epsilon_sweep = 0.1,,0.2\n"), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/geoflow.conf"), IoError);
}

TEST_CASE("shipped default config equals the built-in defaults") {
  CHECK(load_config(std::string(GEOFLOW_SOURCE_DIR) + "/configs/default.conf") == ScenarioConfig{});
}

TEST_CASE("check relations") {
  ScenarioReport r;
  CHECK(r.check_near("a", 1.0, 1.05, 0.1, "exact").pass);
  CHECK_FALSE(r.check_near("b", 1.0, 1.2, 0.1, "exact").pass);
  CHECK(r.check_at_most("c", 1.0, 1.0, "exact").pass);
  CHECK_FALSE(r.check_below("d", 1.0, 1.0, "exact").pass);
  CHECK(r.check_at_least("e", 1.0, 1.0, "exact").pass);
  CHECK_FALSE(r.check_above("f", 1.0, 1.0, "exact").pass);
  CHECK_FALSE(r.check_near("g", std::numeric_limits<double>::quiet_NaN(), 0.0, 1.0, "exact").pass);
  CHECK_FALSE(r.passed());
  CHECK(r.failures() == std::vector<std::string>{"b", "d", "f", "g"});
}

TEST_CASE("empty report serializes to headers only") {
  ScenarioReport r;
  r.scenario = "empty";
  CHECK(report_csv(r) == "name,measured,expected,tolerance,relation,pass,origin\n");
  CHECK(series_csv(r).empty());
  CHECK(r.passed());
  const std::string j = report_json(r);
  CHECK(j.find("\"checks\": []") != std::string::npos);
  CHECK(j.find("\"passed\": true") != std::string::npos);
}

TEST_CASE("serialization details") {
  ScenarioReport r;
  r.scenario = "s";
  r.check_near("x", std::numeric_limits<double>::quiet_NaN(), 0.1, 1e-3, "oracle");
  auto& t = r.table("series", {"a", "b,c"});
  t.rows.push_back({0.1, 3LL, std::string("q\"x")});
  const std::string j = report_json(r);
  CHECK(j.find("\"measured\": null") != std::string::npos);
  CHECK(j.find("\"expected\": 0.10000000000000001") != std::string::npos);
  CHECK(j.find("\"q\\\"x\"") != std::string::npos);
  const std::string s = series_csv(r);
  CHECK(s == "# series\na,\"b,c\"\n0.10000000000000001,3,\"q\"\"x\"\n\n");
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(format_double(-std::numeric_limits<double>::infinity()) == "-inf");
}

TEST_CASE("emit_report writes deterministic files") {
  const auto dir = std::filesystem::temp_directory_path() / "geoflow_runner_test";
  std::filesystem::remove_all(dir);
  ScenarioConfig c;
  c.grid_count = 2000;
  const ScenarioReport a = run_scenario("bump-bounds", c, 1);
  const ScenarioReport b = run_scenario("bump-bounds", c, 3);
  const auto pa = emit_report(a, "json", (dir / "a").string());
  const auto pb = emit_report(b, "json", (dir / "b").string());
  REQUIRE(pa.size() == 2);
  CHECK(std::filesystem::path(pa[0]).filename() == "bump-bounds.report.json");
  CHECK(std::filesystem::path(pa[1]).filename() == "bump-bounds.series.csv");
  for (std::size_t i = 0; i < pa.size(); ++i) CHECK(slurp(pa[i]) == slurp(pb[i]));
  const auto pc = emit_report(a, "csv", (dir / "a").string());
  CHECK(std::filesystem::path(pc[0]).filename() == "bump-bounds.report.csv");
  CHECK_THROWS_AS(emit_report(a, "xml", dir.string()), UsageError);
  std::filesystem::create_directories(dir);
  std::ofstream(dir / "blocker") << "x";
  CHECK_THROWS_AS(emit_report(a, "json", (dir / "blocker" / "sub").string()), IoError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("scenario registry") {
  CHECK(scenario_names().size() == 9);
  CHECK_THROWS_AS(run_scenario("no-such-scenario", ScenarioConfig{}, 1), UsageError);
  ScenarioConfig bad;
  bad.cone_opening = 3.0;
  CHECK_THROWS_AS(run_scenario("bump-bounds", bad, 1), ConfigError);
}

TEST_CASE("report echoes the config") {
  ScenarioConfig c;
  c.grid_count = 1000;
  const ScenarioReport r = run_scenario("bump-bounds", c, 1);
  CHECK(r.scenario == "bump-bounds");
  CHECK(r.config == config_entries(c));
}

TEST_CASE("resolve_jobs") {
  CHECK(resolve_jobs(3) == 3);
  CHECK_THROWS_AS(resolve_jobs(0), UsageError);
  ::setenv("GEOFLOW_JOBS", "5", 1);
  CHECK(resolve_jobs(std::nullopt) == 5);
  CHECK(resolve_jobs(2) == 2);
  ::setenv("GEOFLOW_JOBS", "zero", 1);
  CHECK_THROWS_AS(resolve_jobs(std::nullopt), UsageError);
  ::unsetenv("GEOFLOW_JOBS");
  CHECK(resolve_jobs(std::nullopt) == 1);
}

TEST_CASE("parallel_for covers every index and rethrows the first failure") {
  for (int jobs : {1, 4}) {
    std::vector<int> hit(1000, 0);
    parallel_for(hit.size(), jobs, [&](std::size_t i) { hit[i] += 1; });
    for (int h : hit) CHECK(h == 1);
    std::atomic<int> ran{0};
    try {
      parallel_for(100, jobs, [&](std::size_t i) {
        ++ran;
        if (i == 17 || i == 60) throw std::runtime_error("task " + std::to_string(i));
      });
      FAIL("expected an exception");
    } catch (const std::runtime_error& e) {
      CHECK(std::string(e.what()) == "task 17");
    }
    CHECK(ran == 100);
  }
  parallel_for(0, 4, [](std::size_t) { FAIL("no tasks expected"); });
}
}
