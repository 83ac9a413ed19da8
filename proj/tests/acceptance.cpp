// Runs every scenario twice at the default configuration and prints one PASS/FAIL line
// per acceptance criterion. Exit status is nonzero when any line fails.
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "geoflow/config.hpp"
#include "geoflow/parallel.hpp"
#include "geoflow/report.hpp"
#include "geoflow/scenarios.hpp"

using namespace geoflow;
namespace fs = std::filesystem;

namespace {

struct Run {
  ScenarioReport report;
  double seconds = 0.0;
  std::vector<std::string> files;
};

std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}


std::string describe(const CheckRecord& c) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%s=%.6g (%s %.6g%s)", c.name.c_str(), c.measured, relation_name(c.relation),
                c.expected, c.relation == Relation::near ? (" +- " + format_double(c.tolerance)).c_str() : "");
  return buf;
}

// Passes when every named check exists and passes; prefixes select groups of checks.
struct Verdict {
  bool pass = true;
  std::string detail;

  void require(const ScenarioReport& r, const std::string& prefix) {
    bool any = false;
    for (const auto& c : r.checks) {
      if (c.name.rfind(prefix, 0) != 0) continue;
      any = true;
      if (!c.pass) {
        pass = false;
        detail += " " + describe(c);
      }
    }
    if (!any) {
      pass = false;
      detail += " missing:" + prefix;
    }
  }
  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += " " + what;
    }
  }
};

void print(int id, const std::string& title, const Verdict& v) {
  std::printf("%s %d %s%s%s\n", v.pass ? "PASS" : "FAIL", id, title.c_str(), v.detail.empty() ? "" : " |",
              v.detail.c_str());
  std::fflush(stdout);
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path out = argc > 1 ? fs::path(argv[1]) : fs::path("acceptance_out");
  const ScenarioConfig cfg = load_config(std::string(GEOFLOW_SOURCE_DIR) + "/configs/default.conf");
  int jobs = 1;
  if (std::getenv("GEOFLOW_JOBS") != nullptr) jobs = resolve_jobs(std::nullopt);
  else jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));

  std::map<std::string, Run> first;
  std::vector<std::string> mismatched;
  double suite_seconds = 0.0;
  for (int pass = 0; pass < 2; ++pass) {
    const fs::path dir = out / (pass == 0 ? "run1" : "run2");
    fs::remove_all(dir);
    double total = 0.0;
    for (const auto& name : scenario_names()) {
      const auto t0 = std::chrono::steady_clock::now();
      Run run;
      run.report = run_scenario(name, cfg, jobs);
      run.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      total += run.seconds;
      run.files = emit_report(run.report, "json", dir.string());
      const auto csv = emit_report(run.report, "csv", dir.string());
      run.files.push_back(csv.front());
      if (pass == 0) {
        std::printf("# %-16s %7.2f s  %zu checks, %zu failing\n", name.c_str(), run.seconds,
                    run.report.checks.size(), run.report.failures().size());
        first[name] = std::move(run);
      } else {
        const Run& a = first[name];
        for (std::size_t i = 0; i < run.files.size(); ++i)
          if (slurp(a.files[i]) != slurp(run.files[i])) mismatched.push_back(run.files[i]);
      }
    }
    if (pass == 0) suite_seconds = total;
  }

  int failed = 0;
  auto emit = [&](int id, const std::string& title, const Verdict& v) {
    print(id, title, v);
    failed += v.pass ? 0 : 1;
  };

  {
    // curvature of the symmetric chart alone, timed separately
    const auto t0 = std::chrono::steady_clock::now();
    ScenarioConfig c = cfg;
    const ScenarioReport r = run_scenario("eberlein-flat", c, 1);
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    Verdict v;
    v.require(r, "base_axis_operator_max_error");
    v.require(s < 1.0, "runtime " + format_double(s) + " s");
    emit(1, "curvature fidelity on the CH2 chart", v);

    Verdict w;
    w.require(r, "deformed_weak_R0k0k_max_abs");
    w.require(r, "deformed_strong_R0j0j_max_dev");
    w.require(s < 1.0, "runtime " + format_double(s) + " s");
    emit(2, "flat weak directions along the axis of g*", w);
  }
  {
    Verdict v;
    const auto& r = first["central-bundle"].report;
    v.require(r, "linear_field_max_relative_error");
    v.require(r, "linear_field_loglog_slope");
    emit(3, "central bundle grows linearly", v);
  }
  {
    Verdict v;
    const auto& r = first["strong-rates"].report;
    v.require(r, "unstable_rate_");
    v.require(r, "stable_rate_");
    emit(4, "strong growth rates +-1", v);
  }
  {
    Verdict v;
    const auto& r = first["symmetric-cones"].report;
    v.require(r, "oracle_max_abs_difference");
    v.require(r, "boundary_min_dtheta_numeric");
    emit(5, "cone variation oracle and boundary positivity", v);
  }
  {
    Verdict v;
    const auto& r = first["crossing-time"].report;
    v.require(r, "exit_time_exponent");
    v.require(r, "exit_time_constant");
    emit(6, "tube crossing time linear in epsilon", v);
  }
  {
    Verdict v;
    const auto& r = first["net-invariance"].report;
    v.require(r, "net_theta_gain_min");
    // the large tube is expected to lose invariance
    v.require(r, "large_tube_net_theta_gain_min");
    emit(7, "net cone invariance across the tube", v);
  }
  {
    Verdict v;
    const auto& r = first["bump-bounds"].report;
    v.require(r, "F0");
    v.require(r, "F_max_ratio");
    v.require(r, "estimate_exponent_");
    emit(8, "bump profile bounds and estimates", v);
  }
  {
    Verdict v;
    const auto& r = first["product-gap"].report;
    v.require(r, "multiset_max_deviation");
    v.require(r, "verdict_");
    emit(9, "product exponents and domination gap", v);
  }
  {
    Verdict v;
    v.require(mismatched.empty(), std::to_string(mismatched.size()) + " files differ between runs");
    for (const auto& f : mismatched) v.detail += " " + f;
    v.require(suite_seconds < 600.0, "suite took " + format_double(suite_seconds) + " s");
    char buf[64];
    std::snprintf(buf, sizeof buf, " (suite %.1f s, %d jobs)", suite_seconds, jobs);
    emit(10, std::string("deterministic reports and runtime") + buf, v);
  }
  return failed == 0 ? 0 : 1;
}
