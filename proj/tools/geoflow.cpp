#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "geoflow/config.hpp"
#include "geoflow/error.hpp"
#include "geoflow/parallel.hpp"
#include "geoflow/report.hpp"
#include "geoflow/scenarios.hpp"

int main(int argc, char** argv) {
  using namespace geoflow;
  CLI::App app{"Run one geodesic-flow experiment and write its report."};
  std::string scenario, config_path, out_dir = ".", format = "json";
  std::optional<std::uint64_t> seed;
  std::optional<int> jobs;
  std::string names;
  for (const auto& n : scenario_names()) names += (names.empty() ? "" : ", ") + n;
  app.add_option("scenario", scenario, "one of: " + names)->required();
  app.add_option("--config", config_path, "key = value configuration file (defaults when omitted)");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--format", format, "report format")->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--seed", seed, "overrides the configured seed");
  app.add_option("--jobs", jobs, "worker threads (falls back to GEOFLOW_JOBS)")->check(CLI::PositiveNumber);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    ScenarioConfig cfg = config_path.empty() ? ScenarioConfig{} : load_config(config_path);
    if (seed) cfg.seed = *seed;
    const ScenarioReport rep = run_scenario(scenario, cfg, resolve_jobs(jobs));
    for (const auto& path : emit_report(rep, format, out_dir)) std::cout << "wrote " << path << "\n";
    const auto failures = rep.failures();
    for (const auto& f : failures) std::cerr << "FAILED " << f << "\n";
    std::cout << scenario << ": " << rep.checks.size() - failures.size() << "/" << rep.checks.size()
              << " checks passed\n";
    return failures.empty() ? 0 : 1;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
