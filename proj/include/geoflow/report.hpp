#pragma once

#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace geoflow {

// How a measured value is compared with its expected value.
enum class Relation { near, at_most, at_least, above, below };

struct CheckRecord {
  std::string name;
  double measured = 0.0;
  double expected = 0.0;
  double tolerance = 0.0;
  Relation relation = Relation::near;
  bool pass = false;
  // Where the expected value comes from: "theory", "exact" or "oracle".
  std::string origin;
};

using Cell = std::variant<double, long long, std::string>;

struct SeriesTable {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

struct ScenarioReport {
  std::string scenario;
  std::vector<std::pair<std::string, std::string>> config;
  std::vector<CheckRecord> checks;
  std::vector<SeriesTable> tables;

  bool passed() const;
  std::vector<std::string> failures() const;

  // |measured - expected| <= tol
  CheckRecord& check_near(std::string name, double measured, double expected, double tol,
                          std::string origin);
  CheckRecord& check_at_most(std::string name, double measured, double bound, std::string origin);
  CheckRecord& check_at_least(std::string name, double measured, double bound, std::string origin);
  CheckRecord& check_above(std::string name, double measured, double bound, std::string origin);
  CheckRecord& check_below(std::string name, double measured, double bound, std::string origin);
  SeriesTable& table(std::string name, std::vector<std::string> columns);
};

const char* relation_name(Relation r);

std::string report_json(const ScenarioReport& r);
std::string report_csv(const ScenarioReport& r);
std::string series_csv(const ScenarioReport& r);

// Writes <dir>/<scenario>.report.<format> and <dir>/<scenario>.series.csv; returns the paths.
std::vector<std::string> emit_report(const ScenarioReport& r, const std::string& format,
                                     const std::string& dir);

}  // namespace geoflow
