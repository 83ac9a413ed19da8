#include "geoflow/report.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>

#include "geoflow/config.hpp"
#include "geoflow/error.hpp"

namespace geoflow {

const char* relation_name(Relation r) {
  switch (r) {
    case Relation::near: return "near";
    case Relation::at_most: return "at_most";
    case Relation::at_least: return "at_least";
    case Relation::above: return "above";
    case Relation::below: return "below";
  }
  return "?";
}

bool ScenarioReport::passed() const {
  for (const auto& c : checks)
    if (!c.pass) return false;
  return true;
}

std::vector<std::string> ScenarioReport::failures() const {
  std::vector<std::string> out;
  for (const auto& c : checks)
    if (!c.pass) out.push_back(c.name);
  return out;
}

namespace {

CheckRecord& add(ScenarioReport& r, std::string name, double measured, double expected, double tol,
                 Relation rel, std::string origin) {
  CheckRecord c;
  c.name = std::move(name);
  c.measured = measured;
  c.expected = expected;
  c.tolerance = tol;
  c.relation = rel;
  c.origin = std::move(origin);
  switch (rel) {
    case Relation::near: c.pass = std::abs(measured - expected) <= tol; break;
    case Relation::at_most: c.pass = measured <= expected; break;
    case Relation::at_least: c.pass = measured >= expected; break;
    case Relation::above: c.pass = measured > expected; break;
    case Relation::below: c.pass = measured < expected; break;
  }
  r.checks.push_back(std::move(c));
  return r.checks.back();
}

}  // namespace

CheckRecord& ScenarioReport::check_near(std::string name, double measured, double expected,
                                        double tol, std::string origin) {
  return add(*this, std::move(name), measured, expected, tol, Relation::near, std::move(origin));
}
CheckRecord& ScenarioReport::check_at_most(std::string name, double measured, double bound,
                                           std::string origin) {
  return add(*this, std::move(name), measured, bound, 0.0, Relation::at_most, std::move(origin));
}
CheckRecord& ScenarioReport::check_at_least(std::string name, double measured, double bound,
                                            std::string origin) {
  return add(*this, std::move(name), measured, bound, 0.0, Relation::at_least, std::move(origin));
}
CheckRecord& ScenarioReport::check_above(std::string name, double measured, double bound,
                                         std::string origin) {
  return add(*this, std::move(name), measured, bound, 0.0, Relation::above, std::move(origin));
}
CheckRecord& ScenarioReport::check_below(std::string name, double measured, double bound,
                                         std::string origin) {
  return add(*this, std::move(name), measured, bound, 0.0, Relation::below, std::move(origin));
}

SeriesTable& ScenarioReport::table(std::string name, std::vector<std::string> columns) {
  tables.push_back({std::move(name), std::move(columns), {}});
  return tables.back();
}

namespace {

std::string json_string(const std::string& s) {
  std::string o = "\"";
  for (char ch : s) {
    switch (ch) {
      case '"': o += "\\\""; break;
      case '\\': o += "\\\\"; break;
      case '\n': o += "\\n"; break;
      case '\t': o += "\\t"; break;
      default:
        if (static_cast<unsigned char>(ch) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", ch);
          o += buf;
        } else {
          o += ch;
        }
    }
  }
  return o + "\"";
}

std::string json_number(double v) { return std::isfinite(v) ? format_double(v) : "null"; }

std::string json_cell(const Cell& c) {
  if (const double* d = std::get_if<double>(&c)) return json_number(*d);
  if (const long long* i = std::get_if<long long>(&c)) return std::to_string(*i);
  return json_string(std::get<std::string>(c));
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string o = "\"";
  for (char ch : s) o += ch == '"' ? std::string("\"\"") : std::string(1, ch);
  return o + "\"";
}

std::string csv_cell(const Cell& c) {
  if (const double* d = std::get_if<double>(&c)) return format_double(*d);
  if (const long long* i = std::get_if<long long>(&c)) return std::to_string(*i);
  return csv_field(std::get<std::string>(c));
}

}  // namespace

std::string report_json(const ScenarioReport& r) {
  std::string o = "{\n  \"scenario\": " + json_string(r.scenario) + ",\n  \"config\": {";
  for (std::size_t i = 0; i < r.config.size(); ++i)
    o += (i ? ",\n    " : "\n    ") + json_string(r.config[i].first) + ": " + json_string(r.config[i].second);
  o += r.config.empty() ? "},\n" : "\n  },\n";
  o += "  \"checks\": [";
  for (std::size_t i = 0; i < r.checks.size(); ++i) {
    const CheckRecord& c = r.checks[i];
    o += (i ? ",\n    {" : "\n    {");
    o += "\"name\": " + json_string(c.name) + ", \"measured\": " + json_number(c.measured) +
         ", \"expected\": " + json_number(c.expected) + ", \"tolerance\": " + json_number(c.tolerance) +
         ", \"relation\": " + json_string(relation_name(c.relation)) +
         ", \"pass\": " + (c.pass ? "true" : "false") + ", \"origin\": " + json_string(c.origin) + "}";
  }
  o += r.checks.empty() ? "],\n" : "\n  ],\n";
  o += "  \"tables\": [";
  for (std::size_t t = 0; t < r.tables.size(); ++t) {
    const SeriesTable& tb = r.tables[t];
    o += (t ? ",\n    {" : "\n    {");
    o += "\"name\": " + json_string(tb.name) + ", \"columns\": [";
    for (std::size_t i = 0; i < tb.columns.size(); ++i) o += (i ? ", " : "") + json_string(tb.columns[i]);
    o += "], \"rows\": [";
    for (std::size_t i = 0; i < tb.rows.size(); ++i) {
      o += (i ? ", [" : "[");
      for (std::size_t j = 0; j < tb.rows[i].size(); ++j) o += (j ? ", " : "") + json_cell(tb.rows[i][j]);
      o += "]";
    }
    o += "]}";
  }
  o += r.tables.empty() ? "],\n" : "\n  ],\n";
  o += std::string("  \"passed\": ") + (r.passed() ? "true" : "false") + "\n}\n";
  return o;
}

std::string report_csv(const ScenarioReport& r) {
  std::string o = "name,measured,expected,tolerance,relation,pass,origin\n";
  for (const CheckRecord& c : r.checks) {
    o += csv_field(c.name) + "," + format_double(c.measured) + "," + format_double(c.expected) + "," +
         format_double(c.tolerance) + "," + relation_name(c.relation) + "," + (c.pass ? "true" : "false") +
         "," + csv_field(c.origin) + "\n";
  }
  return o;
}

std::string series_csv(const ScenarioReport& r) {
  std::string o;
  for (const SeriesTable& tb : r.tables) {
    o += "# " + tb.name + "\n";
    for (std::size_t i = 0; i < tb.columns.size(); ++i) o += (i ? "," : "") + csv_field(tb.columns[i]);
    o += "\n";
    for (const auto& row : tb.rows) {
      for (std::size_t j = 0; j < row.size(); ++j) o += (j ? "," : "") + csv_cell(row[j]);
      o += "\n";
    }
    o += "\n";
  }
  return o;
}

std::vector<std::string> emit_report(const ScenarioReport& r, const std::string& format,
                                     const std::string& dir) {
  if (format != "json" && format != "csv") throw UsageError("format must be csv or json");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  const std::filesystem::path base(dir);
  const std::vector<std::pair<std::filesystem::path, std::string>> files{
      {base / (r.scenario + ".report." + format), format == "json" ? report_json(r) : report_csv(r)},
      {base / (r.scenario + ".series.csv"), series_csv(r)}};
  std::vector<std::string> out;
  for (const auto& [path, body] : files) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot write '" + path.string() + "'");
    f << body;
    f.close();
    if (!f) throw IoError("failed writing '" + path.string() + "'");
    out.push_back(path.string());
  }
  return out;
}

}  // namespace geoflow
