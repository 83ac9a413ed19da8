#include "geoflow/config.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <variant>

#include "geoflow/error.hpp"

namespace geoflow {

namespace {

using Field = std::variant<int ScenarioConfig::*, double ScenarioConfig::*,
                           std::vector<double> ScenarioConfig::*, std::uint64_t ScenarioConfig::*>;

struct Entry {
  const char* key;
  Field field;
};

const std::vector<Entry>& entries() {
  static const std::vector<Entry> e{
      {"model_dimension", &ScenarioConfig::model_dimension},
      {"model_a_block", &ScenarioConfig::model_a_block},
      {"period_time", &ScenarioConfig::period_time},
      {"epsilon_chart", &ScenarioConfig::epsilon_chart},
      {"epsilon_tube", &ScenarioConfig::epsilon_tube},
      {"epsilon_large", &ScenarioConfig::epsilon_large},
      {"epsilon_sweep", &ScenarioConfig::epsilon_sweep},
      {"epsilon_estimates", &ScenarioConfig::epsilon_estimates},
      {"epsilon_transversal", &ScenarioConfig::epsilon_transversal},
      {"tau_ramp", &ScenarioConfig::tau_ramp},
      {"tau_list", &ScenarioConfig::tau_list},
      {"delta_slack", &ScenarioConfig::delta_slack},
      {"deformation_amplitude", &ScenarioConfig::deformation_amplitude},
      {"cone_opening_grid", &ScenarioConfig::cone_opening_grid},
      {"cone_opening", &ScenarioConfig::cone_opening},
      {"theta_transversal", &ScenarioConfig::theta_transversal},
      {"tolerance_integration", &ScenarioConfig::tolerance_integration},
      {"t_end_time", &ScenarioConfig::t_end_time},
      {"monotone_time", &ScenarioConfig::monotone_time},
      {"window_time", &ScenarioConfig::window_time},
      {"outside_arc_time", &ScenarioConfig::outside_arc_time},
      {"reorthonormalize_time", &ScenarioConfig::reorthonormalize_time},
      {"lyapunov_time", &ScenarioConfig::lyapunov_time},
      {"difference_step_time", &ScenarioConfig::difference_step_time},
      {"product_alpha", &ScenarioConfig::product_alpha},
      {"axis_samples", &ScenarioConfig::axis_samples},
      {"boundary_samples", &ScenarioConfig::boundary_samples},
      {"oracle_samples", &ScenarioConfig::oracle_samples},
      {"orbit_count", &ScenarioConfig::orbit_count},
      {"orbit_boundary_samples", &ScenarioConfig::orbit_boundary_samples},
      {"rate_samples", &ScenarioConfig::rate_samples},
      {"grid_count", &ScenarioConfig::grid_count},
      {"seed", &ScenarioConfig::seed},
  };
  return e;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& v) {
  errno = 0;
  char* end = nullptr;
  const double d = std::strtod(v.c_str(), &end);
  if (v.empty() || end != v.c_str() + v.size() || errno == ERANGE || !std::isfinite(d))
    throw ConfigError("bad number for '" + key + "': '" + v + "'");
  return d;
}

long long parse_integer(const std::string& key, const std::string& v) {
  errno = 0;
  char* end = nullptr;
  const long long i = std::strtoll(v.c_str(), &end, 10);
  if (v.empty() || end != v.c_str() + v.size() || errno == ERANGE)
    throw ConfigError("bad integer for '" + key + "': '" + v + "'");
  return i;
}

std::uint64_t parse_unsigned(const std::string& key, const std::string& v) {
  errno = 0;
  char* end = nullptr;
  if (!v.empty() && v[0] == '-') throw ConfigError("'" + key + "' must be non-negative");
  const unsigned long long i = std::strtoull(v.c_str(), &end, 10);
  if (v.empty() || end != v.c_str() + v.size() || errno == ERANGE)
    throw ConfigError("bad integer for '" + key + "': '" + v + "'");
  return i;
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void ScenarioConfig::validate() const {
  auto need = [](bool ok, const char* what) {
    if (!ok) throw ConfigError(std::string("config value out of range: ") + what);
  };
  auto positive_list = [](const std::vector<double>& l) {
    if (l.empty()) return false;
    for (double v : l)
      if (!(v > 0.0)) return false;
    return true;
  };
  need(model_dimension >= 2 && model_dimension <= 32, "model_dimension in [2, 32]");
  need(model_a_block >= 1 && model_a_block <= model_dimension - 1, "model_a_block in [1, n-1]");
  need(period_time > 0.0, "period_time > 0");
  need(epsilon_chart > 0.0, "epsilon_chart > 0");
  need(epsilon_tube > 0.0 && epsilon_tube < epsilon_chart && epsilon_tube < 1.0, "0 < epsilon_tube < epsilon_chart");
  need(epsilon_large > 0.0 && epsilon_large < epsilon_chart, "0 < epsilon_large < epsilon_chart");
  need(positive_list(epsilon_sweep), "epsilon_sweep positive");
  need(positive_list(epsilon_estimates), "epsilon_estimates positive");
  need(positive_list(epsilon_transversal), "epsilon_transversal positive");
  for (double e : epsilon_sweep) need(e < epsilon_chart, "epsilon_sweep below epsilon_chart");
  for (double e : epsilon_estimates) need(e < epsilon_chart, "epsilon_estimates below epsilon_chart");
  for (double e : epsilon_transversal) need(e < epsilon_chart, "epsilon_transversal below epsilon_chart");
  need(tau_ramp >= 0.0 && tau_ramp <= 0.25, "tau_ramp in [0, 1/4]");
  for (double t : tau_list) need(t >= 0.0 && t <= 0.25, "tau_list entries in [0, 1/4]");
  need(!tau_list.empty(), "tau_list non-empty");
  need(delta_slack >= 0.0, "delta_slack >= 0");
  need(deformation_amplitude >= 0.0, "deformation_amplitude >= 0");
  need(!cone_opening_grid.empty(), "cone_opening_grid non-empty");
  for (double c : cone_opening_grid) need(c > 1.0 && c < 2.0, "cone_opening_grid in (1, 2)");
  need(cone_opening > 1.0 && cone_opening < 2.0, "cone_opening in (1, 2)");
  need(theta_transversal > 0.0 && theta_transversal < 1.0, "theta_transversal in (0, 1)");
  need(tolerance_integration > 0.0 && tolerance_integration < 1e-3, "tolerance_integration in (0, 1e-3)");
  need(t_end_time > 0.0, "t_end_time > 0");
  need(monotone_time > 0.0, "monotone_time > 0");
  need(window_time > 0.0, "window_time > 0");
  need(outside_arc_time >= window_time, "outside_arc_time >= window_time");
  need(reorthonormalize_time > 0.0, "reorthonormalize_time > 0");
  need(lyapunov_time > window_time, "lyapunov_time > window_time");
  need(difference_step_time > 0.0 && difference_step_time < 0.1, "difference_step_time in (0, 0.1)");
  need(product_alpha > 0.0 && product_alpha < 1.0, "product_alpha in (0, 1)");
  need(axis_samples >= 1, "axis_samples >= 1");
  need(boundary_samples >= 1, "boundary_samples >= 1");
  need(oracle_samples >= 1, "oracle_samples >= 1");
  need(orbit_count >= 2, "orbit_count >= 2");
  need(orbit_boundary_samples >= 1, "orbit_boundary_samples >= 1");
  need(rate_samples >= 1, "rate_samples >= 1");
  need(grid_count >= 1000, "grid_count >= 1000");
}

ScenarioConfig parse_config(const std::string& text) {
  ScenarioConfig c;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    const Entry* entry = nullptr;
    for (const Entry& e : entries())
      if (key == e.key) entry = &e;
    if (entry == nullptr) throw ConfigError("unknown config key '" + key + "'");
    std::visit(
        [&](auto member) {
          using T = std::remove_cvref_t<decltype(c.*member)>;
          if constexpr (std::is_same_v<T, int>) {
            const long long i = parse_integer(key, val);
            if (i < -2147483647LL || i > 2147483647LL) throw ConfigError("'" + key + "' out of range");
            c.*member = static_cast<int>(i);
          } else if constexpr (std::is_same_v<T, double>) {
            c.*member = parse_double(key, val);
          } else if constexpr (std::is_same_v<T, std::uint64_t>) {
            c.*member = parse_unsigned(key, val);
          } else {
            std::vector<double> list;
            std::istringstream items(val);
            std::string item;
            while (std::getline(items, item, ',')) list.push_back(parse_double(key, trim(item)));
            c.*member = list;
          }
        },
        entry->field);
  }
  c.validate();
  return c;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str());
}

std::vector<std::pair<std::string, std::string>> config_entries(const ScenarioConfig& c) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const Entry& e : entries()) {
    std::string v;
    std::visit(
        [&](auto member) {
          using T = std::remove_cvref_t<decltype(c.*member)>;
          if constexpr (std::is_same_v<T, int> || std::is_same_v<T, std::uint64_t>) {
            v = std::to_string(c.*member);
          } else if constexpr (std::is_same_v<T, double>) {
            v = format_double(c.*member);
          } else {
            for (std::size_t i = 0; i < (c.*member).size(); ++i) {
              if (i) v += ",";
              v += format_double((c.*member)[i]);
            }
          }
        },
        e.field);
    out.emplace_back(e.key, v);
  }
  return out;
}

std::string serialize_config(const ScenarioConfig& c) {
  std::string s;
  for (const auto& [k, v] : config_entries(c)) s += k + " = " + v + "\n";
  return s;
}

}  // namespace geoflow
