#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace geoflow {

// Flat key = value configuration. Units are part of the key names.
struct ScenarioConfig {
  int model_dimension = 4;
  int model_a_block = 1;
  double period_time = 6.283185307179586;
  double epsilon_chart = 0.5;
  double epsilon_tube = 0.02;
  double epsilon_large = 0.2;
  std::vector<double> epsilon_sweep{0.04, 0.02, 0.01};
  std::vector<double> epsilon_estimates{0.2, 0.1, 0.05};
  std::vector<double> epsilon_transversal{0.1, 0.05, 0.02};
  double tau_ramp = 0.05;
  std::vector<double> tau_list{0.0, 0.01, 0.05};
  double delta_slack = 0.1;
  double deformation_amplitude = 0.25;
  std::vector<double> cone_opening_grid{1.1, 1.3, 1.5, 1.7, 1.9};
  double cone_opening = 1.5;
  double theta_transversal = 0.5;
  double tolerance_integration = 1e-10;
  double t_end_time = 10.0;
  double monotone_time = 5.0;
  double window_time = 2.0;
  double outside_arc_time = 2.0;
  double reorthonormalize_time = 0.5;
  double lyapunov_time = 100.0;
  double difference_step_time = 1e-3;
  double product_alpha = 0.6;
  int axis_samples = 64;
  int boundary_samples = 200;
  int oracle_samples = 1000;
  int orbit_count = 50;
  int orbit_boundary_samples = 16;
  int rate_samples = 100;
  int grid_count = 10000;
  std::uint64_t seed = 1;

  bool operator==(const ScenarioConfig&) const = default;

  // Throws ConfigError when a value is out of range.
  void validate() const;
};

// Throws ConfigError on unknown keys, malformed values or out-of-range values.
ScenarioConfig parse_config(const std::string& text);
ScenarioConfig load_config(const std::string& path);
std::string serialize_config(const ScenarioConfig& c);
// (key, value) pairs in serialization order.
std::vector<std::pair<std::string, std::string>> config_entries(const ScenarioConfig& c);

// %.17g
std::string format_double(double v);

}  // namespace geoflow
