#pragma once

#include <string>
#include <vector>

#include "geoflow/config.hpp"
#include "geoflow/report.hpp"

namespace geoflow {

const std::vector<std::string>& scenario_names();

// Throws UsageError for an unknown scenario name.
ScenarioReport run_scenario(const std::string& name, const ScenarioConfig& config, int jobs = 1);

}  // namespace geoflow
