#pragma once

#include <cstddef>
#include <functional>
#include <optional>

namespace geoflow {

// Runs fn(i) for i in [0, count) on up to `jobs` threads. Results must be written
// to pre-sized storage indexed by i. The exception of the lowest failing index is rethrown.
void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& fn);

// --jobs value when given, else GEOFLOW_JOBS, else 1.
int resolve_jobs(std::optional<int> requested);

}  // namespace geoflow
