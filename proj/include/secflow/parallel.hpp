#pragma once

#include <functional>

namespace secflow {

/// Index-parallel loop with deterministic semantics: results must be stored
/// by index by the callee; the first exception in index order is rethrown.
void parallel_for(int n, int jobs, const std::function<void(int)>& fn);

}  // namespace secflow
