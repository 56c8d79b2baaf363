#pragma once

#include <cstddef>
#include <functional>

namespace cnmc {

/// Worker count used by the node loops. 0 (the default) means "all hardware
/// threads"; the first call to num_threads() also honours CNMC_THREADS.
void set_num_threads(int n);
int num_threads();

/// Runs body(i) for i in [0, n). Each index is handled by exactly one worker
/// and results are written to per-index slots by the caller, so the outcome is
/// independent of the thread count. The first exception thrown is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace cnmc
