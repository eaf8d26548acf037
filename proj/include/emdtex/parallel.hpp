#pragma once

#include <cstddef>
#include <functional>

namespace emdtex {

// Runs fn(0..n-1) on up to `jobs` threads. Each index is handled exactly once;
// callers write results by index so output order never depends on scheduling.
// The first exception thrown by any task is rethrown after all threads join.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn);

}  // namespace emdtex
