#pragma once

#include <cstddef>
#include <functional>

namespace parametrix {

// Worker count: explicit value if positive, else PARAMETRIX_THREADS, else
// the hardware concurrency.
int resolve_threads(int requested = 0);

// Calls fn(i) for i in [0, n) on up to `threads` workers. Each index is
// handled exactly once and callers write results into per-index slots, so
// the outcome never depends on the worker count or on scheduling. The first
// exception thrown by any task is rethrown after all workers stop.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);

}  // namespace parametrix
