#pragma once

#include <cstddef>
#include <functional>

namespace whamkit {

// Worker-thread cap. Reads WHAMKIT_THREADS; defaults to 1 when unset or
// invalid so every command is deterministic out of the box.
int worker_threads();

// Runs fn(i) for i in [0, n) over up to worker_threads() threads. Each index
// runs exactly once; callers write results into pre-sized slots so output
// order never depends on scheduling. The first exception is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace whamkit
