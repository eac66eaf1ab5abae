#pragma once

#include <cstddef>
#include <functional>

namespace potx {

// Worker count: POTX_THREADS if set and positive, otherwise the hardware
// concurrency (at least 1).
std::size_t thread_count();

// Calls fn(i) for every i in [0, n) on up to thread_count() threads.
// Work items must not depend on execution order. The first exception
// thrown by any item is rethrown after all workers have joined.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace potx
