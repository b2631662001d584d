#pragma once

#include <cstddef>
#include <functional>

namespace qlspec {

// Worker count: QLSPEC_THREADS if set and positive, else hardware concurrency.
std::size_t thread_count();

// Calls fn(i) for i in [0, n) across worker threads. Each index is visited
// exactly once; the first exception thrown by any worker is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace qlspec
