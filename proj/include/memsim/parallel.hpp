#pragma once

#include <cstddef>
#include <functional>

namespace memsim {

// Worker count: MEMS_SIM_THREADS if set, else hardware concurrency.
int worker_count();

// Runs fn(i) for i in [0,n) on up to worker_count() threads. Exceptions are
// captured and the first one rethrown after all workers join.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace memsim
