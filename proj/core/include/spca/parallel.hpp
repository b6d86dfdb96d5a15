#pragma once

#include <cstddef>
#include <functional>

namespace spca {

// Worker count: explicit override if set, else SPCA_THREADS, else hardware concurrency.
int thread_count();
void set_thread_count(int n);

// Runs body(i) for i in [begin, end) on up to thread_count() workers.
// Work is handed out dynamically; callers write results into slot i so the
// outcome does not depend on scheduling. The first exception is rethrown.
void parallel_for(std::size_t begin, std::size_t end, const std::function<void(std::size_t)>& body);

}  // namespace spca
