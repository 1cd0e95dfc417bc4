#pragma once

#include <cstddef>
#include <functional>

namespace hyperpc {

/// Upper bound on worker threads used by the data-parallel loops in this
/// library. 0 selects std::thread::hardware_concurrency().
void set_thread_count(unsigned n);
unsigned thread_count();

/// Calls body(i) for every i in [0, n). Iterations are split into contiguous
/// chunks, one per worker. Callers write per-index results and reduce them
/// afterwards in index order, which keeps every result independent of the
/// thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace hyperpc
