#pragma once

#include <cstddef>
#include <functional>

namespace dpca {

/// Worker cap: DPCA_THREADS if set to a positive integer, otherwise the
/// hardware concurrency (at least 1).
int thread_count();

/// Runs fn(i) for i in [0, n) on up to thread_count() threads. Iterations must
/// be independent; the exception from the lowest failing index is rethrown
/// after all workers finish.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace dpca
