#pragma once

#include <cstddef>
#include <functional>

namespace gcir {

// Worker count: hardware concurrency, capped by GCIR_THREADS when set.
std::size_t worker_count();

// Calls body(i) for every i in [0, n), split into contiguous chunks across
// worker_count() threads. Callers write results into per-index slots, so
// output never depends on scheduling.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace gcir
