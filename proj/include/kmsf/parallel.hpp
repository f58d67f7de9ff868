#pragma once

#include <cstddef>
#include <functional>

namespace kmsf {

// Worker count: KMSF_THREADS if set (>= 1), otherwise hardware concurrency.
unsigned thread_count();

// Runs body(i) for i in [0, n). Each index is processed by exactly one worker;
// callers write results into per-index slots so the outcome is independent of
// scheduling.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

// Pairwise (tree) summation; deterministic for a given input order.
double pairwise_sum(const double* values, std::size_t n);

}  // namespace kmsf
