#pragma once

#include <cstddef>
#include <functional>

namespace lingua_adapt {

/// Worker count: LINGUA_ADAPT_THREADS if set to a positive integer,
/// otherwise std::thread::hardware_concurrency() (at least 1).
std::size_t thread_count();

/// Runs body(begin, end) over contiguous chunks of [0, n). Chunk boundaries
/// depend only on n and the worker count; callers must write results into
/// per-index slots so the outcome is independent of scheduling.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body);

} // namespace lingua_adapt
