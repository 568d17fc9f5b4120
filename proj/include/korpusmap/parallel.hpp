#pragma once

#include <cstddef>
#include <functional>

namespace korpusmap {

/// Number of worker threads used by parallel loops. Defaults to the hardware
/// concurrency, capped by the KORPUSMAP_THREADS environment variable.
std::size_t worker_count();

/// Overrides worker_count() for the current process; 0 restores the default.
void set_worker_count(std::size_t n);

/// Runs body(begin, end) over contiguous blocks of [0, n). Each index is
/// visited exactly once; callers must only write to per-index slots so that
/// results do not depend on the number of workers.
void parallel_for_blocks(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace korpusmap
