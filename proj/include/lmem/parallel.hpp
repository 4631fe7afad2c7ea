#pragma once

#include <cstddef>
#include <functional>

namespace lmem {

/// Worker count used by parallel loops; defaults to 1 and is set by the CLI --jobs flag.
int worker_count();
void set_worker_count(int jobs);

/// Calls body(begin, end) on contiguous chunks of [0, n) using up to worker_count() threads.
/// Chunking is deterministic, so results written to disjoint slots do not depend on scheduling.
void parallel_chunks(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace lmem
