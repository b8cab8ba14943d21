#pragma once

#include <functional>

#include "gglr/types.hpp"

namespace gglr {

/// Worker count: GGLR_THREADS when set to a positive integer, otherwise the
/// hardware concurrency (at least 1).
int thread_count();

/// Splits [0, n) into `chunks` contiguous ranges and runs `body(chunk, begin,
/// end)` for each, on up to thread_count() threads. The partition depends
/// only on n and chunks, so per-chunk results reduced in chunk order are
/// independent of the thread count.
void parallel_chunks(Index n, Index chunks,
                     const std::function<void(Index, Index, Index)>& body);

}  // namespace gglr
