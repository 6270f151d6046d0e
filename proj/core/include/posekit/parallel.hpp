#pragma once

#include <atomic>
#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace posekit {

/// Worker count: min(hardware, POSEKIT_THREADS when set). At least 1.
int thread_count_from_env();

/// Runs fn(i) for i in [0, count) on up to `threads` workers. Work items are
/// pulled from a shared counter, so callers must write results into
/// index-addressed slots to stay order-independent. Exceptions are captured
/// and the first one rethrown after all workers join.
void parallel_for(size_t count, int threads, const std::function<void(size_t)>& fn);

}  // namespace posekit
