#pragma once

#include <cstddef>
#include <functional>

namespace p2ad {

// Thread count used by parallel_for: P2AD_THREADS if set (values < 1 clamp
// to 1), otherwise the hardware concurrency.
int effective_thread_count();

// Runs fn(i) for i in [0, n). Work is split into contiguous index blocks;
// callers must make fn(i) write only to its own output slot so results do
// not depend on the thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace p2ad
