#pragma once

#include <functional>

namespace specrank {

/// Worker count: SPECRANK_THREADS if set, otherwise hardware concurrency.
int default_thread_count();

/// Runs fn(i) for i in [0, count). fn must only write to state owned by
/// index i; under that contract results do not depend on scheduling, so
/// output stays deterministic for any thread count.
void parallel_for(long count, const std::function<void(long)>& fn,
                  int threads = 0);

}  // namespace specrank
