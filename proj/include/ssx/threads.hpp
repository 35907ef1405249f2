#pragma once

#include <cstdint>
#include <functional>

namespace ssx {

// Worker count used by parallel library paths. Initialized from the
// SSX_THREADS environment variable (default 1); the CLI --threads flag
// overrides it via set_num_threads. All parallel paths are written so
// results are identical for every thread count.
int num_threads();
void set_num_threads(int n);

// Splits [0, n) into contiguous chunks and runs fn(begin, end) on each,
// using up to num_threads() workers. Runs inline when a single worker
// suffices. Caller guarantees chunk independence.
void parallel_for(int64_t n,
                  const std::function<void(int64_t, int64_t)>& fn);

}  // namespace ssx
