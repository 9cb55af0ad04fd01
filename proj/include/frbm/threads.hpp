#pragma once

#include <cstdint>
#include <functional>

namespace frbm {

/// Global worker-thread cap shared by every parallel section.
int thread_cap();

/// Sets the cap; values below 1 are clamped to 1.
void set_thread_cap(int n);

/// Runs fn(block) for every block in [0, n_blocks), spreading blocks over at
/// most thread_cap() workers. The block decomposition is chosen by the caller
/// and does not depend on the cap, so callers that merge per-block results in
/// block order get identical output for any thread count.
void parallel_blocks(std::int64_t n_blocks, const std::function<void(std::int64_t)>& fn);

}  // namespace frbm
