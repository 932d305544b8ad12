#pragma once

#include <cstdint>
#include <functional>

namespace advd {

/// Worker-thread cap for data-parallel loops. Resolved once from the
/// ADVDENOISE_THREADS environment variable (falling back to the hardware
/// thread count), clamped to [1, 256].
int worker_threads();

/// Override the cap programmatically (tests).
void set_worker_threads(int n);

/// Runs fn(begin, end) over fixed contiguous chunks of [0, n). Chunk
/// boundaries depend only on n and the thread cap, and every index is
/// processed by exactly one invocation, so results never depend on
/// scheduling. Serial when the cap is 1 or the range is small.
void parallel_for(std::int64_t n,
                  const std::function<void(std::int64_t, std::int64_t)>& fn,
                  std::int64_t grain = 1);

}  // namespace advd
