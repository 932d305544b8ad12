#include "advd/thread_pool.hpp"

#include <algorithm>
#include <cstdlib>
#include <thread>
#include <vector>

namespace advd {
namespace {

int resolve_threads() {
  if (const char* env = std::getenv("ADVDENOISE_THREADS")) {
    int n = std::atoi(env);
    if (n >= 1) return std::min(n, 256);
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(std::min<unsigned>(hw, 256));
}

int g_threads = resolve_threads();

}  // namespace

int worker_threads() { return g_threads; }

void set_worker_threads(int n) { g_threads = std::clamp(n, 1, 256); }

void parallel_for(std::int64_t n,
                  const std::function<void(std::int64_t, std::int64_t)>& fn,
                  std::int64_t grain) {
  if (n <= 0) return;
  const int threads = worker_threads();
  const std::int64_t max_chunks = (n + grain - 1) / grain;
  const std::int64_t chunks = std::min<std::int64_t>(threads, max_chunks);
  if (chunks <= 1) {
    fn(0, n);
    return;
  }
  const std::int64_t step = (n + chunks - 1) / chunks;
  std::vector<std::thread> workers;
  workers.reserve(static_cast<std::size_t>(chunks - 1));
  for (std::int64_t c = 1; c < chunks; ++c) {
    const std::int64_t b = c * step;
    const std::int64_t e = std::min(n, b + step);
    if (b >= e) break;
    workers.emplace_back([&fn, b, e] { fn(b, e); });
  }
  fn(0, std::min(n, step));
  for (auto& w : workers) w.join();
}

}  // namespace advd
