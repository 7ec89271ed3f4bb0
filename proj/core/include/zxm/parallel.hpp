#pragma once

#include <atomic>
#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace zxm {

/// Runs fn(0..n-1) on `workers` threads (work stealing over indices).
/// Callers store results by index, so the outcome is independent of the
/// worker count and scheduling order.
inline void parallel_for(std::size_t n, int workers,
                         const std::function<void(std::size_t)>& fn) {
  if (workers <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  auto body = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      fn(i);
    }
  };
  std::vector<std::thread> pool;
  const int count = std::min<int>(workers, static_cast<int>(n));
  pool.reserve(static_cast<std::size_t>(count));
  for (int w = 0; w < count; ++w) pool.emplace_back(body);
  for (auto& th : pool) th.join();
}

/// Worker count from an explicit request, the ZXM_WORKERS environment
/// variable, or hardware concurrency, in that order.
int default_workers(int requested = 0);

}  // namespace zxm
