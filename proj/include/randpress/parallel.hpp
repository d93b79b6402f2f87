#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace randpress {

/// Worker count from the knob, the RANDPRESS_WORKERS variable, or the core
/// count, in that order.
int resolve_workers(int requested);

/// Runs fn(i) for i in [0, n) on up to `workers` threads. Results must be
/// written to per-index slots; reduction order is left to the caller so it
/// stays deterministic. The first exception is rethrown.
template <typename Fn>
void parallel_for(std::int64_t n, int workers, Fn&& fn) {
  workers = std::max(1, std::min<int>(resolve_workers(workers), static_cast<int>(std::max<std::int64_t>(n, 1))));
  if (workers == 1) {
    for (std::int64_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::int64_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::jthread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::int64_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
          next = n;
        }
      }
    });
  }
  pool.clear();
  if (error) std::rethrow_exception(error);
}

}  // namespace randpress
