#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <functional>
#include <thread>
#include <vector>

namespace gordonse {

/// Runs fn(i) for i in [0, n) on up to `threads` worker threads. Results must
/// be written to per-index slots by the caller; the schedule never affects
/// output ordering. The first exception thrown by any item is rethrown.
inline void parallel_for(std::size_t n, int threads,
                         const std::function<void(std::size_t)>& fn) {
  if (threads < 1) threads = 1;
  if (threads == 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  const std::size_t workers = std::min<std::size_t>(threads, n);
  std::vector<std::thread> pool;
  std::exception_ptr error;
  std::mutex error_mu;
  std::atomic<std::size_t> next{0};
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= n) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mu);
          if (!error) error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace gordonse
