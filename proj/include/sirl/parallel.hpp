#pragma once

#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace sirl {

/// Run fn(i) for i in [0, n) on up to `workers` threads (0 = hardware
/// concurrency). Tasks are strided by index and must not share mutable
/// state; results are then independent of the thread count.
inline void parallel_for(int n, int workers, const std::function<void(int)>& fn) {
  if (n <= 0) return;
  int threads = workers > 0 ? workers : int(std::thread::hardware_concurrency());
  if (threads < 1) threads = 1;
  threads = std::min(threads, n);

  if (threads == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }

  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&, t]() {
      for (int i = t; i < n; i += threads) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace sirl
