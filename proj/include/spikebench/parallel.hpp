#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace spikebench {

// Worker count: SPIKEBENCH_THREADS if set and positive, else the hardware
// concurrency.
inline int default_threads() {
  int n = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  if (const char* env = std::getenv("SPIKEBENCH_THREADS")) {
    try {
      const int cap = std::stoi(env);
      if (cap > 0) n = cap;
    } catch (const std::exception&) {
    }
  }
  return n;
}

// A requested worker count, never above SPIKEBENCH_THREADS when that is set.
inline int capped_threads(int requested) {
  if (const char* env = std::getenv("SPIKEBENCH_THREADS")) {
    try {
      const int cap = std::stoi(env);
      if (cap > 0) return std::clamp(requested, 1, cap);
    } catch (const std::exception&) {
    }
  }
  return std::max(1, requested);
}

// Runs fn(i) for i in [0, n) on up to `threads` workers. The first exception
// thrown by any task is rethrown after all workers stop.
template <typename Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn) {
  threads = std::max(1, std::min<int>(threads, static_cast<int>(n)));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  {
    std::vector<std::jthread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int w = 0; w < threads; ++w)
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n && !failed; i = next++) {
          try {
            fn(i);
          } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!error) error = std::current_exception();
            failed = true;
          }
        }
      });
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace spikebench
