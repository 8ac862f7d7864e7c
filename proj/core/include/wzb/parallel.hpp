#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace wzb {

namespace detail {
inline std::atomic<std::size_t> thread_limit{0};
}

/// Caps the worker count of parallel_for; 0 means hardware_concurrency.
inline void set_thread_limit(std::size_t n) { detail::thread_limit = n; }

inline std::size_t worker_count(std::size_t n) {
  const std::size_t limit = detail::thread_limit.load();
  const std::size_t hw = std::max(1u, std::thread::hardware_concurrency());
  return std::min(n, limit == 0 ? hw : limit);
}

/// Runs fn(i) for i in [0, n). Each index must write only its own output slot.
/// If any call throws, the exception of the lowest failing index is rethrown.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn) {
  const std::size_t workers = worker_count(n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::size_t error_index = n;
  std::mutex error_mutex;
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) {
          try {
            fn(i);
          } catch (...) {
            std::lock_guard lock(error_mutex);
            if (i < error_index) {
              error = std::current_exception();
              error_index = i;
            }
          }
        }
      });
    }
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace wzb
