#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace traffic {

/// Runs fn(i) for i in [0, n) on up to `workers` threads.
///
/// Work items are claimed via an atomic counter, so the assignment of items
/// to threads is arbitrary; callers must write results keyed by index. The
/// first exception thrown by any item is rethrown on the calling thread.
template <typename Fn>
void parallel_for_index(std::size_t n, unsigned workers, Fn&& fn) {
  if (workers <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto body = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1, std::memory_order_relaxed);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };
  const unsigned count = static_cast<unsigned>(
      std::min<std::size_t>(workers, n));
  std::vector<std::thread> pool;
  pool.reserve(count);
  for (unsigned w = 0; w < count; ++w) pool.emplace_back(body);
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

/// Worker-count default: 0 means "use the hardware concurrency".
inline unsigned resolve_workers(unsigned requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? hw : 1;
}

}  // namespace traffic
