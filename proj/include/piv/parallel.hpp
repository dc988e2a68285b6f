#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace piv::threads {

namespace detail {
inline std::atomic<int> g_max_threads{1};
}

inline int max_threads() { return detail::g_max_threads.load(std::memory_order_relaxed); }

inline void set_max_threads(int n) {
  detail::g_max_threads.store(n < 1 ? 1 : n, std::memory_order_relaxed);
}

inline int hardware_threads() {
  const unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : static_cast<int>(n);
}

}  // namespace piv::threads

namespace piv {

/// Runs fn(i) for i in [begin, end) on up to threads::max_threads() workers.
///
/// Work is split into contiguous chunks. fn(i) must compute the same result
/// no matter which worker runs it, so outputs are identical at any thread
/// count; reductions must be folded by the caller in index order.
template <typename Fn>
void parallel_for(int begin, int end, Fn&& fn) {
  const int n = end - begin;
  if (n <= 0) return;
  const int workers = std::min(threads::max_threads(), n);
  if (workers <= 1) {
    for (int i = begin; i < end; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  std::exception_ptr first_error;
  std::mutex error_mutex;
  const int chunk = (n + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    const int lo = begin + w * chunk;
    const int hi = std::min(end, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([&fn, &first_error, &error_mutex, lo, hi] {
      try {
        for (int i = lo; i < hi; ++i) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace piv
