#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace hamplug {

inline int default_workers() { return std::max(1u, std::thread::hardware_concurrency()); }

/// Evaluates f(i) for i in [0, n) on up to `workers` threads. Results are
/// stored by index, so the output order does not depend on scheduling.
template <class R, class F>
std::vector<R> parallel_map(std::size_t n, int workers, F&& f) {
  std::vector<R> out(n);
  const std::size_t nthreads = std::min<std::size_t>(std::max(1, workers), n);
  if (nthreads <= 1) {
    for (std::size_t i = 0; i < n; ++i) out[i] = f(i);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < nthreads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          out[i] = f(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
  return out;
}

}  // namespace hamplug
