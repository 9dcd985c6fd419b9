#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace cmm {

/// Number of workers to use when the caller does not say: CMM_THREADS if set,
/// otherwise the hardware concurrency.
int default_thread_count();

/// Runs body(i) for i in [0, n) on up to `threads` workers. Each index runs
/// exactly once; the first exception (lowest index) is rethrown.
template <typename Body>
void parallel_for(std::size_t n, int threads, Body&& body) {
  const auto workers =
      static_cast<std::size_t>(std::clamp<long>(threads, 1, static_cast<long>(std::max<std::size_t>(n, 1))));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) {
          try {
            body(i);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace cmm
