#pragma once

#include <algorithm>
#include <exception>
#include <mutex>
#include <thread>
#include <utility>
#include <vector>

namespace ptycho {

// Worker count: hardware concurrency, lowered by PTYSOLVE_THREADS when set.
int thread_cap();

namespace detail {

template <typename F>
void run_strided(int n, int k, F& body) {
  std::vector<std::thread> workers;
  workers.reserve(std::size_t(k));
  std::exception_ptr first_error;
  std::mutex error_mutex;
  for (int t = 0; t < k; ++t) {
    workers.emplace_back([&, t] {
      try {
        for (int i = t; i < n; i += k) body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (auto& w : workers) w.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace detail

// body(i) for i in [0, n). Work item i always receives the same index
// regardless of thread count, so per-index seeding stays deterministic.
template <typename F>
void parallel_for(int n, F&& body) {
  if (n <= 0) return;
  int k = std::min(n, thread_cap());
  if (k <= 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  detail::run_strided(n, k, body);
}

}  // namespace ptycho
