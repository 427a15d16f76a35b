#pragma once

#include <algorithm>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace flock {

// Runs fn(i) for i in [0, n) across up to num_threads workers.
// Work is split into contiguous index blocks; callers get determinism by
// writing results into pre-sized slots indexed by i.
inline void parallel_for(int n, int num_threads, const std::function<void(int)>& fn) {
  num_threads = std::max(1, std::min(num_threads, n));
  if (num_threads == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> workers;
  std::vector<std::exception_ptr> errors(num_threads);
  int chunk = (n + num_threads - 1) / num_threads;
  for (int w = 0; w < num_threads; ++w) {
    int begin = w * chunk;
    int end = std::min(n, begin + chunk);
    workers.emplace_back([&, w, begin, end] {
      try {
        for (int i = begin; i < end; ++i) fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : workers) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace flock
