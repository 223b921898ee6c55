#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace mfsde {

/// Thread count is a throughput knob only; results never depend on it.
struct Exec {
  unsigned threads = 1;
};

/**
 * Calls fn(i) for i in [0, count) on up to exec.threads threads using a
 * static contiguous partition. Callers write into disjoint slots and reduce
 * afterwards in index order. The first exception thrown by any worker is
 * rethrown on the calling thread.
 */
template <typename Fn>
void parallel_for(const Exec& exec, std::size_t count, Fn&& fn) {
  const std::size_t workers = std::min<std::size_t>(std::max(1u, exec.threads), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t begin = count * w / workers;
    const std::size_t end = count * (w + 1) / workers;
    pool.emplace_back([&, w, begin, end] {
      try {
        for (std::size_t i = begin; i < end; ++i) fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace mfsde
