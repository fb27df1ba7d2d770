#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace xbound {

inline unsigned default_workers() { return std::max(1u, std::thread::hardware_concurrency()); }

namespace detail {

// out[i] = fn(i) for i < n. Each slot is written by exactly one worker, so the
// result does not depend on the worker count. The first exception (by index)
// is rethrown after all workers finish.
template <class T, class Fn>
std::vector<T> parallel_map(std::size_t n, unsigned workers, Fn fn) {
  std::vector<T> out(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        out[i] = fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const unsigned count = static_cast<unsigned>(std::min<std::size_t>(std::max(1u, workers), n));
  if (count <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned k = 0; k < count; ++k) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

}  // namespace detail
}  // namespace xbound
