#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace aoc {

/// Runs fn(i) for i in [0, count) on up to `workers` threads. Results must be written
/// to per-index slots by fn; the first exception (lowest index) is rethrown.
template <class Fn>
void parallel_for(std::size_t count, int workers, Fn&& fn) {
  std::size_t nthreads = std::min<std::size_t>(std::max(workers, 1), count);
  if (nthreads <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex mu;
  std::size_t err_index = count;
  std::exception_ptr err;
  auto worker = [&] {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(mu);
        if (i < err_index) {
          err_index = i;
          err = std::current_exception();
        }
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < nthreads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
}

/// Worker count from AOC_WORKERS if set and positive, else `fallback`.
int workers_from_env(int fallback);

}  // namespace aoc
