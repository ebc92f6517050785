#pragma once

#include <cstddef>
#include <thread>
#include <vector>

namespace msts {

/// Run fn(i) for i in [0, n) on up to `jobs` threads.
///
/// Indices are dealt round-robin (thread t handles i = t, t + jobs, ...) so
/// uneven per-index cost, e.g. shrinking triangle rows, stays balanced.
/// Each index is processed exactly once and writes only its own outputs, so
/// results are identical for any job count.
template <typename Fn>
void parallel_for(std::size_t n, unsigned jobs, Fn&& fn) {
  if (jobs <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  const unsigned workers = static_cast<unsigned>(
      std::min<std::size_t>(jobs, n));
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned t = 0; t < workers; ++t) {
    pool.emplace_back([t, n, workers, &fn] {
      for (std::size_t i = t; i < n; i += workers) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

} // namespace msts
