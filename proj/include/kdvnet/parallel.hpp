#pragma once

#include <cstddef>
#include <thread>
#include <vector>

namespace kdvnet {

inline int resolve_jobs(int jobs) {
  if (jobs > 0) return jobs;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : int(hw);
}

/// Runs f(i) for i in [0, n). Work is split into contiguous chunks so the
/// caller can collect results into preallocated slots; output ordering is
/// then independent of scheduling.
template <class F>
void parallel_for(std::size_t n, int jobs, F&& f) {
  const int k = resolve_jobs(jobs);
  if (k <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(k);
  const std::size_t chunk = (n + k - 1) / k;
  for (int t = 0; t < k; ++t) {
    const std::size_t lo = t * chunk;
    const std::size_t hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &f] {
      for (std::size_t i = lo; i < hi; ++i) f(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace kdvnet
