#pragma once

#include <algorithm>
#include <thread>
#include <vector>

namespace dynstereo {

/// Runs fn(i) for i in [begin, end) on up to `workers` threads using contiguous chunks.
/// fn must only write state owned by index i; results are then independent of `workers`.
template <typename Fn>
void parallel_for(int begin, int end, int workers, Fn&& fn) {
  const int n = end - begin;
  if (n <= 0) return;
  workers = std::clamp(workers, 1, n);
  if (workers == 1) {
    for (int i = begin; i < end; ++i) fn(i);
    return;
  }
  std::vector<std::jthread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    const int lo = begin + static_cast<int>(static_cast<long long>(n) * w / workers);
    const int hi = begin + static_cast<int>(static_cast<long long>(n) * (w + 1) / workers);
    pool.emplace_back([lo, hi, &fn] {
      for (int i = lo; i < hi; ++i) fn(i);
    });
  }
}

}  // namespace dynstereo
