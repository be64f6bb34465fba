#pragma once

#include <algorithm>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace nsch {

/// Worker cap for data-parallel point loops; NSCH_THREADS overrides the
/// hardware count. Partitioning is a fixed contiguous chunking with disjoint
/// writes, so results do not depend on the thread count.
inline int kernel_threads() {
  if (const char* env = std::getenv("NSCH_THREADS")) {
    const int v = std::atoi(env);
    if (v >= 1) return v;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : int(hw);
}

template <typename Fn>
void parallel_for(long n, Fn&& body) {
  const int threads = std::min<long>(kernel_threads(), std::max(1L, n / 1024));
  if (threads <= 1) {
    for (long i = 0; i < n; ++i) body(i);
    return;
  }
  const long chunk = (n + threads - 1) / threads;
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int t = 0; t < threads; ++t) {
    const long lo = t * chunk;
    const long hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([=, &body] {
      for (long i = lo; i < hi; ++i) body(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace nsch
