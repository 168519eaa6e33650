#pragma once

#include <cstddef>
#include <thread>
#include <vector>

namespace voronn {

inline int default_workers() {
  const unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

// Static partition of [0, count) over `workers` threads. Each index is
// processed exactly once by a pure function of the index, so results are
// identical for any worker count; reductions happen afterwards in index
// order.
template <typename Fn>
void parallel_for(std::size_t count, int workers, Fn&& fn) {
  if (workers <= 1 || count < 2) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  const std::size_t w = static_cast<std::size_t>(workers);
  std::vector<std::thread> threads;
  threads.reserve(w);
  for (std::size_t t = 0; t < w; ++t) {
    threads.emplace_back([t, w, count, &fn] {
      for (std::size_t i = t; i < count; i += w) fn(i);
    });
  }
  for (auto& th : threads) th.join();
}

}  // namespace voronn
