#pragma once

#include <functional>
#include <thread>
#include <vector>

namespace markiter {

// Run body(i) for i in [0, count) on up to `jobs` workers. Work items own
// their output slots, so the schedule never changes results; reductions stay
// with the caller in index order.
inline void parallel_for(long count, int jobs, const std::function<void(long)>& body) {
  if (jobs <= 1 || count <= 1) {
    for (long i = 0; i < count; ++i) body(i);
    return;
  }
  const int workers = static_cast<int>(std::min<long>(jobs, count));
  std::vector<std::thread> pool;
  pool.reserve(static_cast<size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (long i = w; i < count; i += workers) body(i);
    });
  }
  for (auto& t : pool) t.join();
}

inline int default_jobs() {
  const unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : static_cast<int>(n);
}

}  // namespace markiter
