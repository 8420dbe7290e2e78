#pragma once

#include <atomic>
#include <cstdlib>
#include <thread>
#include <vector>

namespace csbm {

// Worker count: explicit request, else the CSBM_WORKERS environment variable,
// else hardware concurrency.
inline int resolve_workers(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("CSBM_WORKERS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

// Runs fn(i) for i in [0, count) on up to `workers` threads. Results must be
// written to disjoint slots; the output is deterministic because slot i only
// ever holds the result of task i.
template <typename Fn>
void parallel_for(std::int64_t count, int workers, Fn fn) {
  workers = resolve_workers(workers);
  if (workers <= 1 || count <= 1) {
    for (std::int64_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::int64_t> next{0};
  auto worker = [&]() {
    for (;;) {
      const std::int64_t i = next.fetch_add(1);
      if (i >= count) return;
      fn(i);
    }
  };
  std::vector<std::thread> pool;
  const int spawn = static_cast<int>(std::min<std::int64_t>(workers, count));
  pool.reserve(static_cast<std::size_t>(spawn));
  for (int t = 0; t < spawn; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
}

}  // namespace csbm
