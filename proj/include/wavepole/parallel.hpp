#pragma once

#include <atomic>
#include <cstdlib>
#include <thread>
#include <vector>

namespace wavepole {

// Parallelism cap: WAVEPOLE_THREADS if set, else the hardware count.
inline unsigned max_threads() {
  unsigned hw = std::thread::hardware_concurrency();
  if (hw == 0) hw = 1;
  if (const char* env = std::getenv("WAVEPOLE_THREADS")) {
    const long req = std::atol(env);
    if (req >= 1) return std::min(hw, static_cast<unsigned>(req));
  }
  return hw;
}

// Index-parallel loop over [0, n). Work items write to disjoint slots, so the
// result is deterministic regardless of the thread count.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn) {
  const unsigned workers = std::min<std::size_t>(max_threads(), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned t = 0; t < workers; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

} // namespace wavepole
