#pragma once

#include <cstdint>
#include <thread>
#include <vector>

namespace atk {

// Thread count resolution: explicit request wins, else the ATK_THREADS
// environment variable, else 1.
unsigned resolve_thread_count(int requested);

// Runs fn(i) for i in [begin, end) on up to `threads` workers with static
// contiguous chunking. Iterations must be independent; because the split is
// a pure function of (range, threads) and iterations only write their own
// outputs, results are identical for every thread count. threads <= 1 runs
// inline.
template <class Fn>
void parallel_for(std::uint64_t begin, std::uint64_t end, unsigned threads,
                  Fn&& fn) {
  const std::uint64_t total = end > begin ? end - begin : 0;
  if (total == 0) return;
  if (threads <= 1 || total == 1) {
    for (std::uint64_t i = begin; i < end; ++i) fn(i);
    return;
  }
  const std::uint64_t workers =
      std::min<std::uint64_t>(threads, total);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  const std::uint64_t chunk = total / workers;
  const std::uint64_t rem = total % workers;
  std::uint64_t start = begin;
  for (std::uint64_t w = 0; w < workers; ++w) {
    const std::uint64_t len = chunk + (w < rem ? 1 : 0);
    const std::uint64_t stop = start + len;
    pool.emplace_back([start, stop, &fn] {
      for (std::uint64_t i = start; i < stop; ++i) fn(i);
    });
    start = stop;
  }
  for (auto& t : pool) t.join();
}

}  // namespace atk
