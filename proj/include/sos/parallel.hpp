#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace sos {

// Work is split into fixed-size blocks regardless of worker count, and
// per-block results are combined in block order. Together with per-particle
// random streams this makes every parallel result identical to the serial one.
inline constexpr std::size_t kParallelBlock = 8192;

// Calls fn(begin, end) for each block [begin, end) of [0, n). Blocks may run
// on any worker; fn must only write to disjoint per-index state.
template <class Fn>
void parallel_for_blocks(std::size_t n, int workers, Fn&& fn) {
  if (n == 0) return;
  const std::size_t nblocks = (n + kParallelBlock - 1) / kParallelBlock;
  if (workers <= 1 || nblocks == 1) {
    for (std::size_t b = 0; b < nblocks; ++b) {
      const std::size_t lo = b * kParallelBlock;
      const std::size_t hi = std::min(n, lo + kParallelBlock);
      fn(lo, hi);
    }
    return;
  }
  const std::size_t nthreads =
      std::min<std::size_t>(static_cast<std::size_t>(workers), nblocks);
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr eptr;
  std::mutex eptr_mu;
  std::vector<std::thread> pool;
  pool.reserve(nthreads);
  for (std::size_t w = 0; w < nthreads; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t b = next.fetch_add(1);
        if (b >= nblocks || failed.load(std::memory_order_relaxed)) return;
        const std::size_t lo = b * kParallelBlock;
        const std::size_t hi = std::min(n, lo + kParallelBlock);
        try {
          fn(lo, hi);
        } catch (...) {
          std::lock_guard<std::mutex> lk(eptr_mu);
          if (!eptr) eptr = std::current_exception();
          failed.store(true, std::memory_order_relaxed);
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (eptr) std::rethrow_exception(eptr);
}

// Reduction with a deterministic combine order: block_fn(begin, end) -> T is
// evaluated per block, then results are folded left-to-right by block index.
template <class T, class BlockFn, class Combine>
T parallel_reduce_blocks(std::size_t n, int workers, T init, BlockFn&& block_fn,
                         Combine&& combine) {
  if (n == 0) return init;
  const std::size_t nblocks = (n + kParallelBlock - 1) / kParallelBlock;
  std::vector<T> partial(nblocks, init);
  parallel_for_blocks(n, workers, [&](std::size_t lo, std::size_t hi) {
    partial[lo / kParallelBlock] = block_fn(lo, hi);
  });
  T acc = init;
  for (const T& p : partial) acc = combine(acc, p);
  return acc;
}

}  // namespace sos
