#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <thread>
#include <vector>

namespace dsk3dom {

inline unsigned worker_count() {
  unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : n;
}

/// Runs fn(begin, end) over disjoint chunks of [0, n) on worker threads.
/// Chunk boundaries depend only on n and chunk count, never on scheduling,
/// so any per-chunk accumulation stays deterministic.
template <class Fn>
void parallel_chunks(std::size_t n, std::size_t num_chunks, Fn&& fn) {
  if (n == 0) return;
  num_chunks = std::max<std::size_t>(1, std::min(num_chunks, n));
  if (num_chunks == 1) {
    fn(std::size_t{0}, n, std::size_t{0});
    return;
  }
  const std::size_t per = (n + num_chunks - 1) / num_chunks;
  std::vector<std::thread> pool;
  const unsigned workers = std::min<std::size_t>(worker_count(), num_chunks);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (;;) {
      const std::size_t c = next.fetch_add(1);
      if (c >= num_chunks) return;
      const std::size_t lo = c * per;
      const std::size_t hi = std::min(n, lo + per);
      if (lo < hi) fn(lo, hi, c);
    }
  };
  pool.reserve(workers - 1);
  for (unsigned t = 1; t < workers; ++t) pool.emplace_back(work);
  work();
  for (auto& th : pool) th.join();
}

/// Data-parallel loop over [0, n); fn(i) must only write state owned by i.
template <class Fn>
void parallel_for(std::size_t n, Fn&& fn) {
  parallel_chunks(n, worker_count() * 4, [&](std::size_t lo, std::size_t hi, std::size_t) {
    for (std::size_t i = lo; i < hi; ++i) fn(i);
  });
}

}  // namespace dsk3dom
