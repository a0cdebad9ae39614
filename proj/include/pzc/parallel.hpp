#pragma once

#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <thread>
#include <vector>

namespace pzc {

// Worker count: PZC_THREADS env var, else hardware concurrency.
inline int thread_count() {
  if (const char* env = std::getenv("PZC_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

// Number of work chunks handed to parallel_chunks. Fixed, not tied to the
// worker count: per-chunk derived seeds and chunk-merged results must not
// change when the machine does.
constexpr int kParallelChunks = 64;

// Splits [0, n) into kParallelChunks ranges; fn(chunk_index, begin, end).
// Workers pull chunks from a shared queue, so runtime balances while the
// chunk decomposition stays deterministic.
template <class Fn>
void parallel_chunks(std::uint64_t n, Fn&& fn) {
  if (n == 0) return;
  const std::uint64_t per = (n + kParallelChunks - 1) / kParallelChunks;
  const int workers = thread_count();
  if (workers <= 1 || n < 4096) {
    for (int c = 0; c < kParallelChunks; ++c) {
      const std::uint64_t begin = c * per;
      if (begin >= n) break;
      fn(c, begin, std::min(n, begin + per));
    }
    return;
  }
  std::atomic<int> next{0};
  auto worker = [&] {
    for (;;) {
      const int c = next.fetch_add(1);
      if (c >= kParallelChunks) return;
      const std::uint64_t begin = static_cast<std::uint64_t>(c) * per;
      if (begin >= n) return;
      fn(c, begin, std::min(n, begin + per));
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
}

}  // namespace pzc
