#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace aitsahalia {

// Items are grouped into fixed-size blocks; each block is processed
// sequentially by one worker and the per-block results come back in block
// order. The block size does not depend on the worker count, so any reduction
// over the returned vector is bitwise independent of it.
inline constexpr long kPathBlock = 32;

inline int resolve_workers(int requested) {
  if (requested > 0) return requested;
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

template <typename Result, typename Fn>
std::vector<Result> for_each_block(long n_items, int workers, Fn&& fn, long block = kPathBlock) {
  const long n_blocks = n_items <= 0 ? 0 : (n_items + block - 1) / block;
  std::vector<Result> results(static_cast<std::size_t>(n_blocks));
  std::atomic<long> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto work = [&] {
    for (;;) {
      const long b = next.fetch_add(1);
      if (b >= n_blocks) return;
      try {
        results[static_cast<std::size_t>(b)] = fn(b * block, std::min(n_items, (b + 1) * block));
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(n_blocks);
      }
    }
  };

  const int n_threads = static_cast<int>(std::min<long>(resolve_workers(workers), std::max(1L, n_blocks)));
  if (n_threads <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(n_threads));
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);
  return results;
}

}  // namespace aitsahalia
