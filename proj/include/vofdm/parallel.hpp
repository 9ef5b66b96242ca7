#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace vofdm {

inline unsigned resolve_threads(unsigned requested) {
  if (requested != 0) return requested;
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1u : hw;
}

// Runs fn(0), ..., fn(n_blocks - 1) on up to `threads` workers.  Each call
// must write only to its own result slot; the caller merges slots in block
// order afterwards, which makes every reduction identical for any thread
// count, including the sequential fallback.
inline void run_blocks(std::size_t n_blocks, unsigned threads,
                       const std::function<void(std::size_t)>& fn) {
  if (threads <= 1 || n_blocks <= 1) {
    for (std::size_t b = 0; b < n_blocks; ++b) fn(b);
    return;
  }
  const std::size_t n_workers =
      std::min<std::size_t>(threads, n_blocks);
  std::atomic<std::size_t> next{0};
  std::mutex err_mu;
  std::exception_ptr err;
  std::vector<std::thread> pool;
  pool.reserve(n_workers);
  for (std::size_t w = 0; w < n_workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        std::size_t b = next.fetch_add(1);
        if (b >= n_blocks) return;
        try {
          fn(b);
        } catch (...) {
          std::lock_guard<std::mutex> lock(err_mu);
          if (!err) err = std::current_exception();
          return;
        }
      }
    });
  }
  for (std::thread& t : pool) t.join();
  if (err) std::rethrow_exception(err);
}

}  // namespace vofdm
