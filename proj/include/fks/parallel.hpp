#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

#include "fks/paths.hpp"

namespace fks {

/// 0 means "one per hardware thread".
inline unsigned resolve_threads(unsigned requested) {
  if (requested != 0) return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Calls fn(i) for i in [0, count) on up to `threads` workers.
///
/// Work is handed out through a shared counter, so callers must write
/// results into per-index slots; any reduction happens afterwards in index
/// order. The exception from the lowest failing index is rethrown.
template <class Fn>
void parallel_for(Index count, unsigned threads, Fn&& fn) {
  const unsigned workers =
      static_cast<unsigned>(std::min<Index>(resolve_threads(threads), std::max<Index>(count, 1)));
  if (workers <= 1) {
    for (Index i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<Index> next{0};
  std::mutex error_mutex;
  Index error_index = count;
  std::exception_ptr error;
  auto body = [&] {
    for (Index i = next++; i < count; i = next++) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (i < error_index) {
          error_index = i;
          error = std::current_exception();
        }
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned t = 0; t < workers; ++t) pool.emplace_back(body);
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace fks
