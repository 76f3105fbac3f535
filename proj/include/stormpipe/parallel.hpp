#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace stormpipe {

/// Splits [0, n) into `threads` contiguous chunks and runs fn(chunk, begin, end)
/// on each. Chunk boundaries depend only on (n, threads), so callers that
/// concatenate per-chunk results in chunk order get thread-count-invariant output
/// as long as the per-item work is itself deterministic.
template <typename Fn>
void parallel_chunks(std::size_t n, unsigned threads, Fn&& fn) {
  threads = std::max(1u, threads);
  const std::size_t chunks = std::min<std::size_t>(threads, std::max<std::size_t>(n, 1));
  if (chunks == 1) {
    fn(std::size_t{0}, std::size_t{0}, n);
    return;
  }
  std::vector<std::exception_ptr> errors(chunks);
  {
    std::vector<std::jthread> pool;
    pool.reserve(chunks);
    for (std::size_t c = 0; c < chunks; ++c) {
      const std::size_t begin = n * c / chunks;
      const std::size_t end = n * (c + 1) / chunks;
      pool.emplace_back([&, c, begin, end] {
        try {
          fn(c, begin, end);
        } catch (...) {
          errors[c] = std::current_exception();
        }
      });
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

/// Runs fn over [0, n) in chunks and concatenates the per-chunk vectors in order.
template <typename T, typename Fn>
std::vector<T> parallel_collect(std::size_t n, unsigned threads, Fn&& fn) {
  const std::size_t chunks = std::min<std::size_t>(std::max(1u, threads), std::max<std::size_t>(n, 1));
  std::vector<std::vector<T>> parts(chunks);
  parallel_chunks(n, threads, [&](std::size_t c, std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) fn(i, parts[c]);
  });
  std::vector<T> out;
  std::size_t total = 0;
  for (auto& p : parts) total += p.size();
  out.reserve(total);
  for (auto& p : parts) out.insert(out.end(), std::make_move_iterator(p.begin()), std::make_move_iterator(p.end()));
  return out;
}

}  // namespace stormpipe
