#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace reprbench::detail {

/// Runs fn(begin, end, block_index) over fixed-size blocks of [0, n). Block
/// boundaries do not depend on the worker count, so per-block partial results
/// combined in block order are reproducible on any machine.
template <typename Fn>
void for_blocks(std::size_t n, std::size_t block, Fn &&fn) {
  const std::size_t blocks = (n + block - 1) / block;
  const std::size_t workers = std::min<std::size_t>(
      blocks, std::max(1u, std::thread::hardware_concurrency()));
  auto run = [&](std::size_t worker) {
    for (std::size_t b = worker; b < blocks; b += workers) {
      fn(b * block, std::min(n, (b + 1) * block), b);
    }
  };
  if (workers <= 1) {
    if (blocks > 0) run(0);
    return;
  }
  std::vector<std::jthread> pool;
  pool.reserve(workers - 1);
  for (std::size_t w = 1; w < workers; ++w) {
    pool.emplace_back(run, w);
  }
  run(0);
}

inline std::size_t block_count(std::size_t n, std::size_t block) {
  return (n + block - 1) / block;
}

}  // namespace reprbench::detail
