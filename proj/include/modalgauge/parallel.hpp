#pragma once

// Block-parallel helpers with a reduction order that depends only on the
// input size, never on the worker count: work is cut into fixed-size row
// blocks, each block writes its own partial, and partials are combined by
// a pairwise tree in block order. Results are therefore bitwise identical
// for any thread count.

#include <cstddef>
#include <exception>
#include <mutex>
#include <span>
#include <thread>
#include <vector>

namespace modalgauge::parallel {

inline constexpr std::size_t kBlockRows = 1024;

/// 0 means "all logical cores".
unsigned resolve_threads(unsigned requested) noexcept;

inline std::size_t block_count(std::size_t n, std::size_t block = kBlockRows) noexcept {
  return (n + block - 1) / block;
}

/// Calls fn(block_index, begin, end) for every block of [0, n).
template <typename Fn>
void for_blocks(std::size_t n, unsigned threads, Fn&& fn, std::size_t block = kBlockRows) {
  const std::size_t blocks = block_count(n, block);
  const unsigned workers =
      static_cast<unsigned>(std::min<std::size_t>(resolve_threads(threads), blocks));
  auto run = [&](unsigned worker, std::exception_ptr& error) {
    try {
      for (std::size_t b = worker; b < blocks; b += workers) {
        fn(b, b * block, std::min(n, (b + 1) * block));
      }
    } catch (...) {
      error = std::current_exception();
    }
  };
  if (workers <= 1) {
    std::exception_ptr error;
    run(0, error);
    if (error) std::rethrow_exception(error);
    return;
  }
  std::vector<std::exception_ptr> errors(workers);
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(run, w, std::ref(errors[w]));
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

/// Pairwise (tree) sum; fixed association for a given length.
double pairwise_sum(std::span<const double> values) noexcept;

/// Element-wise pairwise sum of equally sized partial vectors.
std::vector<double> pairwise_sum(const std::vector<std::vector<double>>& parts);

/// Per-block scalar partials reduced in block order.
template <typename Fn>
double block_sum(std::size_t n, unsigned threads, Fn&& fn) {
  std::vector<double> partial(block_count(n));
  for_blocks(n, threads, [&](std::size_t b, std::size_t begin, std::size_t end) {
    partial[b] = fn(begin, end);
  });
  return pairwise_sum(partial);
}

}  // namespace modalgauge::parallel
