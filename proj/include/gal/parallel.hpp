#ifndef GAL_PARALLEL_HPP
#define GAL_PARALLEL_HPP

#include <cstddef>
#include <cstdint>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace gal {
namespace par {

// All heavy loops in this project run through the blocked kernels below.
// The range is split into fixed-size blocks; block results are computed
// independently (serially or with OpenMP) and merged in block order. The
// block decomposition does not depend on the thread count, so serial and
// parallel execution produce bit-identical results.

constexpr size_t kDefaultBlock = 8192;

inline size_t num_blocks(size_t n, size_t block) { return (n + block - 1) / block; }

inline bool use_threads() {
#ifdef _OPENMP
  return !omp_in_parallel();
#else
  return false;
#endif
}

// Serial reference implementation, kept for testing and benchmarking.
template <typename BlockFn>
double block_sum_serial(size_t n, BlockFn&& fn, size_t block = kDefaultBlock) {
  const size_t nb = num_blocks(n, block);
  double total = 0.0;
  for (size_t b = 0; b < nb; ++b) {
    const size_t lo = b * block;
    const size_t hi = lo + block < n ? lo + block : n;
    total += fn(lo, hi);
  }
  return total;
}

// OpenMP implementation. `fn(lo, hi)` returns the partial sum of one block;
// partials are stored per block and merged in block order.
template <typename BlockFn>
double block_sum(size_t n, BlockFn&& fn, size_t block = kDefaultBlock) {
  const size_t nb = num_blocks(n, block);
  if (nb <= 1 || !use_threads()) return block_sum_serial(n, fn, block);
  std::vector<double> partial(nb, 0.0);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (long long b = 0; b < static_cast<long long>(nb); ++b) {
    const size_t lo = static_cast<size_t>(b) * block;
    const size_t hi = lo + block < n ? lo + block : n;
    partial[static_cast<size_t>(b)] = fn(lo, hi);
  }
  double total = 0.0;
  for (size_t b = 0; b < nb; ++b) total += partial[b];
  return total;
}

// Per-element transform, independent outputs.
template <typename Fn>
void for_each_serial(size_t n, Fn&& fn) {
  for (size_t i = 0; i < n; ++i) fn(i);
}

template <typename Fn>
void for_each(size_t n, Fn&& fn) {
  if (!use_threads() || n < 2) {
    for_each_serial(n, fn);
    return;
  }
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (long long i = 0; i < static_cast<long long>(n); ++i) fn(static_cast<size_t>(i));
}

// Dynamic-schedule variant for uneven task costs (experiment grid cells,
// optimizer restarts). Each task writes only its own slot.
template <typename Fn>
void for_each_task(size_t n, Fn&& fn) {
  if (!use_threads() || n < 2) {
    for_each_serial(n, fn);
    return;
  }
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 1)
#endif
  for (long long i = 0; i < static_cast<long long>(n); ++i) fn(static_cast<size_t>(i));
}

// Histogram accumulation: integer per-block counts merged in block order,
// so the result is exact and order-independent.
template <typename BinFn>
std::vector<uint64_t> block_histogram_serial(size_t n, size_t bins, BinFn&& bin_of,
                                             size_t block = kDefaultBlock) {
  std::vector<uint64_t> counts(bins, 0);
  for (size_t i = 0; i < n; ++i) {
    size_t b = bin_of(i);
    if (b < bins) ++counts[b];
  }
  return counts;
}

template <typename BinFn>
std::vector<uint64_t> block_histogram(size_t n, size_t bins, BinFn&& bin_of,
                                      size_t block = kDefaultBlock) {
  const size_t nb = num_blocks(n, block);
  if (nb <= 1 || !use_threads()) return block_histogram_serial(n, bins, bin_of, block);
  std::vector<std::vector<uint64_t>> partial(nb);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (long long b = 0; b < static_cast<long long>(nb); ++b) {
    const size_t lo = static_cast<size_t>(b) * block;
    const size_t hi = lo + block < n ? lo + block : n;
    std::vector<uint64_t> local(bins, 0);
    for (size_t i = lo; i < hi; ++i) {
      size_t bin = bin_of(i);
      if (bin < bins) ++local[bin];
    }
    partial[static_cast<size_t>(b)] = std::move(local);
  }
  std::vector<uint64_t> counts(bins, 0);
  for (size_t b = 0; b < nb; ++b)
    for (size_t k = 0; k < bins; ++k) counts[k] += partial[b][k];
  return counts;
}

inline int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

inline void set_threads(int k) {
#ifdef _OPENMP
  if (k > 0) omp_set_num_threads(k);
#else
  (void)k;
#endif
}

}  // namespace par
}  // namespace gal

#endif  // GAL_PARALLEL_HPP
