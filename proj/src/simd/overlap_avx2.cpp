// Compiled with -mavx2; only reached after a runtime CPU check.
#include <immintrin.h>

#include <algorithm>

#include "mbrlab/simd/overlap.hpp"

namespace mbrlab::simd {

namespace {

std::uint64_t tail_merge(SortedCounts a, std::size_t i, SortedCounts b, std::size_t j) noexcept {
  std::uint64_t sum = 0;
  while (i < a.keys.size() && j < b.keys.size()) {
    if (a.keys[i] < b.keys[j]) {
      ++i;
    } else if (b.keys[j] < a.keys[i]) {
      ++j;
    } else {
      sum += std::min(a.counts[i], b.counts[j]);
      ++i;
      ++j;
    }
  }
  return sum;
}

}  // namespace

// Block intersection: an 8-key block of `a` is compared against all eight
// rotations of an 8-key block of `b`. Keys are unique within each side, so a
// matching pair lights up in exactly one rotation. The block with the smaller
// last key is retired (both on a tie); each element pair meets at most once.
std::uint64_t overlap_avx2(SortedCounts a, SortedCounts b) noexcept {
  const std::size_t na = a.keys.size();
  const std::size_t nb = b.keys.size();
  std::size_t i = 0;
  std::size_t j = 0;

  const __m256i rot1 = _mm256_setr_epi32(1, 2, 3, 4, 5, 6, 7, 0);
  __m256i acc_lo = _mm256_setzero_si256();
  __m256i acc_hi = _mm256_setzero_si256();

  while (i + 8 <= na && j + 8 <= nb) {
    const __m256i ka = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(a.keys.data() + i));
    const __m256i ca = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(a.counts.data() + i));
    __m256i kb = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(b.keys.data() + j));
    __m256i cb = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(b.counts.data() + j));

    // each lane of `a` matches at most once per block, so 32 bits hold it
    __m256i block = _mm256_setzero_si256();
    for (int r = 0; r < 8; ++r) {
      const __m256i eq = _mm256_cmpeq_epi32(ka, kb);
      const __m256i m = _mm256_min_epu32(ca, cb);
      block = _mm256_or_si256(block, _mm256_and_si256(eq, m));
      kb = _mm256_permutevar8x32_epi32(kb, rot1);
      cb = _mm256_permutevar8x32_epi32(cb, rot1);
    }
    acc_lo = _mm256_add_epi64(acc_lo, _mm256_cvtepu32_epi64(_mm256_castsi256_si128(block)));
    acc_hi = _mm256_add_epi64(acc_hi, _mm256_cvtepu32_epi64(_mm256_extracti128_si256(block, 1)));

    const std::uint32_t a_last = a.keys[i + 7];
    const std::uint32_t b_last = b.keys[j + 7];
    if (a_last <= b_last) i += 8;
    if (b_last <= a_last) j += 8;
  }

  const __m256i s = _mm256_add_epi64(acc_lo, acc_hi);
  alignas(32) std::uint64_t lanes[4];
  _mm256_store_si256(reinterpret_cast<__m256i*>(lanes), s);
  std::uint64_t sum = lanes[0] + lanes[1] + lanes[2] + lanes[3];

  return sum + tail_merge(a, i, b, j);
}

}  // namespace mbrlab::simd
