// aarch64 only; NEON is part of the base ISA there.
#include <arm_neon.h>

#include <algorithm>

#include "mbrlab/simd/overlap.hpp"

namespace mbrlab::simd {

// Same block scheme as the AVX2 kernel with 4-key blocks and 4 rotations.
std::uint64_t overlap_neon(SortedCounts a, SortedCounts b) noexcept {
  const std::size_t na = a.keys.size();
  const std::size_t nb = b.keys.size();
  std::size_t i = 0;
  std::size_t j = 0;
  uint64x2_t acc = vdupq_n_u64(0);

  while (i + 4 <= na && j + 4 <= nb) {
    const uint32x4_t ka = vld1q_u32(a.keys.data() + i);
    const uint32x4_t ca = vld1q_u32(a.counts.data() + i);
    uint32x4_t kb = vld1q_u32(b.keys.data() + j);
    uint32x4_t cb = vld1q_u32(b.counts.data() + j);

    uint32x4_t block = vdupq_n_u32(0);
    for (int r = 0; r < 4; ++r) {
      const uint32x4_t eq = vceqq_u32(ka, kb);
      block = vorrq_u32(block, vandq_u32(eq, vminq_u32(ca, cb)));
      kb = vextq_u32(kb, kb, 1);
      cb = vextq_u32(cb, cb, 1);
    }
    acc = vpadalq_u32(acc, block);

    const std::uint32_t a_last = a.keys[i + 3];
    const std::uint32_t b_last = b.keys[j + 3];
    if (a_last <= b_last) i += 4;
    if (b_last <= a_last) j += 4;
  }

  std::uint64_t sum = vaddvq_u64(acc);
  while (i < na && j < nb) {
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

}  // namespace mbrlab::simd
