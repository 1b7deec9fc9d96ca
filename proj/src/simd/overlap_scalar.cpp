#include <algorithm>

#include "mbrlab/simd/overlap.hpp"

namespace mbrlab::simd {

std::uint64_t overlap_scalar(SortedCounts a, SortedCounts b) noexcept {
  std::uint64_t sum = 0;
  std::size_t i = 0;
  std::size_t j = 0;
  const std::size_t na = a.keys.size();
  const std::size_t nb = b.keys.size();
  while (i < na && j < nb) {
    const std::uint32_t ka = a.keys[i];
    const std::uint32_t kb = b.keys[j];
    if (ka < kb) {
      ++i;
    } else if (kb < ka) {
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
