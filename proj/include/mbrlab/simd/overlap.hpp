#pragma once

// Clipped n-gram overlap kernels.
//
// Every lexical utility cell reduces to, per n-gram order, the sum over common
// n-grams of min(count_hyp, count_ref). N-grams are interned to 32-bit ids and
// stored per string as strictly increasing key arrays with parallel counts, so
// the overlap is a sorted-set intersection with a min-reduction.
//
// overlap_scalar() is the reference; the vector variants must return exactly
// the same integer for every input.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>

namespace mbrlab::simd {

struct SortedCounts {
  std::span<const std::uint32_t> keys;    // strictly increasing
  std::span<const std::uint32_t> counts;  // same length as keys, each >= 1
};

enum class Isa { kScalar, kAvx2, kNeon };

using OverlapFn = std::uint64_t (*)(SortedCounts a, SortedCounts b) noexcept;

std::uint64_t overlap_scalar(SortedCounts a, SortedCounts b) noexcept;
#if defined(MBRLAB_HAVE_AVX2)
std::uint64_t overlap_avx2(SortedCounts a, SortedCounts b) noexcept;
#endif
#if defined(MBRLAB_HAVE_NEON)
std::uint64_t overlap_neon(SortedCounts a, SortedCounts b) noexcept;
#endif

std::string_view isa_name(Isa isa) noexcept;
std::optional<Isa> parse_isa(std::string_view name) noexcept;

// Compiled in and supported by the running CPU.
bool isa_available(Isa isa) noexcept;

// Best available ISA, unless overridden with force_isa() or the MBRLAB_ISA
// environment variable (scalar|avx2|neon).
Isa active_isa() noexcept;

// Overrides dispatch; std::nullopt restores automatic selection. Throws
// std::invalid_argument if the ISA is not available.
void force_isa(std::optional<Isa> isa);

OverlapFn overlap_kernel(Isa isa) noexcept;

inline std::uint64_t overlap(SortedCounts a, SortedCounts b) noexcept {
  return overlap_kernel(active_isa())(a, b);
}

}  // namespace mbrlab::simd
