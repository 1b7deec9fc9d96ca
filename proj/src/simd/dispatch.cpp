#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "mbrlab/simd/overlap.hpp"

namespace mbrlab::simd {

namespace {

// -1 = automatic
std::atomic<int> g_forced{-1};

bool cpu_has_avx2() noexcept {
#if defined(MBRLAB_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

Isa detect() noexcept {
  if (const char* env = std::getenv("MBRLAB_ISA")) {
    if (const auto isa = parse_isa(env); isa && isa_available(*isa)) return *isa;
  }
  if (isa_available(Isa::kAvx2)) return Isa::kAvx2;
  if (isa_available(Isa::kNeon)) return Isa::kNeon;
  return Isa::kScalar;
}

}  // namespace

std::string_view isa_name(Isa isa) noexcept {
  switch (isa) {
    case Isa::kAvx2: return "avx2";
    case Isa::kNeon: return "neon";
    case Isa::kScalar: break;
  }
  return "scalar";
}

std::optional<Isa> parse_isa(std::string_view name) noexcept {
  if (name == "scalar") return Isa::kScalar;
  if (name == "avx2") return Isa::kAvx2;
  if (name == "neon") return Isa::kNeon;
  return std::nullopt;
}

bool isa_available(Isa isa) noexcept {
  switch (isa) {
    case Isa::kScalar: return true;
    case Isa::kAvx2: return cpu_has_avx2();
    case Isa::kNeon:
#if defined(MBRLAB_HAVE_NEON)
      return true;
#else
      return false;
#endif
  }
  return false;
}

Isa active_isa() noexcept {
  static const Isa detected = detect();
  const int forced = g_forced.load(std::memory_order_relaxed);
  return forced < 0 ? detected : static_cast<Isa>(forced);
}

void force_isa(std::optional<Isa> isa) {
  if (!isa) {
    g_forced.store(-1);
    return;
  }
  if (!isa_available(*isa)) {
    throw std::invalid_argument("ISA not available on this machine: " + std::string(isa_name(*isa)));
  }
  g_forced.store(static_cast<int>(*isa));
}

OverlapFn overlap_kernel(Isa isa) noexcept {
  switch (isa) {
#if defined(MBRLAB_HAVE_AVX2)
    case Isa::kAvx2: return &overlap_avx2;
#endif
#if defined(MBRLAB_HAVE_NEON)
    case Isa::kNeon: return &overlap_neon;
#endif
    default: break;
  }
  return &overlap_scalar;
}

}  // namespace mbrlab::simd
