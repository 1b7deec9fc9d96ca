#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace mbrlab {

// Versioned generator. Every random decision in the toolkit flows through
// this class; changing any step below requires bumping kName.
//
//   stream seed = splitmix64(seed ^ fnv1a64(stream_label))
//   engine      = std::mt19937_64 (bit-exact across standard libraries)
//   bounded     = rejection sampling on raw 64-bit outputs
class SeededRng {
 public:
  static constexpr std::string_view kName = "mt19937_64/splitmix-fnv1a/reject/v1";

  SeededRng(std::uint64_t seed, std::string_view stream_label);

  std::uint64_t next() { return engine_(); }

  // Uniform integer in [0, bound). bound must be > 0.
  std::uint64_t uniform_below(std::uint64_t bound);

  static std::uint64_t fnv1a64(std::string_view bytes) noexcept;
  static std::uint64_t splitmix64(std::uint64_t x) noexcept;

 private:
  std::mt19937_64 engine_;
};

}  // namespace mbrlab
