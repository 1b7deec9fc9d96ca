#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "mbrlab/text.hpp"

namespace mbrlab {

inline constexpr int kBleuOrder = 4;
inline constexpr int kChrfOrder = 6;
inline constexpr double kChrfBeta = 2.0;

struct MetricScore {
  double value = 0.0;
  std::string metric_id;
};

// Sufficient statistics for BLEU. Additive across segments.
struct BleuStats {
  std::array<std::uint64_t, kBleuOrder> matches{};
  std::array<std::uint64_t, kBleuOrder> totals{};
  std::uint64_t hyp_len = 0;
  std::uint64_t ref_len = 0;

  BleuStats& operator+=(const BleuStats& other) noexcept;
  friend bool operator==(const BleuStats&, const BleuStats&) = default;
};

struct ChrfStats {
  std::array<std::uint64_t, kChrfOrder> hyp{};
  std::array<std::uint64_t, kChrfOrder> ref{};
  std::array<std::uint64_t, kChrfOrder> matches{};

  friend bool operator==(const ChrfStats&, const ChrfStats&) = default;
};

BleuStats bleu_stats(const TokenSequence& hyp, const TokenSequence& ref);
ChrfStats chrf_stats(std::string_view hyp, std::string_view ref);

/// Add-one smoothed sentence BLEU on a 0-100 scale. Order 1 is unsmoothed;
/// orders 2..4 use (matches + 1) / (totals + 1). Empty hypotheses score 0.
double sentence_bleu_add1_from_stats(const BleuStats& stats) noexcept;

/// Corpus BLEU with exponential smoothing: each order with zero matches
/// doubles the smoothing divisor and uses 1 / (divisor * totals).
double corpus_bleu_from_stats(const BleuStats& stats) noexcept;

/// chrF (beta 2): precision and recall averaged over orders where both sides
/// have n-grams. Two empty strings score 100.
double chrf_from_stats(const ChrfStats& stats) noexcept;

MetricScore sentence_bleu_add1(const TokenSequence& hyp, const TokenSequence& ref);
MetricScore corpus_bleu(const std::vector<TokenSequence>& hyps, const std::vector<TokenSequence>& refs);
MetricScore corpus_bleu(const std::vector<std::string>& hyps, const std::vector<std::string>& refs);
MetricScore sentence_chrf(std::string_view hyp, std::string_view ref);

// Convenience: tokenizes both sides with 13a.
MetricScore sentence_bleu_add1(std::string_view hyp, std::string_view ref);

// Signature strings reported alongside scores.
std::string corpus_bleu_signature();
std::string sentence_bleu_signature();
std::string chrf_signature();

}  // namespace mbrlab
