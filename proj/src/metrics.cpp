#include "mbrlab/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "mbrlab/error.hpp"

namespace mbrlab {

BleuStats& BleuStats::operator+=(const BleuStats& other) noexcept {
  for (int n = 0; n < kBleuOrder; ++n) {
    matches[n] += other.matches[n];
    totals[n] += other.totals[n];
  }
  hyp_len += other.hyp_len;
  ref_len += other.ref_len;
  return *this;
}

BleuStats bleu_stats(const TokenSequence& hyp, const TokenSequence& ref) {
  BleuStats stats;
  stats.hyp_len = hyp.size();
  stats.ref_len = ref.size();
  for (int n = 1; n <= kBleuOrder; ++n) {
    const auto hyp_grams = word_ngrams(hyp.tokens, n);
    const auto ref_grams = word_ngrams(ref.tokens, n);
    std::uint64_t clipped = 0;
    for (const auto& [gram, count] : hyp_grams.counts) {
      const auto it = ref_grams.counts.find(gram);
      if (it != ref_grams.counts.end()) clipped += std::min(count, it->second);
    }
    stats.matches[n - 1] = clipped;
    stats.totals[n - 1] = hyp_grams.total();
  }
  return stats;
}

ChrfStats chrf_stats(std::string_view hyp, std::string_view ref) {
  ChrfStats stats;
  for (int n = 1; n <= kChrfOrder; ++n) {
    const auto hyp_grams = char_ngrams(hyp, n, true);
    const auto ref_grams = char_ngrams(ref, n, true);
    std::uint64_t clipped = 0;
    for (const auto& [gram, count] : hyp_grams.counts) {
      const auto it = ref_grams.counts.find(gram);
      if (it != ref_grams.counts.end()) clipped += std::min(count, it->second);
    }
    stats.hyp[n - 1] = hyp_grams.total();
    stats.ref[n - 1] = ref_grams.total();
    stats.matches[n - 1] = clipped;
  }
  return stats;
}

namespace {

double brevity_penalty(std::uint64_t hyp_len, std::uint64_t ref_len) noexcept {
  if (hyp_len >= ref_len) return 1.0;
  if (hyp_len == 0) return 0.0;
  return std::exp(1.0 - static_cast<double>(ref_len) / static_cast<double>(hyp_len));
}

}  // namespace

double sentence_bleu_add1_from_stats(const BleuStats& s) noexcept {
  if (s.hyp_len == 0 || s.matches[0] == 0) return 0.0;
  double log_sum = std::log(static_cast<double>(s.matches[0]) / static_cast<double>(s.totals[0]));
  for (int n = 1; n < kBleuOrder; ++n) {
    log_sum += std::log(static_cast<double>(s.matches[n] + 1) / static_cast<double>(s.totals[n] + 1));
  }
  return 100.0 * brevity_penalty(s.hyp_len, s.ref_len) * std::exp(log_sum / kBleuOrder);
}

double corpus_bleu_from_stats(const BleuStats& s) noexcept {
  double log_sum = 0.0;
  double smooth = 1.0;
  for (int n = 0; n < kBleuOrder; ++n) {
    // an order with no hypothesis n-grams leaves a zero precision
    if (s.totals[n] == 0) return 0.0;
    double precision = 0.0;
    if (s.matches[n] == 0) {
      smooth *= 2.0;
      precision = 1.0 / (smooth * static_cast<double>(s.totals[n]));
    } else {
      precision = static_cast<double>(s.matches[n]) / static_cast<double>(s.totals[n]);
    }
    log_sum += std::log(precision);
  }
  return 100.0 * brevity_penalty(s.hyp_len, s.ref_len) * std::exp(log_sum / kBleuOrder);
}

double chrf_from_stats(const ChrfStats& s) noexcept {
  bool any_hyp = false;
  bool any_ref = false;
  double precision = 0.0;
  double recall = 0.0;
  int effective = 0;
  for (int n = 0; n < kChrfOrder; ++n) {
    any_hyp |= s.hyp[n] > 0;
    any_ref |= s.ref[n] > 0;
    if (s.hyp[n] > 0 && s.ref[n] > 0) {
      precision += static_cast<double>(s.matches[n]) / static_cast<double>(s.hyp[n]);
      recall += static_cast<double>(s.matches[n]) / static_cast<double>(s.ref[n]);
      ++effective;
    }
  }
  if (!any_hyp && !any_ref) return 100.0;
  if (effective == 0) return 0.0;
  precision /= effective;
  recall /= effective;
  if (precision + recall == 0.0) return 0.0;
  const double factor = kChrfBeta * kChrfBeta;
  const double denom = factor * precision + recall;
  if (denom == 0.0) return 0.0;
  return 100.0 * (1.0 + factor) * precision * recall / denom;
}

MetricScore sentence_bleu_add1(const TokenSequence& hyp, const TokenSequence& ref) {
  return {sentence_bleu_add1_from_stats(bleu_stats(hyp, ref)), "sbleu"};
}

MetricScore sentence_bleu_add1(std::string_view hyp, std::string_view ref) {
  return sentence_bleu_add1(tokenize_13a(hyp), tokenize_13a(ref));
}

MetricScore corpus_bleu(const std::vector<TokenSequence>& hyps, const std::vector<TokenSequence>& refs) {
  if (hyps.size() != refs.size()) {
    throw Error("alignment", "corpus_bleu: " + std::to_string(hyps.size()) + " hypotheses vs " +
                                 std::to_string(refs.size()) + " references");
  }
  if (hyps.empty()) throw Error("alignment", "corpus_bleu: empty corpus");
  BleuStats total;
  for (std::size_t k = 0; k < hyps.size(); ++k) total += bleu_stats(hyps[k], refs[k]);
  return {corpus_bleu_from_stats(total), "bleu"};
}

MetricScore corpus_bleu(const std::vector<std::string>& hyps, const std::vector<std::string>& refs) {
  if (hyps.size() != refs.size()) {
    throw Error("alignment", "corpus_bleu: " + std::to_string(hyps.size()) + " hypotheses vs " +
                                 std::to_string(refs.size()) + " references");
  }
  std::vector<TokenSequence> h, r;
  h.reserve(hyps.size());
  r.reserve(refs.size());
  for (const auto& s : hyps) h.push_back(tokenize_13a(s));
  for (const auto& s : refs) r.push_back(tokenize_13a(s));
  return corpus_bleu(h, r);
}

MetricScore sentence_chrf(std::string_view hyp, std::string_view ref) {
  return {chrf_from_stats(chrf_stats(hyp, ref)), "chrf"};
}

std::string corpus_bleu_signature() { return "BLEU+case.mixed+numrefs.1+smooth.exp+tok.13a"; }
std::string sentence_bleu_signature() { return "sBLEU+case.mixed+numrefs.1+smooth.add1+tok.13a"; }
std::string chrf_signature() { return "chrF2+numchars.6+space.false"; }

}  // namespace mbrlab
