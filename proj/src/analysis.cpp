#include "mbrlab/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "mbrlab/error.hpp"
#include "mbrlab/metrics.hpp"
#include "mbrlab/mbr.hpp"

namespace mbrlab {

std::vector<double> score_against(std::span<const Candidate> pool, std::string_view reference,
                                  const UtilitySpec& metric) {
  if (!metric.in_core()) throw Error("config", "oracle metrics must be in-core (sbleu or chrf)");
  std::vector<double> scores;
  scores.reserve(pool.size());
  for (const auto& c : pool) scores.push_back(utility(metric.kind, c.text, reference));
  return scores;
}

OracleChoice oracle_select(std::span<const double> scores) {
  const auto index = first_argmax(scores);
  return {index, scores[index]};
}

OracleChoice oracle_select(std::span<const Candidate> pool, std::string_view reference, const UtilitySpec& metric) {
  const auto scores = score_against(pool, reference, metric);
  return oracle_select(scores);
}

std::uint64_t rank_of(std::span<const double> scores, std::size_t chosen_index, std::span<const std::uint32_t> weights) {
  if (chosen_index >= scores.size()) {
    throw Error("dimension", "rank_of: index " + std::to_string(chosen_index) + " out of range for " +
                                 std::to_string(scores.size()) + " candidates");
  }
  if (!weights.empty() && weights.size() != scores.size()) throw Error("dimension", "rank_of: weight count mismatch");
  std::uint64_t better = 0;
  for (std::size_t k = 0; k < scores.size(); ++k) {
    if (scores[k] > scores[chosen_index]) better += weights.empty() ? 1 : weights[k];
  }
  return better + 1;
}

std::uint64_t rank_of(std::span<const Candidate> pool, std::size_t chosen_index, std::string_view reference,
                      const UtilitySpec& metric) {
  const auto scores = score_against(pool, reference, metric);
  return rank_of(scores, chosen_index);
}

RankReport percentiles(std::vector<std::uint64_t> ranks) {
  if (ranks.empty()) throw Error("dimension", "percentiles of an empty rank list");
  RankReport report;
  report.ranks = ranks;
  std::sort(ranks.begin(), ranks.end());
  const auto n = ranks.size();
  auto nearest = [&](std::uint64_t q) {
    // ceil(q * n / 100) in integers, at least 1
    std::uint64_t pos = (q * n + 99) / 100;
    pos = std::clamp<std::uint64_t>(pos, 1, n);
    return ranks[pos - 1];
  };
  report.p5 = nearest(5);
  report.p25 = nearest(25);
  report.p50 = nearest(50);
  report.p75 = nearest(75);
  report.p95 = nearest(95);
  return report;
}

std::size_t qe_rerank(std::span<const Candidate> pool, std::span<const double> qe_scores) {
  if (pool.size() != qe_scores.size()) {
    throw Error("alignment", "qe_rerank: " + std::to_string(pool.size()) + " candidates but " +
                                 std::to_string(qe_scores.size()) + " scores");
  }
  return first_argmax(qe_scores);
}

NamedMatrix cross_bleu_matrix(const std::vector<SystemOutput>& systems) {
  if (systems.size() < 2) throw Error("config", "cross-BLEU needs at least two systems");
  const auto& base = systems.front();
  for (const auto& sys : systems) {
    std::vector<std::string> missing;
    for (const auto& [id, text] : base.segments) {
      if (!sys.segments.contains(id)) missing.push_back(id);
    }
    for (const auto& [id, text] : sys.segments) {
      if (!base.segments.contains(id)) missing.push_back(id);
    }
    if (!missing.empty()) {
      std::string list;
      for (std::size_t k = 0; k < missing.size() && k < 10; ++k) list += (k ? ", " : "") + missing[k];
      if (missing.size() > 10) list += ", ...";
      throw Error("alignment", "systems '" + base.name + "' and '" + sys.name + "' differ on seg_ids: " + list);
    }
  }

  std::vector<std::vector<TokenSequence>> tokenized;
  tokenized.reserve(systems.size());
  for (const auto& sys : systems) {
    std::vector<TokenSequence> toks;
    toks.reserve(base.segments.size());
    for (const auto& [id, unused] : base.segments) toks.push_back(tokenize_13a(sys.segments.at(id)));
    tokenized.push_back(std::move(toks));
  }

  NamedMatrix out;
  for (const auto& sys : systems) out.names.push_back(sys.name);
  out.values.assign(systems.size(), std::vector<double>(systems.size(), 0.0));
  for (std::size_t a = 0; a < systems.size(); ++a) {
    for (std::size_t b = 0; b < systems.size(); ++b) {
      out.values[a][b] = a == b ? 100.0 : corpus_bleu(tokenized[a], tokenized[b]).value;
    }
  }
  return out;
}

double mqm_weight(const MqmAnnotation& a) noexcept {
  if (a.severity == Severity::kMajor) return 5.0;
  std::string lower = a.category;
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return lower.find("punctuation") != std::string::npos ? 0.1 : 1.0;
}

MqmResult mqm_score(std::span<const MqmAnnotation> annotations, std::span<const std::string> segments,
                    std::span<const std::string> raters) {
  std::map<std::string, std::size_t> seg_index;
  for (std::size_t k = 0; k < segments.size(); ++k) seg_index.emplace(segments[k], k);

  std::set<std::string> active;
  for (const auto& a : annotations) {
    if (!seg_index.contains(a.seg_id)) throw Error("alignment", "MQM annotation for unknown segment '" + a.seg_id + "'");
    active.insert(a.rater);
  }

  MqmResult result;
  if (raters.empty()) {
    result.raters.assign(active.begin(), active.end());
  } else {
    for (const auto& r : raters) {
      if (active.contains(r) &&
          std::find(result.raters.begin(), result.raters.end(), r) == result.raters.end()) {
        result.raters.push_back(r);
      }
    }
  }
  std::map<std::string, std::size_t> rater_index;
  for (std::size_t k = 0; k < result.raters.size(); ++k) rater_index.emplace(result.raters[k], k);

  std::vector<std::vector<double>> per(segments.size(), std::vector<double>(result.raters.size(), 0.0));
  for (const auto& a : annotations) {
    const auto r = rater_index.find(a.rater);
    if (r == rater_index.end()) continue;
    per[seg_index.at(a.seg_id)][r->second] += mqm_weight(a);
  }

  double total = 0.0;
  for (std::size_t s = 0; s < segments.size(); ++s) {
    double seg_score = 0.0;
    if (!result.raters.empty()) {
      for (double v : per[s]) seg_score += v;
      seg_score /= static_cast<double>(result.raters.size());
    }
    result.segments.emplace_back(segments[s], seg_score);
    total += seg_score;
  }
  result.overall = segments.empty() ? 0.0 : total / static_cast<double>(segments.size());
  return result;
}

}  // namespace mbrlab
