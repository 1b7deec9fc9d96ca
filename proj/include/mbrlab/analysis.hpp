#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mbrlab/utility.hpp"

namespace mbrlab {

struct SystemOutput {
  std::string name;
  std::map<std::string, std::string> segments;  // seg_id -> translation
};

struct RankReport {
  std::vector<std::uint64_t> ranks;
  std::uint64_t p5 = 0, p25 = 0, p50 = 0, p75 = 0, p95 = 0;
};

enum class Severity { kMajor, kMinor };

struct MqmAnnotation {
  std::string seg_id;
  std::string rater;
  Severity severity = Severity::kMinor;
  std::string category;
};

struct OracleChoice {
  std::size_t index = 0;
  double score = 0.0;
};

// Per-candidate utility against a held-out reference (in-core metrics only).
std::vector<double> score_against(std::span<const Candidate> pool, std::string_view reference, const UtilitySpec& metric);

OracleChoice oracle_select(std::span<const Candidate> pool, std::string_view reference, const UtilitySpec& metric);
OracleChoice oracle_select(std::span<const double> scores);

// 1 + number of candidates scoring strictly higher than the chosen one. With
// `weights`, each candidate counts as that many samples.
std::uint64_t rank_of(std::span<const double> scores, std::size_t chosen_index,
                      std::span<const std::uint32_t> weights = {});
std::uint64_t rank_of(std::span<const Candidate> pool, std::size_t chosen_index, std::string_view reference,
                      const UtilitySpec& metric);

// Nearest-rank percentiles: p_q is the ceil(q/100 * n)-th smallest value.
RankReport percentiles(std::vector<std::uint64_t> ranks);

// Argmax over quality-estimation scores, first index on ties.
std::size_t qe_rerank(std::span<const Candidate> pool, std::span<const double> qe_scores);

struct NamedMatrix {
  std::vector<std::string> names;
  std::vector<std::vector<double>> values;  // values[row][col]
};

// Cell (A, B) = corpus BLEU with A as hypotheses and B as references.
NamedMatrix cross_bleu_matrix(const std::vector<SystemOutput>& systems);

double mqm_weight(const MqmAnnotation& a) noexcept;

struct MqmResult {
  std::vector<std::pair<std::string, double>> segments;  // in input order
  double overall = 0.0;
  std::vector<std::string> raters;  // raters that contributed to the averages
};

// Raters that annotated nothing at all are left out of the per-segment mean;
// a contributing rater with no error on a segment scores 0 there. An empty
// `raters` list means every rater that appears in `annotations`.
MqmResult mqm_score(std::span<const MqmAnnotation> annotations, std::span<const std::string> segments,
                    std::span<const std::string> raters = {});

}  // namespace mbrlab
