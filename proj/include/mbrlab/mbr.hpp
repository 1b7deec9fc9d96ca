#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mbrlab/utility.hpp"

namespace mbrlab {

class BridgeClient;

// One source segment with its (collapsed) sampled candidates.
struct CandidateSet {
  std::string seg_id;
  std::string source;
  CandidateList candidates;
  std::size_t line = 0;  // 1-based line in the file it came from, 0 if synthetic
};

enum class PruneMode {
  kRandom,          // sample k draws from the expanded multiset without replacement
  kLogpTop,         // k highest-logP samples of the expanded multiset
  kRandomDistinct,  // k distinct texts, each kept with count 1
};

std::string to_string(PruneMode mode);
PruneMode parse_prune_mode(std::string_view text);

struct MbrConfig {
  UtilitySpec utility = UtilitySpec::sentence_bleu();
  std::optional<std::uint64_t> e_size;    // nullopt = ALL
  std::optional<std::uint64_t> max_size;  // nullopt = ALL
  PruneMode e_prune = PruneMode::kRandom;
  PruneMode max_prune = PruneMode::kRandom;
  std::uint64_t seed = 0;
  std::optional<std::string> e_source_override;

  void validate() const;
  // Canonical one-line rendering; stable across releases.
  std::string canonical() const;
  // First 16 hex digits of SHA-256(canonical()).
  std::string digest() const;
};

struct Decision {
  std::string seg_id;
  std::size_t chosen_index = 0;  // into the max-list
  std::string chosen_text;
  double expected_utility = 0.0;
  std::vector<double> risk_vector;
  std::optional<double> chosen_logp;
  std::optional<std::size_t> map_index;
  std::size_t pool_size = 0;  // max-list entries (matrix rows)
  std::size_t eref_size = 0;  // E-list entries (matrix columns)
  std::string utility_id;
  std::string config_digest;

  friend bool operator==(const Decision&, const Decision&) = default;
};

// Returns `list` unchanged when k covers the whole expanded multiset. Results
// keep input order. Throws Error("config") for LOGP_TOP with missing logP.
CandidateList prune(std::span<const Candidate> list, std::uint64_t k, PruneMode mode, std::uint64_t seed,
                    std::string_view stream = {});

// Index of the highest-logP candidate, first index on ties.
std::size_t map_baseline(std::span<const Candidate> candidates);

// Weighted mean of each row: sum_j w_j * u_ij / sum_j w_j, compensated.
std::vector<double> expected_utilities(const UtilityMatrix& m);

// First index attaining the maximum.
std::size_t first_argmax(std::span<const double> values);

class MatrixProvider {
 public:
  virtual ~MatrixProvider() = default;
  virtual UtilityMatrix matrix(const CandidateSet& segment, std::span<const Candidate> pool,
                               std::span<const Candidate> erefs) = 0;
  virtual std::string utility_id() const = 0;
};

class InCoreProvider final : public MatrixProvider {
 public:
  InCoreProvider(UtilitySpec spec, BuildOptions options) : spec_(std::move(spec)), options_(options) {}
  UtilityMatrix matrix(const CandidateSet&, std::span<const Candidate> pool, std::span<const Candidate> erefs) override;
  std::string utility_id() const override { return spec_.id(); }

 private:
  UtilitySpec spec_;
  BuildOptions options_;
};

// Reads precomputed matrices. A "{seg}" placeholder in the path is replaced
// by the segment id; without it the single file applies to every segment.
class MatrixFileProvider final : public MatrixProvider {
 public:
  explicit MatrixFileProvider(std::string path_pattern) : pattern_(std::move(path_pattern)) {}
  UtilityMatrix matrix(const CandidateSet& segment, std::span<const Candidate> pool,
                       std::span<const Candidate> erefs) override;
  std::string utility_id() const override { return "matrix"; }
  std::string path_for(const std::string& seg_id) const;

 private:
  std::string pattern_;
};

class BridgeProvider final : public MatrixProvider {
 public:
  explicit BridgeProvider(BridgeClient& client) : client_(client) {}
  UtilityMatrix matrix(const CandidateSet& segment, std::span<const Candidate> pool,
                       std::span<const Candidate> erefs) override;
  std::string utility_id() const override;

 private:
  BridgeClient& client_;
};

// Builds the E-list and max-list, obtains the utility matrix and applies the
// expected-utility decision rule. `e_source`, when given, replaces `cands` as
// the pool the E-list is drawn from.
Decision mbr_decode(const CandidateSet& cands, const MbrConfig& config, MatrixProvider& provider,
                    const CandidateSet* e_source = nullptr);

// The two lists mbr_decode would use.
struct DecodeLists {
  CandidateList max_list;
  CandidateList e_list;
};
DecodeLists decode_lists(const CandidateSet& cands, const MbrConfig& config, const CandidateSet* e_source = nullptr);

}  // namespace mbrlab
