#include "mbrlab/mbr.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mbrlab/bridge.hpp"
#include "mbrlab/digest.hpp"
#include "mbrlab/error.hpp"
#include "mbrlab/rng.hpp"

namespace mbrlab {

std::string to_string(PruneMode mode) {
  switch (mode) {
    case PruneMode::kRandom: return "random";
    case PruneMode::kLogpTop: return "logp";
    case PruneMode::kRandomDistinct: return "random-distinct";
  }
  return "unknown";
}

PruneMode parse_prune_mode(std::string_view text) {
  if (text == "random") return PruneMode::kRandom;
  if (text == "logp") return PruneMode::kLogpTop;
  if (text == "random-distinct") return PruneMode::kRandomDistinct;
  throw Error("config", "unknown prune mode '" + std::string(text) + "' (expected random|logp|random-distinct)");
}

void MbrConfig::validate() const {
  utility.validate();
  if (e_size && *e_size == 0) throw Error("config", "e-size must be >= 1");
  if (max_size && *max_size == 0) throw Error("config", "max-size must be >= 1");
}

std::string MbrConfig::canonical() const {
  auto size = [](const std::optional<std::uint64_t>& s) { return s ? std::to_string(*s) : std::string("all"); };
  return "utility=" + utility.to_string() + ";e_size=" + size(e_size) + ";max_size=" + size(max_size) +
         ";e_prune=" + to_string(e_prune) + ";max_prune=" + to_string(max_prune) + ";seed=" + std::to_string(seed) +
         ";e_source=" + e_source_override.value_or("") + ";rng=" + std::string(SeededRng::kName);
}

std::string MbrConfig::digest() const { return sha256_hex(canonical()).substr(0, 16); }

namespace {

void require_logp(std::span<const Candidate> list, std::string_view what) {
  for (std::size_t k = 0; k < list.size(); ++k) {
    if (!list[k].logp) {
      throw Error("config", std::string(what) + ": candidate " + std::to_string(k) + " has no logP");
    }
  }
}

// Collapses the chosen expanded positions back into a list in input order.
CandidateList gather(const CandidateList& expanded, std::vector<std::size_t> picked) {
  std::sort(picked.begin(), picked.end());
  CandidateList chosen;
  chosen.reserve(picked.size());
  for (auto p : picked) chosen.push_back(expanded[p]);
  return collapse_duplicates(chosen);
}

}  // namespace

CandidateList prune(std::span<const Candidate> list, std::uint64_t k, PruneMode mode, std::uint64_t seed,
                    std::string_view stream) {
  if (k == 0) throw Error("config", "prune: k must be >= 1");
  if (mode == PruneMode::kLogpTop) require_logp(list, "logp pruning");

  if (mode == PruneMode::kRandomDistinct) {
    CandidateList distinct = collapse_duplicates(list);
    for (auto& c : distinct) c.count = 1;
    if (k >= distinct.size()) return distinct;
    SeededRng rng(seed, stream);
    std::vector<std::size_t> idx(distinct.size());
    std::iota(idx.begin(), idx.end(), 0);
    for (std::size_t t = 0; t < k; ++t) {
      std::swap(idx[t], idx[t + rng.uniform_below(idx.size() - t)]);
    }
    idx.resize(k);
    return gather(distinct, std::move(idx));
  }

  const std::uint64_t n = total_count(list);
  if (k >= n) return CandidateList(list.begin(), list.end());
  const CandidateList expanded = expand(list);

  std::vector<std::size_t> idx(expanded.size());
  std::iota(idx.begin(), idx.end(), 0);
  if (mode == PruneMode::kRandom) {
    // partial Fisher-Yates: the first k slots are a uniform k-subset, and a
    // smaller k under the same seed yields a prefix of a larger k's draw
    SeededRng rng(seed, stream);
    for (std::size_t t = 0; t < k; ++t) {
      std::swap(idx[t], idx[t + rng.uniform_below(idx.size() - t)]);
    }
  } else {
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t a, std::size_t b) { return *expanded[a].logp > *expanded[b].logp; });
  }
  idx.resize(k);
  return gather(expanded, std::move(idx));
}

std::size_t map_baseline(std::span<const Candidate> candidates) {
  if (candidates.empty()) throw Error("dimension", "map_baseline: empty candidate list");
  require_logp(candidates, "map baseline");
  std::size_t best = 0;
  for (std::size_t k = 1; k < candidates.size(); ++k) {
    if (*candidates[k].logp > *candidates[best].logp) best = k;
  }
  return best;
}

std::vector<double> expected_utilities(const UtilityMatrix& m) {
  std::uint64_t weight_sum = 0;
  for (auto w : m.eref_weights) weight_sum += w;
  const double denom = static_cast<double>(weight_sum);
  std::vector<double> risk(m.pool_size, 0.0);
  for (std::size_t i = 0; i < m.pool_size; ++i) {
    // Neumaier summation
    double sum = 0.0;
    double comp = 0.0;
    const auto row = m.row(i);
    for (std::size_t j = 0; j < m.eref_size; ++j) {
      const double term = static_cast<double>(m.eref_weights[j]) * row[j];
      const double t = sum + term;
      if (std::abs(sum) >= std::abs(term)) {
        comp += (sum - t) + term;
      } else {
        comp += (term - t) + sum;
      }
      sum = t;
    }
    risk[i] = (sum + comp) / denom;
  }
  return risk;
}

std::size_t first_argmax(std::span<const double> values) {
  if (values.empty()) throw Error("dimension", "argmax of an empty list");
  std::size_t best = 0;
  for (std::size_t k = 1; k < values.size(); ++k) {
    if (values[k] > values[best]) best = k;
  }
  return best;
}

UtilityMatrix InCoreProvider::matrix(const CandidateSet&, std::span<const Candidate> pool,
                                     std::span<const Candidate> erefs) {
  return build_matrix(pool, erefs, spec_, options_);
}

std::string MatrixFileProvider::path_for(const std::string& seg_id) const {
  std::string path = pattern_;
  const std::string placeholder = "{seg}";
  for (auto pos = path.find(placeholder); pos != std::string::npos; pos = path.find(placeholder, pos + seg_id.size())) {
    path.replace(pos, placeholder.size(), seg_id);
  }
  return path;
}

UtilityMatrix MatrixFileProvider::matrix(const CandidateSet& segment, std::span<const Candidate> pool,
                                         std::span<const Candidate> erefs) {
  const auto path = path_for(segment.seg_id);
  UtilityMatrix m = load_matrix(path);
  if (m.pool_size != pool.size() || m.eref_size != erefs.size()) {
    throw Error("dimension", path + ": matrix is " + std::to_string(m.pool_size) + "x" + std::to_string(m.eref_size) +
                                 " but segment '" + segment.seg_id + "' has " + std::to_string(pool.size()) +
                                 " pool candidates x " + std::to_string(erefs.size()) + " pseudo-references");
  }
  for (std::size_t j = 0; j < erefs.size(); ++j) {
    if (m.eref_weights[j] != erefs[j].count) {
      throw Error("dimension", path + ": weight of column " + std::to_string(j) + " is " +
                                   std::to_string(m.eref_weights[j]) + " but the pseudo-reference occurs " +
                                   std::to_string(erefs[j].count) + " times");
    }
  }
  return m;
}

UtilityMatrix BridgeProvider::matrix(const CandidateSet& segment, std::span<const Candidate> pool,
                                     std::span<const Candidate> erefs) {
  return bridge_build_matrix(client_, pool, erefs, segment.source);
}

std::string BridgeProvider::utility_id() const { return "bridge:" + client_.scorer_name(); }

DecodeLists decode_lists(const CandidateSet& cands, const MbrConfig& config, const CandidateSet* e_source) {
  const CandidateSet& e_src = e_source ? *e_source : cands;
  if (cands.candidates.empty() || e_src.candidates.empty()) {
    throw Error("dimension", "segment '" + cands.seg_id + "' has no candidates");
  }
  // Both sides share one random stream per segment, so equal settings give
  // identical lists and different sizes give nested ones.
  const std::string stream = "prune/" + cands.seg_id;
  DecodeLists lists;
  lists.max_list = config.max_size ? prune(cands.candidates, *config.max_size, config.max_prune, config.seed, stream)
                                   : cands.candidates;
  lists.e_list = config.e_size ? prune(e_src.candidates, *config.e_size, config.e_prune, config.seed, stream)
                               : e_src.candidates;
  return lists;
}

Decision mbr_decode(const CandidateSet& cands, const MbrConfig& config, MatrixProvider& provider,
                    const CandidateSet* e_source) {
  config.validate();
  const auto lists = decode_lists(cands, config, e_source);
  const UtilityMatrix m = provider.matrix(cands, lists.max_list, lists.e_list);
  if (m.pool_size != lists.max_list.size() || m.eref_size != lists.e_list.size()) {
    throw Error("dimension", "utility matrix shape does not match the candidate lists");
  }
  m.validate();

  Decision d;
  d.seg_id = cands.seg_id;
  d.risk_vector = expected_utilities(m);
  d.chosen_index = first_argmax(d.risk_vector);
  d.expected_utility = d.risk_vector[d.chosen_index];
  d.chosen_text = lists.max_list[d.chosen_index].text;
  d.chosen_logp = lists.max_list[d.chosen_index].logp;
  const bool all_logp =
      std::all_of(lists.max_list.begin(), lists.max_list.end(), [](const Candidate& c) { return c.logp.has_value(); });
  if (all_logp) d.map_index = map_baseline(lists.max_list);
  d.pool_size = m.pool_size;
  d.eref_size = m.eref_size;
  d.utility_id = provider.utility_id();
  d.config_digest = config.digest();
  return d;
}

}  // namespace mbrlab
