#include "mbrlab/utility.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "mbrlab/error.hpp"
#include "mbrlab/metrics.hpp"
#include "mbrlab/simd/overlap.hpp"
#include "mbrlab/text.hpp"

#if defined(_OPENMP)
#include <omp.h>
#endif

namespace mbrlab {

CandidateList collapse_duplicates(std::span<const Candidate> candidates) {
  CandidateList out;
  std::unordered_map<std::string_view, std::size_t> index;
  index.reserve(candidates.size());
  for (const auto& c : candidates) {
    const auto [it, inserted] = index.try_emplace(c.text, out.size());
    if (inserted) {
      out.push_back(c);
    } else {
      out[it->second].count += c.count;
    }
  }
  return out;
}

CandidateList expand(std::span<const Candidate> candidates) {
  CandidateList out;
  out.reserve(total_count(candidates));
  for (const auto& c : candidates) {
    for (std::uint32_t k = 0; k < c.count; ++k) out.push_back({c.text, c.logp, 1});
  }
  return out;
}

std::uint64_t total_count(std::span<const Candidate> candidates) noexcept {
  std::uint64_t n = 0;
  for (const auto& c : candidates) n += c.count;
  return n;
}

// ---------------------------------------------------------------------------
// UtilitySpec
// ---------------------------------------------------------------------------

std::string UtilitySpec::id() const {
  switch (kind) {
    case UtilityKind::kSentenceBleu: return "sbleu";
    case UtilityKind::kChrf: return "chrf";
    case UtilityKind::kExternalMatrix: return "matrix";
    case UtilityKind::kExternalBridge: return "bridge";
  }
  return "unknown";
}

std::string UtilitySpec::to_string() const {
  switch (kind) {
    case UtilityKind::kExternalMatrix: return "matrix:" + params.at("path");
    case UtilityKind::kExternalBridge: return "bridge:" + params.at("command");
    default: return id();
  }
}

UtilitySpec UtilitySpec::parse(std::string_view text) {
  if (text == "sbleu") return sentence_bleu();
  if (text == "chrf") return chrf();
  if (text.starts_with("matrix:") && text.size() > 7) return matrix_file(std::string(text.substr(7)));
  if (text.starts_with("bridge:") && text.size() > 7) return bridge(std::string(text.substr(7)));
  throw Error("config", "unknown utility '" + std::string(text) + "' (expected sbleu|chrf|matrix:<path>|bridge:<cmd>)");
}

void UtilitySpec::validate() const {
  if (kind == UtilityKind::kExternalMatrix && (!params.contains("path") || params.at("path").empty())) {
    throw Error("config", "matrix utility requires a path");
  }
  if (kind == UtilityKind::kExternalBridge && (!params.contains("command") || params.at("command").empty())) {
    throw Error("config", "bridge utility requires a launch command");
  }
}

// ---------------------------------------------------------------------------
// UtilityMatrix
// ---------------------------------------------------------------------------

UtilityMatrix::UtilityMatrix(std::size_t pool, std::size_t erefs)
    : pool_size(pool), eref_size(erefs), scores(pool * erefs, 0.0), eref_weights(erefs, 1), pool_ids(pool), eref_ids(erefs) {
  for (std::size_t i = 0; i < pool; ++i) pool_ids[i] = static_cast<std::uint32_t>(i);
  for (std::size_t j = 0; j < erefs; ++j) eref_ids[j] = static_cast<std::uint32_t>(j);
}

void UtilityMatrix::validate() const {
  if (pool_size == 0 || eref_size == 0) throw Error("dimension", "utility matrix must be at least 1x1");
  if (scores.size() != pool_size * eref_size) throw Error("dimension", "score buffer does not match matrix shape");
  if (eref_weights.size() != eref_size) throw Error("dimension", "weight count does not match pseudo-reference count");
  for (std::size_t j = 0; j < eref_size; ++j) {
    if (eref_weights[j] == 0) throw Error("malformed", "weight " + std::to_string(j) + " must be >= 1");
  }
  for (std::size_t i = 0; i < pool_size; ++i) {
    for (std::size_t j = 0; j < eref_size; ++j) {
      if (!std::isfinite(at(i, j))) {
        throw Error("nonfinite", "non-finite score at row " + std::to_string(i) + ", column " + std::to_string(j));
      }
    }
  }
}

// ---------------------------------------------------------------------------
// Cached n-gram profiles
// ---------------------------------------------------------------------------

namespace {

constexpr int kMaxOrder = 6;

struct Profile {
  std::uint64_t length = 0;
  std::array<std::vector<std::uint32_t>, kMaxOrder> keys;
  std::array<std::vector<std::uint32_t>, kMaxOrder> counts;
  std::array<std::uint64_t, kMaxOrder> totals{};

  simd::SortedCounts order(int n) const noexcept { return {keys[n], counts[n]}; }
};

// Interns n-grams as (prefix id, unit) pairs so each order reuses the ids of
// the order below. Ids are only meaningful within one interner.
class NgramInterner {
 public:
  explicit NgramInterner(int max_order) : max_order_(max_order) {}

  Profile profile(const std::vector<std::uint32_t>& units) {
    Profile p;
    p.length = units.size();
    std::vector<std::uint32_t> prev;
    std::vector<std::uint32_t> cur;
    for (int n = 1; n <= max_order_; ++n) {
      const auto order = static_cast<std::size_t>(n);
      cur.clear();
      if (units.size() >= order) {
        for (std::size_t i = 0; i + order <= units.size(); ++i) {
          const std::uint64_t prefix = n == 1 ? 0 : static_cast<std::uint64_t>(prev[i]) + 1;
          cur.push_back(intern((prefix << 32) | units[i + order - 1]));
        }
      }
      std::vector<std::uint32_t> sorted = cur;
      std::sort(sorted.begin(), sorted.end());
      auto& keys = p.keys[n - 1];
      auto& counts = p.counts[n - 1];
      for (std::size_t k = 0; k < sorted.size();) {
        std::size_t e = k;
        while (e < sorted.size() && sorted[e] == sorted[k]) ++e;
        keys.push_back(sorted[k]);
        counts.push_back(static_cast<std::uint32_t>(e - k));
        k = e;
      }
      p.totals[n - 1] = cur.size();
      std::swap(prev, cur);
    }
    return p;
  }

  std::uint32_t unit(std::string_view token) {
    const auto [it, inserted] = units_.try_emplace(std::string(token), static_cast<std::uint32_t>(units_.size()));
    return it->second;
  }

 private:
  std::uint32_t intern(std::uint64_t key) {
    const auto [it, inserted] = ids_.try_emplace(key, static_cast<std::uint32_t>(ids_.size()));
    return it->second;
  }

  int max_order_;
  std::unordered_map<std::uint64_t, std::uint32_t> ids_;
  std::unordered_map<std::string, std::uint32_t> units_;
};

double cell_from_profiles(UtilityKind kind, const Profile& h, const Profile& r, simd::OverlapFn overlap) {
  if (kind == UtilityKind::kSentenceBleu) {
    BleuStats s;
    s.hyp_len = h.length;
    s.ref_len = r.length;
    for (int n = 0; n < kBleuOrder; ++n) {
      s.matches[n] = overlap(h.order(n), r.order(n));
      s.totals[n] = h.totals[n];
    }
    return sentence_bleu_add1_from_stats(s);
  }
  ChrfStats s;
  for (int n = 0; n < kChrfOrder; ++n) {
    s.hyp[n] = h.totals[n];
    s.ref[n] = r.totals[n];
    s.matches[n] = overlap(h.order(n), r.order(n));
  }
  return chrf_from_stats(s);
}

int clamp_jobs(int jobs) { return jobs < 1 ? 1 : jobs; }

}  // namespace

double utility(UtilityKind kind, std::string_view hyp, std::string_view ref) {
  switch (kind) {
    case UtilityKind::kSentenceBleu: return sentence_bleu_add1(hyp, ref).value;
    case UtilityKind::kChrf: return sentence_chrf(hyp, ref).value;
    default: throw Error("config", "utility(): only in-core utilities can be evaluated directly");
  }
}

UtilityMatrix build_matrix(std::span<const Candidate> pool, std::span<const Candidate> erefs, const UtilitySpec& spec,
                           const BuildOptions& options) {
  if (!spec.in_core()) throw Error("config", "build_matrix requires an in-core utility (sbleu or chrf)");
  if (pool.empty() || erefs.empty()) throw Error("dimension", "build_matrix: empty candidate list");

  UtilityMatrix m(pool.size(), erefs.size());
  for (std::size_t j = 0; j < erefs.size(); ++j) m.eref_weights[j] = erefs[j].count;

  const auto rows = static_cast<std::int64_t>(pool.size());
  const int jobs = clamp_jobs(options.jobs);

  if (!options.use_cache) {
#pragma omp parallel for schedule(dynamic, 1) num_threads(jobs)
    for (std::int64_t i = 0; i < rows; ++i) {
      for (std::size_t j = 0; j < erefs.size(); ++j) {
        m.at(static_cast<std::size_t>(i), j) = utility(spec.kind, pool[i].text, erefs[j].text);
      }
    }
    return m;
  }

  // One profile per distinct string across both lists.
  std::unordered_map<std::string_view, std::size_t> slot;
  std::vector<std::string_view> distinct;
  auto slot_of = [&](std::string_view text) {
    const auto [it, inserted] = slot.try_emplace(text, distinct.size());
    if (inserted) distinct.push_back(text);
    return it->second;
  };
  std::vector<std::size_t> pool_slot(pool.size());
  std::vector<std::size_t> eref_slot(erefs.size());
  for (std::size_t i = 0; i < pool.size(); ++i) pool_slot[i] = slot_of(pool[i].text);
  for (std::size_t j = 0; j < erefs.size(); ++j) eref_slot[j] = slot_of(erefs[j].text);

  const bool words = spec.kind == UtilityKind::kSentenceBleu;
  NgramInterner interner(words ? kBleuOrder : kChrfOrder);
  std::vector<Profile> profiles;
  profiles.reserve(distinct.size());
  std::vector<std::uint32_t> units;
  for (const auto text : distinct) {
    units.clear();
    if (words) {
      for (const auto& tok : tokenize_13a(text).tokens) units.push_back(interner.unit(tok));
    } else {
      for (char32_t c : strip_whitespace(decode_utf8(text))) units.push_back(static_cast<std::uint32_t>(c));
    }
    profiles.push_back(interner.profile(units));
  }

  const simd::OverlapFn overlap = simd::overlap_kernel(simd::active_isa());
#pragma omp parallel for schedule(dynamic, 1) num_threads(jobs)
  for (std::int64_t i = 0; i < rows; ++i) {
    const Profile& h = profiles[pool_slot[static_cast<std::size_t>(i)]];
    for (std::size_t j = 0; j < erefs.size(); ++j) {
      m.at(static_cast<std::size_t>(i), j) = cell_from_profiles(spec.kind, h, profiles[eref_slot[j]], overlap);
    }
  }
  return m;
}

// ---------------------------------------------------------------------------
// Matrix file I/O
// ---------------------------------------------------------------------------

namespace {

std::string format_real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string_view> split_spaces(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && ptr == end;
}

}  // namespace

std::string format_matrix(const UtilityMatrix& m) {
  std::string out = "MBRMAT v1 " + std::to_string(m.pool_size) + " " + std::to_string(m.eref_size) + "\nWEIGHTS";
  for (auto w : m.eref_weights) out += " " + std::to_string(w);
  out += "\n";
  for (std::size_t i = 0; i < m.pool_size; ++i) {
    for (std::size_t j = 0; j < m.eref_size; ++j) {
      if (j) out += ' ';
      out += format_real(m.at(i, j));
    }
    out += '\n';
  }
  return out;
}

UtilityMatrix parse_matrix(std::string_view text) {
  if (const auto bad = find_invalid_utf8(text)) {
    throw Error("utf8", "matrix file: invalid UTF-8 at byte " + std::to_string(*bad));
  }
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    auto line = text.substr(pos, nl - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    pos = nl + 1;
  }
  std::size_t k = 0;
  while (k < lines.size() && lines[k].starts_with('#')) ++k;
  if (k >= lines.size()) throw Error("malformed", "matrix file: missing MBRMAT header");

  const auto header = split_spaces(lines[k]);
  std::size_t pool = 0;
  std::size_t erefs = 0;
  if (header.size() != 4 || header[0] != "MBRMAT" || header[1] != "v1" || !parse_number(header[2], pool) ||
      !parse_number(header[3], erefs) || pool == 0 || erefs == 0) {
    throw Error("malformed", "matrix file: malformed header '" + std::string(lines[k]) + "'");
  }
  ++k;
  if (k >= lines.size()) throw Error("malformed", "matrix file: missing WEIGHTS line");
  const auto weights = split_spaces(lines[k]);
  if (weights.empty() || weights[0] != "WEIGHTS") throw Error("malformed", "matrix file: expected WEIGHTS line");
  if (weights.size() - 1 != erefs) {
    throw Error("dimension", "matrix file: header declares " + std::to_string(erefs) + " columns but WEIGHTS has " +
                                 std::to_string(weights.size() - 1));
  }
  UtilityMatrix m(pool, erefs);
  for (std::size_t j = 0; j < erefs; ++j) {
    std::uint32_t w = 0;
    if (!parse_number(weights[j + 1], w) || w == 0) {
      throw Error("malformed", "matrix file: weight " + std::to_string(j) + " must be a positive integer");
    }
    m.eref_weights[j] = w;
  }
  ++k;
  // trailing empty lines are tolerated
  std::size_t end = lines.size();
  while (end > k && lines[end - 1].empty()) --end;
  for (std::size_t i = 0; i < pool; ++i) {
    if (k + i >= end) {
      throw Error("dimension", "matrix file: expected " + std::to_string(pool) + " rows, found " + std::to_string(i) +
                                   " (row " + std::to_string(i) + " missing)");
    }
    const auto cells = split_spaces(lines[k + i]);
    if (cells.size() != erefs) {
      throw Error("dimension", "matrix file: row " + std::to_string(i) + " has " + std::to_string(cells.size()) +
                                   " columns, expected " + std::to_string(erefs));
    }
    for (std::size_t j = 0; j < erefs; ++j) {
      double v = 0.0;
      if (!parse_number(cells[j], v)) {
        throw Error("malformed", "matrix file: unparsable score at row " + std::to_string(i) + ", column " +
                                     std::to_string(j) + ": '" + std::string(cells[j]) + "'");
      }
      if (!std::isfinite(v)) {
        throw Error("nonfinite", "matrix file: non-finite score at row " + std::to_string(i) + ", column " +
                                     std::to_string(j));
      }
      m.at(i, j) = v;
    }
  }
  if (k + pool != end) {
    throw Error("dimension", "matrix file: more than " + std::to_string(pool) + " rows (extra row " +
                                 std::to_string(pool) + ")");
  }
  return m;
}

void save_matrix(const UtilityMatrix& m, const std::filesystem::path& path) {
  m.validate();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("io", "cannot write " + path.string());
  out << format_matrix(m);
  if (!out) throw Error("io", "write failed: " + path.string());
}

UtilityMatrix load_matrix(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("io", "cannot read matrix file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_matrix(ss.str());
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.what(), e.exit_code());
  }
}

}  // namespace mbrlab
