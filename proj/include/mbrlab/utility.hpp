#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace mbrlab {

struct Candidate {
  std::string text;
  std::optional<double> logp;
  std::uint32_t count = 1;

  friend bool operator==(const Candidate&, const Candidate&) = default;
};

using CandidateList = std::vector<Candidate>;

// Merges byte-identical texts (first occurrence keeps its position and logP),
// summing counts.
CandidateList collapse_duplicates(std::span<const Candidate> candidates);

// Expands counts back into one entry per sample (each with count 1).
CandidateList expand(std::span<const Candidate> candidates);

std::uint64_t total_count(std::span<const Candidate> candidates) noexcept;

enum class UtilityKind { kSentenceBleu, kChrf, kExternalMatrix, kExternalBridge };

struct UtilitySpec {
  UtilityKind kind = UtilityKind::kSentenceBleu;
  std::map<std::string, std::string> params;  // "path" or "command"

  static UtilitySpec sentence_bleu() { return {UtilityKind::kSentenceBleu, {}}; }
  static UtilitySpec chrf() { return {UtilityKind::kChrf, {}}; }
  static UtilitySpec matrix_file(std::string path) { return {UtilityKind::kExternalMatrix, {{"path", std::move(path)}}}; }
  static UtilitySpec bridge(std::string command) { return {UtilityKind::kExternalBridge, {{"command", std::move(command)}}}; }

  bool in_core() const noexcept { return kind == UtilityKind::kSentenceBleu || kind == UtilityKind::kChrf; }

  // "sbleu", "chrf", "matrix", "bridge"
  std::string id() const;
  // Inverse of the CLI syntax: sbleu | chrf | matrix:<path> | bridge:<command>.
  std::string to_string() const;
  static UtilitySpec parse(std::string_view text);

  // Throws Error("config") if the parameters required by `kind` are missing.
  void validate() const;
};

// Dense pool x pseudo-reference utilities, row-major.
struct UtilityMatrix {
  std::size_t pool_size = 0;
  std::size_t eref_size = 0;
  std::vector<double> scores;               // pool_size * eref_size
  std::vector<std::uint32_t> eref_weights;  // multiplicities, each >= 1
  std::vector<std::uint32_t> pool_ids;      // positions in the pool list
  std::vector<std::uint32_t> eref_ids;      // positions in the pseudo-reference list

  UtilityMatrix() = default;
  UtilityMatrix(std::size_t pool, std::size_t erefs);

  double& at(std::size_t i, std::size_t j) { return scores[i * eref_size + j]; }
  double at(std::size_t i, std::size_t j) const { return scores[i * eref_size + j]; }
  std::span<const double> row(std::size_t i) const { return {scores.data() + i * eref_size, eref_size}; }

  // Checks finiteness, weight positivity and buffer sizes; throws Error.
  void validate() const;

  friend bool operator==(const UtilityMatrix&, const UtilityMatrix&) = default;
};

struct BuildOptions {
  int jobs = 1;
  // Reuse per-string n-gram profiles; disabling it recomputes each cell from
  // scratch through the map-based metric path (testing aid).
  bool use_cache = true;
};

// In-core utilities only (sBLEU, chrF).
UtilityMatrix build_matrix(std::span<const Candidate> pool, std::span<const Candidate> erefs, const UtilitySpec& spec,
                           const BuildOptions& options = {});

// Single cell, map-based path.
double utility(UtilityKind kind, std::string_view hyp, std::string_view ref);

// ---------------------------------------------------------------------------
// Matrix file format
//   MBRMAT v1 <pool_size> <eref_size>
//   WEIGHTS <w_1> ... <w_eref_size>
//   <pool_size lines of eref_size scores>
// '#' comment lines are accepted before the header only.
// ---------------------------------------------------------------------------

std::string format_matrix(const UtilityMatrix& m);
UtilityMatrix parse_matrix(std::string_view text);
void save_matrix(const UtilityMatrix& m, const std::filesystem::path& path);
UtilityMatrix load_matrix(const std::filesystem::path& path);

}  // namespace mbrlab
