#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mbrlab/analysis.hpp"
#include "mbrlab/mbr.hpp"

namespace mbrlab {

// Reads a whole file, rejecting invalid UTF-8 with line and byte position.
std::string read_text_file(const std::filesystem::path& path);

// Splits on '\n' (a trailing '\r' is dropped); a final newline does not start
// an extra line.
std::vector<std::string_view> split_lines(std::string_view text);

// ---------------------------------------------------------------------------
// Candidate files: one JSON object per line
//   {"seg_id": "...", "source": "...", "candidates": [{"text": "...", "logp": -3.2}, ...]}
// Duplicates are collapsed on load.
// ---------------------------------------------------------------------------

std::vector<CandidateSet> parse_candidates(std::string_view text, std::string_view origin = "<memory>");
std::vector<CandidateSet> read_candidates(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Reference / system-output text files
// ---------------------------------------------------------------------------

enum class TextFormat { kAuto, kPlain, kKeyed };
TextFormat parse_text_format(std::string_view name);

// Ordered (seg_id, text) pairs. Plain files use 1-based line numbers as ids;
// keyed files are "<seg_id>\t<text>" per line. Auto picks keyed when every
// line contains a tab.
std::vector<std::pair<std::string, std::string>> read_segments(const std::filesystem::path& path,
                                                               TextFormat format = TextFormat::kAuto);

struct ReferenceSet {
  std::map<std::string, std::string> by_seg;
  std::size_t ignored_keys = 0;  // keyed entries with no matching segment
};

// Plain files pair line k with seg_ids[k]; keyed files must cover seg_ids.
ReferenceSet read_references(const std::filesystem::path& path, std::span<const std::string> seg_ids,
                             TextFormat format = TextFormat::kAuto);

// ---------------------------------------------------------------------------
// Decision files: one JSON object per line, fixed field order, reals with 17
// significant digits.
// ---------------------------------------------------------------------------

std::string format_decision(const Decision& d);
std::string format_decisions(std::span<const Decision> decisions);
std::vector<Decision> parse_decisions(std::string_view text, std::string_view origin = "<memory>");
void write_decisions(std::span<const Decision> decisions, const std::filesystem::path& path);
std::vector<Decision> read_decisions(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// QE scores: "<seg_id>\t<candidate_index>\t<score>"
// MQM annotations: "<seg_id>\t<rater>\t<major|minor>\t<category>"
// ---------------------------------------------------------------------------

using QeScores = std::map<std::string, std::map<std::size_t, double>>;
QeScores read_qe_scores(const std::filesystem::path& path);
std::vector<MqmAnnotation> read_mqm_annotations(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Run manifest
// ---------------------------------------------------------------------------

inline constexpr std::string_view kToolVersion = "0.1.0";

struct RunManifest {
  std::string command;
  std::map<std::string, std::string> config;
  std::vector<std::pair<std::string, std::string>> inputs;  // path -> sha256 of raw bytes
  std::uint64_t seed = 0;

  void add_input(const std::filesystem::path& path);
  std::string to_json() const;
};

void write_manifest(const RunManifest& manifest, const std::filesystem::path& path);

// Writes bytes atomically enough for our purposes (truncate + write).
void write_text_file(const std::filesystem::path& path, std::string_view bytes);

}  // namespace mbrlab
