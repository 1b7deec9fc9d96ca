#include "mbrlab/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "mbrlab/digest.hpp"
#include "mbrlab/error.hpp"
#include "mbrlab/rng.hpp"
#include "mbrlab/text.hpp"

namespace mbrlab {

using nlohmann::json;

namespace {

std::string excerpt(std::string_view line) {
  // first 80 characters, cut on a code point boundary
  std::size_t chars = 0;
  std::size_t pos = 0;
  while (pos < line.size() && chars < 80) {
    ++pos;
    while (pos < line.size() && (static_cast<unsigned char>(line[pos]) & 0xC0) == 0x80) ++pos;
    ++chars;
  }
  return std::string(line.substr(0, pos)) + (pos < line.size() ? "..." : "");
}

Error line_error(std::string kind, std::string_view origin, std::size_t line, const std::string& what,
                 std::string_view content) {
  return Error(std::move(kind), std::string(origin) + ":" + std::to_string(line) + ": " + what + ": " + excerpt(content));
}

std::string format_real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string quote(std::string_view s) { return json(std::string(s)).dump(); }

bool parse_index(std::string_view s, std::size_t& out) {
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

bool parse_real(std::string_view s, double& out) {
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size() && std::isfinite(out);
}

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    const auto tab = line.find('\t', pos);
    if (tab == std::string_view::npos) {
      out.push_back(line.substr(pos));
      return out;
    }
    out.push_back(line.substr(pos, tab - pos));
    pos = tab + 1;
  }
}

}  // namespace

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("io", "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  std::string bytes = ss.str();
  if (const auto bad = find_invalid_utf8(bytes)) {
    std::size_t line = 1;
    std::size_t line_start = 0;
    for (std::size_t k = 0; k < *bad; ++k) {
      if (bytes[k] == '\n') {
        ++line;
        line_start = k + 1;
      }
    }
    throw Error("utf8", path.string() + ":" + std::to_string(line) + ": invalid UTF-8 at byte " +
                            std::to_string(*bad) + " (column byte " + std::to_string(*bad - line_start + 1) + ")");
  }
  return bytes;
}

std::vector<std::string_view> split_lines(std::string_view text) {
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
  return lines;
}

void write_text_file(const std::filesystem::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("io", "cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("io", "write failed: " + path.string());
}

// ---------------------------------------------------------------------------
// Candidates
// ---------------------------------------------------------------------------

std::vector<CandidateSet> parse_candidates(std::string_view text, std::string_view origin) {
  if (const auto bad = find_invalid_utf8(text)) {
    throw Error("utf8", std::string(origin) + ": invalid UTF-8 at byte " + std::to_string(*bad));
  }
  std::vector<CandidateSet> out;
  std::set<std::string> seen;
  const auto lines = split_lines(text);
  for (std::size_t k = 0; k < lines.size(); ++k) {
    const auto line = lines[k];
    const std::size_t lineno = k + 1;
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::exception& e) {
      throw line_error("malformed", origin, lineno, "not a JSON record", line);
    }
    if (!rec.is_object()) throw line_error("malformed", origin, lineno, "record is not an object", line);
    if (!rec.contains("seg_id") || !rec["seg_id"].is_string()) {
      throw line_error("malformed", origin, lineno, "missing string field 'seg_id'", line);
    }
    if (rec.contains("source") && !rec["source"].is_string()) {
      throw line_error("malformed", origin, lineno, "'source' must be a string", line);
    }
    if (!rec.contains("candidates") || !rec["candidates"].is_array()) {
      throw line_error("malformed", origin, lineno, "missing array field 'candidates'", line);
    }
    CandidateSet set;
    set.seg_id = rec["seg_id"].get<std::string>();
    set.source = rec.value("source", "");
    set.line = lineno;
    if (!seen.insert(set.seg_id).second) {
      throw line_error("duplicate", origin, lineno, "duplicate seg_id '" + set.seg_id + "'", line);
    }
    const auto& cands = rec["candidates"];
    if (cands.empty()) throw line_error("empty", origin, lineno, "empty candidates array", line);
    CandidateList raw;
    raw.reserve(cands.size());
    for (std::size_t c = 0; c < cands.size(); ++c) {
      const auto& cand = cands[c];
      if (!cand.is_object() || !cand.contains("text") || !cand["text"].is_string()) {
        throw line_error("malformed", origin, lineno, "candidate " + std::to_string(c) + " lacks a string 'text'", line);
      }
      Candidate item;
      item.text = cand["text"].get<std::string>();
      if (cand.contains("logp") && !cand["logp"].is_null()) {
        if (!cand["logp"].is_number()) {
          throw line_error("malformed", origin, lineno, "candidate " + std::to_string(c) + " has a non-numeric logp", line);
        }
        const double lp = cand["logp"].get<double>();
        if (!std::isfinite(lp) || lp > 0.0) {
          throw line_error("malformed", origin, lineno, "candidate " + std::to_string(c) + " logp must be finite and <= 0",
                           line);
        }
        item.logp = lp;
      }
      raw.push_back(std::move(item));
    }
    set.candidates = collapse_duplicates(raw);
    out.push_back(std::move(set));
  }
  return out;
}

std::vector<CandidateSet> read_candidates(const std::filesystem::path& path) {
  return parse_candidates(read_text_file(path), path.string());
}

// ---------------------------------------------------------------------------
// Text segments and references
// ---------------------------------------------------------------------------

TextFormat parse_text_format(std::string_view name) {
  if (name == "auto") return TextFormat::kAuto;
  if (name == "plain") return TextFormat::kPlain;
  if (name == "keyed") return TextFormat::kKeyed;
  throw Error("config", "unknown text format '" + std::string(name) + "' (expected auto|plain|keyed)");
}

std::vector<std::pair<std::string, std::string>> read_segments(const std::filesystem::path& path, TextFormat format) {
  const std::string bytes = read_text_file(path);
  const auto lines = split_lines(bytes);
  if (format == TextFormat::kAuto) {
    const bool keyed = !lines.empty() && std::all_of(lines.begin(), lines.end(), [](std::string_view l) {
      return l.find('\t') != std::string_view::npos;
    });
    format = keyed ? TextFormat::kKeyed : TextFormat::kPlain;
  }
  std::vector<std::pair<std::string, std::string>> out;
  out.reserve(lines.size());
  std::set<std::string> seen;
  for (std::size_t k = 0; k < lines.size(); ++k) {
    if (format == TextFormat::kPlain) {
      out.emplace_back(std::to_string(k + 1), std::string(lines[k]));
      continue;
    }
    const auto tab = lines[k].find('\t');
    if (tab == std::string_view::npos) {
      throw line_error("malformed", path.string(), k + 1, "keyed line without a tab", lines[k]);
    }
    std::string id(lines[k].substr(0, tab));
    if (!seen.insert(id).second) {
      throw line_error("duplicate", path.string(), k + 1, "duplicate seg_id '" + id + "'", lines[k]);
    }
    out.emplace_back(std::move(id), std::string(lines[k].substr(tab + 1)));
  }
  return out;
}

ReferenceSet read_references(const std::filesystem::path& path, std::span<const std::string> seg_ids,
                             TextFormat format) {
  const std::string bytes = read_text_file(path);
  const auto lines = split_lines(bytes);
  if (format == TextFormat::kAuto) {
    const bool keyed = !lines.empty() && std::all_of(lines.begin(), lines.end(), [](std::string_view l) {
      return l.find('\t') != std::string_view::npos;
    });
    format = keyed ? TextFormat::kKeyed : TextFormat::kPlain;
  }
  ReferenceSet refs;
  if (format == TextFormat::kPlain) {
    if (lines.size() != seg_ids.size()) {
      throw Error("alignment", path.string() + ": " + std::to_string(lines.size()) + " reference lines but " +
                                   std::to_string(seg_ids.size()) + " segments");
    }
    for (std::size_t k = 0; k < lines.size(); ++k) refs.by_seg.emplace(seg_ids[k], std::string(lines[k]));
    return refs;
  }
  const auto keyed = read_segments(path, TextFormat::kKeyed);
  std::set<std::string_view> wanted(seg_ids.begin(), seg_ids.end());
  for (const auto& [id, text] : keyed) {
    if (wanted.contains(id)) {
      refs.by_seg.emplace(id, text);
    } else {
      ++refs.ignored_keys;
    }
  }
  for (const auto& id : seg_ids) {
    if (!refs.by_seg.contains(id)) throw Error("alignment", path.string() + ": no reference for seg_id '" + id + "'");
  }
  return refs;
}

// ---------------------------------------------------------------------------
// Decisions
// ---------------------------------------------------------------------------

std::string format_decision(const Decision& d) {
  std::string out = "{\"seg_id\":" + quote(d.seg_id);
  out += ",\"chosen_index\":" + std::to_string(d.chosen_index);
  out += ",\"chosen_text\":" + quote(d.chosen_text);
  out += ",\"expected_utility\":" + format_real(d.expected_utility);
  if (d.chosen_logp) out += ",\"chosen_logp\":" + format_real(*d.chosen_logp);
  if (d.map_index) out += ",\"map_index\":" + std::to_string(*d.map_index);
  out += ",\"pool_size\":" + std::to_string(d.pool_size);
  out += ",\"eref_size\":" + std::to_string(d.eref_size);
  out += ",\"utility\":" + quote(d.utility_id);
  out += ",\"config_digest\":" + quote(d.config_digest);
  out += ",\"risk\":[";
  for (std::size_t k = 0; k < d.risk_vector.size(); ++k) {
    if (k) out += ',';
    out += format_real(d.risk_vector[k]);
  }
  out += "]}";
  return out;
}

std::string format_decisions(std::span<const Decision> decisions) {
  std::string out;
  for (const auto& d : decisions) {
    out += format_decision(d);
    out += '\n';
  }
  return out;
}

std::vector<Decision> parse_decisions(std::string_view text, std::string_view origin) {
  if (const auto bad = find_invalid_utf8(text)) {
    throw Error("utf8", std::string(origin) + ": invalid UTF-8 at byte " + std::to_string(*bad));
  }
  std::vector<Decision> out;
  const auto lines = split_lines(text);
  for (std::size_t k = 0; k < lines.size(); ++k) {
    const auto line = lines[k];
    const std::size_t lineno = k + 1;
    if (line.empty()) continue;
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::exception&) {
      throw line_error("malformed", origin, lineno, "not a JSON record", line);
    }
    auto require = [&](const char* field, auto check) -> const json& {
      if (!rec.is_object() || !rec.contains(field) || !check(rec[field])) {
        throw line_error("malformed", origin, lineno, std::string("missing or invalid '") + field + "'", line);
      }
      return rec[field];
    };
    const auto is_string = [](const json& j) { return j.is_string(); };
    const auto is_index = [](const json& j) { return j.is_number_unsigned() || (j.is_number_integer() && j.get<std::int64_t>() >= 0); };
    const auto is_number = [](const json& j) { return j.is_number(); };

    Decision d;
    d.seg_id = require("seg_id", is_string).get<std::string>();
    d.chosen_index = require("chosen_index", is_index).get<std::size_t>();
    d.chosen_text = require("chosen_text", is_string).get<std::string>();
    d.expected_utility = require("expected_utility", is_number).get<double>();
    d.utility_id = require("utility", is_string).get<std::string>();
    d.config_digest = require("config_digest", is_string).get<std::string>();
    if (rec.contains("chosen_logp")) d.chosen_logp = require("chosen_logp", is_number).get<double>();
    if (rec.contains("map_index")) d.map_index = require("map_index", is_index).get<std::size_t>();
    if (rec.contains("pool_size")) d.pool_size = require("pool_size", is_index).get<std::size_t>();
    if (rec.contains("eref_size")) d.eref_size = require("eref_size", is_index).get<std::size_t>();
    if (rec.contains("risk")) {
      const auto& risk = require("risk", [](const json& j) { return j.is_array(); });
      for (const auto& v : risk) {
        if (!v.is_number()) throw line_error("malformed", origin, lineno, "non-numeric risk entry", line);
        d.risk_vector.push_back(v.get<double>());
      }
    }
    out.push_back(std::move(d));
  }
  return out;
}

void write_decisions(std::span<const Decision> decisions, const std::filesystem::path& path) {
  write_text_file(path, format_decisions(decisions));
}

std::vector<Decision> read_decisions(const std::filesystem::path& path) {
  return parse_decisions(read_text_file(path), path.string());
}

// ---------------------------------------------------------------------------
// QE scores and MQM annotations
// ---------------------------------------------------------------------------

QeScores read_qe_scores(const std::filesystem::path& path) {
  const std::string bytes = read_text_file(path);
  QeScores out;
  const auto lines = split_lines(bytes);
  for (std::size_t k = 0; k < lines.size(); ++k) {
    if (lines[k].empty() || lines[k].starts_with('#')) continue;
    const auto fields = split_tabs(lines[k]);
    std::size_t index = 0;
    double score = 0.0;
    if (fields.size() != 3 || !parse_index(fields[1], index) || !parse_real(fields[2], score)) {
      throw line_error("malformed", path.string(), k + 1, "expected <seg_id>\\t<index>\\t<score>", lines[k]);
    }
    if (!out[std::string(fields[0])].emplace(index, score).second) {
      throw line_error("duplicate", path.string(), k + 1, "duplicate score for candidate", lines[k]);
    }
  }
  return out;
}

std::vector<MqmAnnotation> read_mqm_annotations(const std::filesystem::path& path) {
  const std::string bytes = read_text_file(path);
  std::vector<MqmAnnotation> out;
  const auto lines = split_lines(bytes);
  for (std::size_t k = 0; k < lines.size(); ++k) {
    if (lines[k].empty() || lines[k].starts_with('#')) continue;
    const auto fields = split_tabs(lines[k]);
    if (fields.size() != 4 || fields[0].empty() || fields[1].empty() || fields[3].empty()) {
      throw line_error("malformed", path.string(), k + 1, "expected <seg_id>\\t<rater>\\t<severity>\\t<category>",
                       lines[k]);
    }
    std::string severity(fields[2]);
    std::transform(severity.begin(), severity.end(), severity.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    MqmAnnotation a;
    a.seg_id = std::string(fields[0]);
    a.rater = std::string(fields[1]);
    a.category = std::string(fields[3]);
    if (severity == "major") {
      a.severity = Severity::kMajor;
    } else if (severity == "minor") {
      a.severity = Severity::kMinor;
    } else {
      throw line_error("malformed", path.string(), k + 1, "severity must be major or minor", lines[k]);
    }
    out.push_back(std::move(a));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Manifest
// ---------------------------------------------------------------------------

void RunManifest::add_input(const std::filesystem::path& path) { inputs.emplace_back(path.string(), sha256_file(path)); }

std::string RunManifest::to_json() const {
  json j;
  j["tool"] = "mbrlab";
  j["version"] = std::string(kToolVersion);
  j["command"] = command;
  j["config"] = config;
  j["seed"] = seed;
  j["rng"] = std::string(SeededRng::kName);
  json in = json::array();
  for (const auto& [path, digest] : inputs) in.push_back({{"path", path}, {"sha256", digest}});
  j["inputs"] = in;
  return j.dump(2) + "\n";
}

void write_manifest(const RunManifest& manifest, const std::filesystem::path& path) {
  write_text_file(path, manifest.to_json());
}

}  // namespace mbrlab
