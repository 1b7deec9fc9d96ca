#include "mbrlab/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <map>
#include <memory>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "mbrlab/analysis.hpp"
#include "mbrlab/bridge.hpp"
#include "mbrlab/error.hpp"
#include "mbrlab/io.hpp"
#include "mbrlab/mbr.hpp"
#include "mbrlab/metrics.hpp"
#include "mbrlab/simd/overlap.hpp"

namespace mbrlab {

namespace {

std::string fixed(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

int default_jobs() {
  if (const char* env = std::getenv("MBRLAB_JOBS")) {
    try {
      const int n = std::stoi(env);
      if (n >= 1) return n;
    } catch (const std::exception&) {
    }
  }
  const auto hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

std::optional<std::uint64_t> parse_size(const std::string& text, const char* flag) {
  if (text.empty() || text == "all" || text == "ALL" || text == "full") return std::nullopt;
  try {
    std::size_t used = 0;
    const auto v = std::stoull(text, &used);
    if (used == text.size() && v >= 1) return v;
  } catch (const std::exception&) {
  }
  throw Error("config", std::string(flag) + " must be a positive integer or 'all', got '" + text + "'");
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::map<std::string, const CandidateSet*> index_by_seg(const std::vector<CandidateSet>& sets) {
  std::map<std::string, const CandidateSet*> out;
  for (const auto& s : sets) out.emplace(s.seg_id, &s);
  return out;
}

std::vector<std::string> seg_ids_of(const std::vector<CandidateSet>& sets) {
  std::vector<std::string> ids;
  ids.reserve(sets.size());
  for (const auto& s : sets) ids.push_back(s.seg_id);
  return ids;
}

// Decodes every segment; output order is input order regardless of jobs.
std::vector<Decision> decode_all(const std::vector<CandidateSet>& sets, const MbrConfig& config,
                                 const std::vector<CandidateSet>* e_sets, int jobs, BridgeClient* bridge) {
  config.validate();
  std::map<std::string, const CandidateSet*> e_index;
  if (e_sets) {
    e_index = index_by_seg(*e_sets);
    for (const auto& s : sets) {
      if (!e_index.contains(s.seg_id)) {
        throw Error("alignment", "E-list candidate file has no segment '" + s.seg_id + "'");
      }
    }
  }
  auto e_source = [&](const CandidateSet& s) -> const CandidateSet* {
    return e_sets ? e_index.at(s.seg_id) : nullptr;
  };

  std::vector<Decision> decisions(sets.size());
  const auto kind = config.utility.kind;
  if (kind == UtilityKind::kExternalBridge) {
    if (!bridge) throw Error("config", "bridge utility needs a running scorer");
    BridgeProvider provider(*bridge);
    for (std::size_t k = 0; k < sets.size(); ++k) decisions[k] = mbr_decode(sets[k], config, provider, e_source(sets[k]));
    return decisions;
  }

  const int outer = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(jobs), sets.size()));
  const int inner = outer > 1 ? 1 : jobs;
  std::unique_ptr<MatrixProvider> provider;
  if (kind == UtilityKind::kExternalMatrix) {
    provider = std::make_unique<MatrixFileProvider>(config.utility.params.at("path"));
  } else {
    provider = std::make_unique<InCoreProvider>(config.utility, BuildOptions{inner, true});
  }

  std::vector<std::exception_ptr> failures(sets.size());
  const auto n = static_cast<std::int64_t>(sets.size());
#pragma omp parallel for schedule(dynamic, 1) num_threads(std::max(outer, 1))
  for (std::int64_t k = 0; k < n; ++k) {
    try {
      decisions[k] = mbr_decode(sets[k], config, *provider, e_source(sets[k]));
    } catch (...) {
      failures[k] = std::current_exception();
    }
  }
  for (const auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }
  return decisions;
}

struct CommonFlags {
  int jobs = default_jobs();
  std::string manifest;
};

std::string manifest_path(const std::string& out, const std::string& explicit_path) {
  if (!explicit_path.empty()) return explicit_path;
  if (!out.empty() && out != "-") return out + ".manifest.json";
  return {};
}

void emit(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
  } else {
    write_text_file(path, text);
  }
}

// ---------------------------------------------------------------------------
// decode
// ---------------------------------------------------------------------------

struct DecodeFlags {
  std::string candidates;
  std::string utility;
  std::string e_size;
  std::string max_size;
  std::string e_prune = "random";
  std::string max_prune = "random";
  std::uint64_t seed = 0;
  std::string e_candidates;
  std::string out;
};

MbrConfig make_config(const DecodeFlags& f) {
  MbrConfig config;
  config.utility = UtilitySpec::parse(f.utility);
  config.e_size = parse_size(f.e_size, "--e-size");
  config.max_size = parse_size(f.max_size, "--max-size");
  config.e_prune = parse_prune_mode(f.e_prune);
  config.max_prune = parse_prune_mode(f.max_prune);
  config.seed = f.seed;
  if (!f.e_candidates.empty()) config.e_source_override = f.e_candidates;
  config.validate();
  return config;
}

std::map<std::string, std::string> config_fields(const MbrConfig& c) {
  auto size = [](const std::optional<std::uint64_t>& s) { return s ? std::to_string(*s) : std::string("all"); };
  return {{"utility", c.utility.to_string()},
          {"e_size", size(c.e_size)},
          {"max_size", size(c.max_size)},
          {"e_prune", to_string(c.e_prune)},
          {"max_prune", to_string(c.max_prune)},
          {"e_candidates", c.e_source_override.value_or("")},
          {"config_digest", c.digest()}};
}

void add_utility_input(RunManifest& manifest, const MbrConfig& config, const std::vector<CandidateSet>& sets) {
  if (config.utility.kind != UtilityKind::kExternalMatrix) return;
  MatrixFileProvider provider(config.utility.params.at("path"));
  std::set<std::string> paths;
  for (const auto& s : sets) paths.insert(provider.path_for(s.seg_id));
  for (const auto& p : paths) {
    if (std::filesystem::exists(p)) manifest.add_input(p);
  }
}

int cmd_decode(const DecodeFlags& f, const CommonFlags& common, std::ostream& out) {
  const MbrConfig config = make_config(f);
  const auto sets = read_candidates(f.candidates);
  std::vector<CandidateSet> e_sets;
  if (!f.e_candidates.empty()) e_sets = read_candidates(f.e_candidates);

  std::unique_ptr<BridgeClient> bridge;
  if (config.utility.kind == UtilityKind::kExternalBridge) {
    bridge = std::make_unique<BridgeClient>(config.utility.params.at("command"));
  }
  const auto decisions = decode_all(sets, config, f.e_candidates.empty() ? nullptr : &e_sets, common.jobs, bridge.get());
  if (bridge) bridge->close();

  write_decisions(decisions, f.out);

  RunManifest manifest;
  manifest.command = "decode";
  manifest.config = config_fields(config);
  manifest.seed = config.seed;
  manifest.add_input(f.candidates);
  if (!f.e_candidates.empty()) manifest.add_input(f.e_candidates);
  add_utility_input(manifest, config, sets);
  write_manifest(manifest, manifest_path(f.out, common.manifest));

  double eu = 0.0;
  double lp = 0.0;
  std::size_t lp_count = 0;
  for (const auto& d : decisions) {
    eu += d.expected_utility;
    if (d.chosen_logp) {
      lp += *d.chosen_logp;
      ++lp_count;
    }
  }
  const double n = decisions.empty() ? 1.0 : static_cast<double>(decisions.size());
  out << "segments=" << decisions.size() << " utility=" << config.utility.id() << " mean_expected_utility="
      << fixed(eu / n) << " mean_chosen_logp=" << (lp_count ? fixed(lp / static_cast<double>(lp_count)) : "n/a")
      << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// prune-sweep
// ---------------------------------------------------------------------------

struct SweepFlags {
  std::string candidates;
  std::string references;
  std::string ref_format = "auto";
  std::string utility;
  std::string eval_metric = "sbleu";
  std::string sizes = "1,2,4,8,16,32,64,128,256,512,all";
  std::string sides = "e,max,both";
  std::string modes = "random,logp";
  std::uint64_t seed = 0;
  std::string e_candidates;
  std::string out;
};

int cmd_prune_sweep(const SweepFlags& f, const CommonFlags& common, std::ostream& out) {
  const auto sets = read_candidates(f.candidates);
  std::vector<CandidateSet> e_sets;
  if (!f.e_candidates.empty()) e_sets = read_candidates(f.e_candidates);
  const auto ids = seg_ids_of(sets);
  const auto refs = read_references(f.references, ids, parse_text_format(f.ref_format));
  const UtilitySpec eval = UtilitySpec::parse(f.eval_metric);
  if (!eval.in_core()) throw Error("config", "--eval-metric must be sbleu or chrf");

  const UtilitySpec utility = UtilitySpec::parse(f.utility);
  std::unique_ptr<BridgeClient> bridge;
  if (utility.kind == UtilityKind::kExternalBridge) bridge = std::make_unique<BridgeClient>(utility.params.at("command"));

  std::string table =
      "size\tside\tmode\te_size\tmax_size\tmean_pool_size\tmean_eref_size\tmean_expected_utility\tmean_actual_utility\n";
  for (const auto& size_text : split_list(f.sizes)) {
    const auto size = parse_size(size_text, "--sizes");
    for (const auto& side : split_list(f.sides)) {
      if (side != "e" && side != "max" && side != "both") {
        throw Error("config", "--sides entries must be e, max or both; got '" + side + "'");
      }
      for (const auto& mode_text : split_list(f.modes)) {
        MbrConfig config;
        config.utility = utility;
        config.seed = f.seed;
        config.e_prune = config.max_prune = parse_prune_mode(mode_text);
        if (side == "e" || side == "both") config.e_size = size;
        if (side == "max" || side == "both") config.max_size = size;
        if (!f.e_candidates.empty()) config.e_source_override = f.e_candidates;

        const auto decisions =
            decode_all(sets, config, f.e_candidates.empty() ? nullptr : &e_sets, common.jobs, bridge.get());
        double pool = 0.0, erefs = 0.0, expected = 0.0, actual = 0.0;
        for (const auto& d : decisions) {
          pool += static_cast<double>(d.pool_size);
          erefs += static_cast<double>(d.eref_size);
          expected += d.expected_utility;
          actual += mbrlab::utility(eval.kind, d.chosen_text, refs.by_seg.at(d.seg_id));
        }
        const double n = static_cast<double>(decisions.size());
        table += (size ? std::to_string(*size) : std::string("all")) + "\t" + side + "\t" + mode_text + "\t" +
                 (config.e_size ? std::to_string(*config.e_size) : std::string("all")) + "\t" +
                 (config.max_size ? std::to_string(*config.max_size) : std::string("all")) + "\t" + fixed(pool / n) +
                 "\t" + fixed(erefs / n) + "\t" + fixed(expected / n, 6) + "\t" + fixed(actual / n, 6) + "\n";
      }
    }
  }
  if (bridge) bridge->close();
  emit(f.out, table, out);

  if (const auto mpath = manifest_path(f.out, common.manifest); !mpath.empty()) {
    RunManifest manifest;
    manifest.command = "prune-sweep";
    manifest.config = {{"utility", utility.to_string()}, {"eval_metric", eval.to_string()}, {"sizes", f.sizes},
                       {"sides", f.sides},               {"modes", f.modes},                {"e_candidates", f.e_candidates}};
    manifest.seed = f.seed;
    manifest.add_input(f.candidates);
    manifest.add_input(f.references);
    if (!f.e_candidates.empty()) manifest.add_input(f.e_candidates);
    write_manifest(manifest, mpath);
  }
  return 0;
}

// ---------------------------------------------------------------------------
// oracle
// ---------------------------------------------------------------------------

struct OracleFlags {
  std::string candidates;
  std::string references;
  std::string ref_format = "auto";
  std::string decisions;
  std::string metric = "sbleu";
  std::string out;
};

int cmd_oracle(const OracleFlags& f, const CommonFlags& common, std::ostream& out) {
  const auto sets = read_candidates(f.candidates);
  const auto ids = seg_ids_of(sets);
  const auto refs = read_references(f.references, ids, parse_text_format(f.ref_format));
  const UtilitySpec metric = UtilitySpec::parse(f.metric);
  if (!metric.in_core()) throw Error("config", "--metric must be sbleu or chrf");

  std::map<std::string, Decision> by_seg;
  if (!f.decisions.empty()) {
    for (auto& d : read_decisions(f.decisions)) by_seg.emplace(d.seg_id, std::move(d));
  }

  std::string table = "seg_id\toracle_index\toracle_score";
  if (!by_seg.empty()) table += "\tdecision_index\tdecision_score\tdecision_rank";
  table += "\n";
  std::vector<std::uint64_t> ranks;
  double oracle_sum = 0.0;
  double decision_sum = 0.0;
  for (const auto& set : sets) {
    const auto& ref = refs.by_seg.at(set.seg_id);
    const auto scores = score_against(set.candidates, ref, metric);
    const auto oracle = oracle_select(scores);
    oracle_sum += oracle.score;
    table += set.seg_id + "\t" + std::to_string(oracle.index) + "\t" + fixed(oracle.score, 6);
    if (!by_seg.empty()) {
      const auto it = by_seg.find(set.seg_id);
      if (it == by_seg.end()) throw Error("alignment", "decision file has no segment '" + set.seg_id + "'");
      const auto& text = it->second.chosen_text;
      const auto pos = std::find_if(set.candidates.begin(), set.candidates.end(),
                                    [&](const Candidate& c) { return c.text == text; });
      if (pos == set.candidates.end()) {
        throw Error("alignment", "decision for '" + set.seg_id + "' is not in its candidate pool");
      }
      const auto index = static_cast<std::size_t>(pos - set.candidates.begin());
      std::vector<std::uint32_t> weights;
      for (const auto& c : set.candidates) weights.push_back(c.count);
      const auto rank = rank_of(scores, index, weights);
      ranks.push_back(rank);
      decision_sum += scores[index];
      table += "\t" + std::to_string(index) + "\t" + fixed(scores[index], 6) + "\t" + std::to_string(rank);
    }
    table += "\n";
  }
  emit(f.out, table, out);

  const double n = sets.empty() ? 1.0 : static_cast<double>(sets.size());
  out << "segments=" << sets.size() << " metric=" << metric.id() << " mean_oracle=" << fixed(oracle_sum / n);
  if (!ranks.empty()) {
    const auto report = percentiles(ranks);
    out << " mean_decision=" << fixed(decision_sum / n) << " rank_p5=" << report.p5 << " rank_p25=" << report.p25
        << " rank_p50=" << report.p50 << " rank_p75=" << report.p75 << " rank_p95=" << report.p95;
  }
  out << "\n";

  if (const auto mpath = manifest_path(f.out, common.manifest); !mpath.empty()) {
    RunManifest manifest;
    manifest.command = "oracle";
    manifest.config = {{"metric", metric.to_string()}};
    manifest.add_input(f.candidates);
    manifest.add_input(f.references);
    if (!f.decisions.empty()) manifest.add_input(f.decisions);
    write_manifest(manifest, mpath);
  }
  return 0;
}

// ---------------------------------------------------------------------------
// rerank
// ---------------------------------------------------------------------------

struct RerankFlags {
  std::string candidates;
  std::string qe;
  std::string out;
};

int cmd_rerank(const RerankFlags& f, const CommonFlags& common, std::ostream& out) {
  const auto sets = read_candidates(f.candidates);
  std::vector<Decision> decisions;
  decisions.reserve(sets.size());

  std::unique_ptr<BridgeClient> bridge;
  QeScores file_scores;
  std::string source_id;
  if (f.qe.starts_with("bridge:")) {
    bridge = std::make_unique<BridgeClient>(f.qe.substr(7));
    source_id = "qe:bridge:" + bridge->scorer_name();
  } else {
    file_scores = read_qe_scores(f.qe);
    source_id = "qe:file";
  }

  for (const auto& set : sets) {
    std::vector<double> scores;
    if (bridge) {
      scores = bridge_quality_estimates(*bridge, set.candidates, set.source);
    } else {
      const auto it = file_scores.find(set.seg_id);
      if (it == file_scores.end()) throw Error("alignment", f.qe + ": no QE scores for segment '" + set.seg_id + "'");
      for (std::size_t k = 0; k < set.candidates.size(); ++k) {
        const auto s = it->second.find(k);
        if (s == it->second.end()) {
          throw Error("alignment", f.qe + ": segment '" + set.seg_id + "' lacks a score for candidate " + std::to_string(k));
        }
        scores.push_back(s->second);
      }
      if (it->second.size() != set.candidates.size()) {
        throw Error("alignment", f.qe + ": segment '" + set.seg_id + "' has " + std::to_string(it->second.size()) +
                                     " scores for " + std::to_string(set.candidates.size()) + " candidates");
      }
    }
    Decision d;
    d.seg_id = set.seg_id;
    d.chosen_index = qe_rerank(set.candidates, scores);
    d.chosen_text = set.candidates[d.chosen_index].text;
    d.expected_utility = scores[d.chosen_index];
    d.chosen_logp = set.candidates[d.chosen_index].logp;
    if (std::all_of(set.candidates.begin(), set.candidates.end(), [](const Candidate& c) { return c.logp.has_value(); })) {
      d.map_index = map_baseline(set.candidates);
    }
    d.risk_vector = std::move(scores);
    d.pool_size = set.candidates.size();
    d.eref_size = 0;
    d.utility_id = source_id;
    d.config_digest = "qe";
    decisions.push_back(std::move(d));
  }
  if (bridge) bridge->close();
  write_decisions(decisions, f.out);

  RunManifest manifest;
  manifest.command = "rerank";
  manifest.config = {{"qe", f.qe}};
  manifest.add_input(f.candidates);
  if (!bridge) manifest.add_input(f.qe);
  write_manifest(manifest, manifest_path(f.out, common.manifest));
  out << "segments=" << decisions.size() << " source=" << source_id << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// cross-bleu
// ---------------------------------------------------------------------------

struct CrossBleuFlags {
  std::vector<std::string> systems;
  std::string format = "auto";
  std::string out;
};

int cmd_cross_bleu(const CrossBleuFlags& f, const CommonFlags& common, std::ostream& out) {
  std::vector<SystemOutput> systems;
  std::vector<std::string> paths;
  for (const auto& spec : f.systems) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == spec.size()) {
      throw Error("config", "--system expects NAME=PATH, got '" + spec + "'");
    }
    SystemOutput sys;
    sys.name = spec.substr(0, eq);
    paths.push_back(spec.substr(eq + 1));
    for (auto& [id, text] : read_segments(paths.back(), parse_text_format(f.format))) sys.segments.emplace(id, text);
    systems.push_back(std::move(sys));
  }
  const auto m = cross_bleu_matrix(systems);
  std::string table = "hyp\\ref";
  for (const auto& name : m.names) table += "\t" + name;
  table += "\n";
  for (std::size_t a = 0; a < m.names.size(); ++a) {
    table += m.names[a];
    for (double v : m.values[a]) table += "\t" + fixed(v, 2);
    table += "\n";
  }
  emit(f.out, table, out);
  if (const auto mpath = manifest_path(f.out, common.manifest); !mpath.empty()) {
    RunManifest manifest;
    manifest.command = "cross-bleu";
    manifest.config = {{"signature", corpus_bleu_signature()}};
    for (const auto& p : paths) manifest.add_input(p);
    write_manifest(manifest, mpath);
  }
  return 0;
}

// ---------------------------------------------------------------------------
// score
// ---------------------------------------------------------------------------

struct ScoreFlags {
  std::string hyp;
  std::string decisions;
  std::string ref;
  std::string format = "auto";
  std::string segments_out;
  std::string out;
};

int cmd_score(const ScoreFlags& f, const CommonFlags& common, std::ostream& out) {
  if (f.hyp.empty() == f.decisions.empty()) throw Error("config", "score needs exactly one of --hyp or --decisions");
  std::vector<std::pair<std::string, std::string>> hyps;
  if (!f.hyp.empty()) {
    hyps = read_segments(f.hyp, parse_text_format(f.format));
  } else {
    for (auto& d : read_decisions(f.decisions)) hyps.emplace_back(d.seg_id, d.chosen_text);
  }
  std::vector<std::string> ids;
  for (const auto& [id, text] : hyps) ids.push_back(id);
  const auto refs = read_references(f.ref, ids, parse_text_format(f.format));

  std::vector<TokenSequence> hyp_toks, ref_toks;
  std::string per_seg = "seg_id\tsbleu\tchrf\n";
  double sbleu_sum = 0.0, chrf_sum = 0.0;
  for (const auto& [id, text] : hyps) {
    const auto& ref = refs.by_seg.at(id);
    hyp_toks.push_back(tokenize_13a(text));
    ref_toks.push_back(tokenize_13a(ref));
    const double sb = sentence_bleu_add1(hyp_toks.back(), ref_toks.back()).value;
    const double cf = sentence_chrf(text, ref).value;
    sbleu_sum += sb;
    chrf_sum += cf;
    per_seg += id + "\t" + fixed(sb, 6) + "\t" + fixed(cf, 6) + "\n";
  }
  if (hyps.empty()) throw Error("alignment", "no segments to score");
  const double n = static_cast<double>(hyps.size());
  const double bleu = corpus_bleu(hyp_toks, ref_toks).value;

  std::string report;
  report += "BLEU\t" + fixed(bleu) + "\t" + corpus_bleu_signature() + "\n";
  report += "sBLEU_mean\t" + fixed(sbleu_sum / n) + "\t" + sentence_bleu_signature() + "\n";
  report += "chrF_mean\t" + fixed(chrf_sum / n) + "\t" + chrf_signature() + "\n";
  report += "segments\t" + std::to_string(hyps.size()) + "\n";
  emit(f.out, report, out);
  if (!f.segments_out.empty()) write_text_file(f.segments_out, per_seg);

  if (const auto mpath = manifest_path(f.out, common.manifest); !mpath.empty()) {
    RunManifest manifest;
    manifest.command = "score";
    manifest.add_input(f.hyp.empty() ? f.decisions : f.hyp);
    manifest.add_input(f.ref);
    write_manifest(manifest, mpath);
  }
  return 0;
}

// ---------------------------------------------------------------------------
// mqm
// ---------------------------------------------------------------------------

struct MqmFlags {
  std::string annotations;
  std::string segments;
  std::string raters;
  std::string out;
};

int cmd_mqm(const MqmFlags& f, const CommonFlags& common, std::ostream& out) {
  const auto annotations = read_mqm_annotations(f.annotations);
  std::vector<std::string> segments;
  if (!f.segments.empty()) {
    const std::string bytes = read_text_file(f.segments);
    for (const auto line : split_lines(bytes)) {
      if (!line.empty()) segments.emplace_back(line.substr(0, line.find('\t')));
    }
  } else {
    std::set<std::string> seen;
    for (const auto& a : annotations) {
      if (seen.insert(a.seg_id).second) segments.push_back(a.seg_id);
    }
  }
  const auto raters = split_list(f.raters);
  const auto result = mqm_score(annotations, segments, raters);

  std::string table;
  for (const auto& [id, score] : result.segments) table += "segment\t" + id + "\t" + fixed(score) + "\n";
  table += "overall\t" + fixed(result.overall) + "\n";
  table += "raters\t" + std::to_string(result.raters.size()) + "\n";
  emit(f.out, table, out);

  if (const auto mpath = manifest_path(f.out, common.manifest); !mpath.empty()) {
    RunManifest manifest;
    manifest.command = "mqm";
    manifest.config = {{"raters", f.raters}};
    manifest.add_input(f.annotations);
    if (!f.segments.empty()) manifest.add_input(f.segments);
    write_manifest(manifest, mpath);
  }
  return 0;
}

void add_common(CLI::App* sub, CommonFlags& common) {
  sub->add_option("--jobs", common.jobs, "Worker threads (default: $MBRLAB_JOBS or all cores)")->check(CLI::PositiveNumber);
  sub->add_option("--manifest", common.manifest, "Manifest path (default: <out>.manifest.json)");
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"mbrlab: minimum Bayes risk decoding over sampled translation candidates"};
  app.name(args.empty() ? "mbrlab" : args.front());
  app.require_subcommand(1);
  std::string isa;
  app.add_option("--isa", isa, "Force the overlap kernel: scalar|avx2|neon");

  CommonFlags common;

  DecodeFlags decode;
  auto* c_decode = app.add_subcommand("decode", "Select one candidate per segment by expected utility");
  c_decode->add_option("--candidates", decode.candidates, "Candidate file (JSON lines)")->required();
  c_decode->add_option("--utility", decode.utility, "sbleu | chrf | matrix:<path> | bridge:<cmd>")->required();
  c_decode->add_option("--e-size", decode.e_size, "Pseudo-reference list size (integer or all)");
  c_decode->add_option("--max-size", decode.max_size, "Candidate pool size (integer or all)");
  c_decode->add_option("--e-prune", decode.e_prune, "random | logp | random-distinct");
  c_decode->add_option("--max-prune", decode.max_prune, "random | logp | random-distinct");
  c_decode->add_option("--seed", decode.seed, "Random seed");
  c_decode->add_option("--e-candidates", decode.e_candidates, "Separate candidate file for the pseudo-references");
  c_decode->add_option("--out", decode.out, "Decision file")->required();
  add_common(c_decode, common);

  SweepFlags sweep;
  auto* c_sweep = app.add_subcommand("prune-sweep", "Decode over a grid of list sizes and pruning modes");
  c_sweep->add_option("--candidates", sweep.candidates)->required();
  c_sweep->add_option("--references", sweep.references)->required();
  c_sweep->add_option("--ref-format", sweep.ref_format, "auto | plain | keyed");
  c_sweep->add_option("--utility", sweep.utility)->required();
  c_sweep->add_option("--eval-metric", sweep.eval_metric, "sbleu | chrf");
  c_sweep->add_option("--sizes", sweep.sizes, "Comma-separated sizes; 'all' keeps the full list");
  c_sweep->add_option("--sides", sweep.sides, "Comma-separated subset of e,max,both");
  c_sweep->add_option("--modes", sweep.modes, "Comma-separated subset of random,logp,random-distinct");
  c_sweep->add_option("--seed", sweep.seed);
  c_sweep->add_option("--e-candidates", sweep.e_candidates);
  c_sweep->add_option("--out", sweep.out, "TSV output (default stdout)");
  add_common(c_sweep, common);

  OracleFlags oracle;
  auto* c_oracle = app.add_subcommand("oracle", "Best candidate per segment against a human reference");
  c_oracle->add_option("--candidates", oracle.candidates)->required();
  c_oracle->add_option("--references", oracle.references)->required();
  c_oracle->add_option("--ref-format", oracle.ref_format, "auto | plain | keyed");
  c_oracle->add_option("--decisions", oracle.decisions, "Decision file to rank against the oracle");
  c_oracle->add_option("--metric", oracle.metric, "sbleu | chrf");
  c_oracle->add_option("--out", oracle.out, "TSV output (default stdout)");
  add_common(c_oracle, common);

  RerankFlags rerank;
  auto* c_rerank = app.add_subcommand("rerank", "Select by reference-free quality estimates");
  c_rerank->add_option("--candidates", rerank.candidates)->required();
  c_rerank->add_option("--qe", rerank.qe, "QE score file or bridge:<cmd>")->required();
  c_rerank->add_option("--out", rerank.out, "Decision file")->required();
  add_common(c_rerank, common);

  CrossBleuFlags cross;
  auto* c_cross = app.add_subcommand("cross-bleu", "Pairwise corpus BLEU between system outputs");
  c_cross->add_option("--system", cross.systems, "NAME=PATH (repeat)")->required();
  c_cross->add_option("--format", cross.format, "auto | plain | keyed");
  c_cross->add_option("--out", cross.out, "TSV output (default stdout)");
  add_common(c_cross, common);

  ScoreFlags score;
  auto* c_score = app.add_subcommand("score", "Corpus BLEU, mean sentence BLEU and mean chrF");
  c_score->add_option("--hyp", score.hyp, "Hypothesis text file");
  c_score->add_option("--decisions", score.decisions, "Decision file used as hypotheses");
  c_score->add_option("--ref", score.ref, "Reference file")->required();
  c_score->add_option("--format", score.format, "auto | plain | keyed");
  c_score->add_option("--segments-out", score.segments_out, "Per-segment TSV");
  c_score->add_option("--out", score.out, "Report output (default stdout)");
  add_common(c_score, common);

  MqmFlags mqm;
  auto* c_mqm = app.add_subcommand("mqm", "Aggregate MQM error annotations");
  c_mqm->add_option("--annotations", mqm.annotations)->required();
  c_mqm->add_option("--segments", mqm.segments, "File listing seg_ids (first tab field per line)");
  c_mqm->add_option("--raters", mqm.raters, "Comma-separated raters to include");
  c_mqm->add_option("--out", mqm.out, "TSV output (default stdout)");
  add_common(c_mqm, common);

  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "mbrlab: error: usage: " << e.what() << "\n";
    return static_cast<int>(ExitCode::kInput);
  }

  try {
    if (isa.empty()) {
      simd::force_isa(std::nullopt);
    } else {
      const auto parsed = simd::parse_isa(isa);
      if (!parsed) throw Error("config", "unknown ISA '" + isa + "'");
      if (!simd::isa_available(*parsed)) throw Error("config", "ISA '" + isa + "' is not available on this machine");
      simd::force_isa(parsed);
    }
    if (c_decode->parsed()) return cmd_decode(decode, common, out);
    if (c_sweep->parsed()) return cmd_prune_sweep(sweep, common, out);
    if (c_oracle->parsed()) return cmd_oracle(oracle, common, out);
    if (c_rerank->parsed()) return cmd_rerank(rerank, common, out);
    if (c_cross->parsed()) return cmd_cross_bleu(cross, common, out);
    if (c_score->parsed()) return cmd_score(score, common, out);
    if (c_mqm->parsed()) return cmd_mqm(mqm, common, out);
  } catch (const Error& e) {
    err << "mbrlab: error: " << e.kind() << ": " << e.what() << "\n";
    return static_cast<int>(e.exit_code());
  } catch (const std::exception& e) {
    err << "mbrlab: error: internal: " << e.what() << "\n";
    return static_cast<int>(ExitCode::kInput);
  }
  return static_cast<int>(ExitCode::kInput);
}

}  // namespace mbrlab
