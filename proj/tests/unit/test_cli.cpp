#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "../oracles.hpp"
#include "../support.hpp"
#include "mbrlab/cli.hpp"
#include "mbrlab/io.hpp"

using namespace mbrlab;

namespace {

struct Run {
  int code = -1;
  std::string out, err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "mbrlab");
  std::ostringstream out, err;
  Run r;
  r.code = run_cli(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string stub(const std::string& mode) { return std::string("'") + MBRLAB_STUB_SCORER + "' " + mode; }

// Three segments with duplicates and model scores.
struct Fixture {
  testsupport::TempDir dir;
  std::string candidates, references;
  std::vector<std::vector<Candidate>> raw;
  Fixture() {
    std::mt19937_64 rng(97);
    std::string jsonl, refs;
    for (int s = 0; s < 3; ++s) {
      raw.push_back(testsupport::random_samples(rng, 12, 6, 7));
      jsonl += testsupport::candidates_jsonl("seg" + std::to_string(s), raw.back(), "source " + std::to_string(s));
      refs += "seg" + std::to_string(s) + "\t" + testsupport::random_sentence(rng, 6, 2, 7) + "\n";
    }
    candidates = dir.write("cands.jsonl", jsonl).string();
    references = dir.write("refs.tsv", refs).string();
  }
  std::string path(const std::string& name) const { return (dir / name).string(); }
};

std::vector<std::string> split_rows(const std::string& table) {
  std::vector<std::string> rows;
  std::stringstream ss(table);
  std::string line;
  while (std::getline(ss, line)) rows.push_back(line);
  return rows;
}

std::vector<std::string> split_tabs(const std::string& row) {
  std::vector<std::string> out;
  std::stringstream ss(row);
  std::string cell;
  while (std::getline(ss, cell, '\t')) out.push_back(cell);
  return out;
}

}  // namespace

TEST(CliDecode, DefaultsMatchBruteForce) {
  Fixture f;
  const auto r = run({"decode", "--candidates", f.candidates, "--utility", "sbleu", "--out", f.path("d.jsonl")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("mean_expected_utility="), std::string::npos);
  EXPECT_NE(r.out.find("mean_chosen_logp="), std::string::npos);
  const auto ds = read_decisions(f.path("d.jsonl"));
  ASSERT_EQ(ds.size(), 3u);
  for (std::size_t s = 0; s < 3; ++s) {
    std::vector<std::string> expanded;
    for (const auto& c : f.raw[s]) expanded.push_back(c.text);
    const auto brute =
        oracle::mbr(expanded, [](const std::string& h, const std::string& ref) { return oracle::sbleu(h, ref); });
    EXPECT_EQ(ds[s].chosen_text, expanded[brute.index]);
    EXPECT_EQ(ds[s].seg_id, "seg" + std::to_string(s));
  }
  const auto manifest = nlohmann::json::parse(testsupport::slurp(f.path("d.jsonl.manifest.json")));
  EXPECT_EQ(manifest["command"], "decode");
  EXPECT_EQ(manifest["inputs"].size(), 1u);
}

TEST(CliDecode, SeededPruningIsReproducible) {
  Fixture f;
  const std::vector<std::string> common{"decode", "--candidates", f.candidates, "--utility", "chrf",
                                        "--e-size", "5", "--e-prune", "random", "--seed", "7"};
  auto a = common, b = common;
  a.insert(a.end(), {"--out", f.path("a.jsonl"), "--jobs", "1"});
  b.insert(b.end(), {"--out", f.path("b.jsonl"), "--jobs", "3"});
  ASSERT_EQ(run(a).code, 0);
  ASSERT_EQ(run(b).code, 0);
  EXPECT_EQ(testsupport::slurp(f.path("a.jsonl")), testsupport::slurp(f.path("b.jsonl")));
  for (const auto& d : read_decisions(f.path("a.jsonl"))) EXPECT_LE(d.eref_size, 5u);
}

TEST(CliDecode, WrongMatrixDimensionsFail) {
  Fixture f;
  f.dir.write("m.txt", "MBRMAT v1 1 1\nWEIGHTS 1\n50\n");
  const auto r = run({"decode", "--candidates", f.candidates, "--utility", "matrix:" + f.path("m.txt"), "--out",
                      f.path("d.jsonl")});
  EXPECT_EQ(r.code, 1);
  EXPECT_EQ(r.err.rfind("mbrlab: error: dimension:", 0), 0u) << r.err;
  EXPECT_EQ(std::count(r.err.begin(), r.err.end(), '\n'), 1);
}

TEST(CliDecode, MatrixFilePerSegment) {
  testsupport::TempDir dir;
  dir.write("c.jsonl",
            "{\"seg_id\":\"s1\",\"candidates\":[{\"text\":\"a\"},{\"text\":\"b\"},{\"text\":\"b\"}]}\n");
  // b scores higher against everything, so it wins despite the identity diagonal
  dir.write("m_s1.txt", "MBRMAT v1 2 2\nWEIGHTS 1 2\n10 0\n90 95\n");
  const auto r = run({"decode", "--candidates", (dir / "c.jsonl").string(), "--utility",
                      "matrix:" + (dir / "m_{seg}.txt").string(), "--out", (dir / "d.jsonl").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto d = read_decisions(dir / "d.jsonl");
  EXPECT_EQ(d[0].chosen_text, "b");
  EXPECT_NEAR(d[0].expected_utility, (90.0 + 2 * 95.0) / 3.0, 1e-12);
  const auto manifest = nlohmann::json::parse(testsupport::slurp(dir / "d.jsonl.manifest.json"));
  EXPECT_EQ(manifest["inputs"].size(), 2u);
}

TEST(CliDecode, BridgeUtility) {
  Fixture f;
  const auto r = run({"decode", "--candidates", f.candidates, "--utility", "bridge:" + stub("chrf"), "--out",
                      f.path("b.jsonl")});
  ASSERT_EQ(r.code, 0) << r.err;
  ASSERT_EQ(run({"decode", "--candidates", f.candidates, "--utility", "chrf", "--out", f.path("c.jsonl")}).code, 0);
  const auto b = read_decisions(f.path("b.jsonl"));
  const auto c = read_decisions(f.path("c.jsonl"));
  for (std::size_t k = 0; k < b.size(); ++k) {
    EXPECT_EQ(b[k].utility_id, "bridge:stub-chrf");
    for (std::size_t i = 0; i < b[k].risk_vector.size(); ++i) EXPECT_NEAR(b[k].risk_vector[i], c[k].risk_vector[i], 1e-6);
  }
}

TEST(CliDecode, BridgeFailureExitsTwo) {
  Fixture f;
  const auto r = run({"decode", "--candidates", f.candidates, "--utility", "bridge:" + stub("crash-always"), "--out",
                      f.path("x.jsonl")});
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(r.err.rfind("mbrlab: error: crash:", 0), 0u) << r.err;
}

TEST(CliDecode, UsageAndInputErrorsExitOne) {
  EXPECT_EQ(run({"decode"}).code, 1);
  EXPECT_EQ(run({"bogus-command"}).code, 1);
  Fixture f;
  const auto r = run({"decode", "--candidates", f.path("missing.jsonl"), "--utility", "sbleu", "--out", f.path("o")});
  EXPECT_EQ(r.code, 1);
  EXPECT_EQ(r.err.rfind("mbrlab: error: io:", 0), 0u) << r.err;
  const auto z = run({"decode", "--candidates", f.candidates, "--utility", "sbleu", "--e-size", "0", "--out", f.path("o")});
  EXPECT_EQ(z.code, 1);
  EXPECT_EQ(z.err.rfind("mbrlab: error: config:", 0), 0u) << z.err;
}

TEST(CliDecode, LogpPruningNeedsLogp) {
  testsupport::TempDir dir;
  dir.write("c.jsonl", "{\"seg_id\":\"s\",\"candidates\":[{\"text\":\"a\"},{\"text\":\"b\",\"logp\":-1}]}\n");
  const auto c = (dir / "c.jsonl").string();
  EXPECT_EQ(run({"decode", "--candidates", c, "--utility", "sbleu", "--out", (dir / "a").string()}).code, 0);
  const auto r = run({"decode", "--candidates", c, "--utility", "sbleu", "--max-size", "1", "--max-prune", "logp",
                      "--out", (dir / "b").string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("logP"), std::string::npos) << r.err;
}

TEST(CliPruneSweep, FullSizeRowEqualsPlainDecode) {
  Fixture f;
  const auto r = run({"prune-sweep", "--candidates", f.candidates, "--references", f.references, "--utility", "sbleu",
                      "--sizes", "all", "--sides", "both", "--modes", "random", "--out", f.path("t.tsv")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = split_rows(testsupport::slurp(f.path("t.tsv")));
  ASSERT_EQ(rows.size(), 2u);
  const auto cells = split_tabs(rows[1]);

  ASSERT_EQ(run({"decode", "--candidates", f.candidates, "--utility", "sbleu", "--out", f.path("d.jsonl")}).code, 0);
  const auto ds = read_decisions(f.path("d.jsonl"));
  const auto refs = read_references(f.references, std::vector<std::string>{"seg0", "seg1", "seg2"});
  double eu = 0, actual = 0;
  for (const auto& d : ds) {
    eu += d.expected_utility;
    actual += oracle::sbleu(d.chosen_text, refs.by_seg.at(d.seg_id));
  }
  EXPECT_NEAR(std::stod(cells[7]), eu / 3.0, 1e-6);
  EXPECT_NEAR(std::stod(cells[8]), actual / 3.0, 1e-6);
}

TEST(CliPruneSweep, GridMatchesPerPointDecodes) {
  testsupport::TempDir dir;
  dir.write("c.jsonl",
            "{\"seg_id\":\"s\",\"candidates\":[{\"text\":\"a b c\",\"logp\":-1},{\"text\":\"a b d\",\"logp\":-2},"
            "{\"text\":\"x b c\",\"logp\":-0.5},{\"text\":\"a b c\",\"logp\":-1}]}\n");
  dir.write("r.tsv", "s\ta b c d\n");
  const auto c = (dir / "c.jsonl").string();
  const auto r = run({"prune-sweep", "--candidates", c, "--references", (dir / "r.tsv").string(), "--utility", "sbleu",
                      "--sizes", "1,2,4", "--sides", "e,max,both", "--modes", "random,logp", "--seed", "3"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = split_rows(r.out);
  ASSERT_EQ(rows.size(), 1u + 3 * 3 * 2);
  for (std::size_t k = 1; k < rows.size(); ++k) {
    const auto cells = split_tabs(rows[k]);
    std::vector<std::string> args{"decode", "--candidates", c, "--utility", "sbleu", "--seed", "3",
                                  "--out", (dir / "p.jsonl").string()};
    if (cells[3] != "all") args.insert(args.end(), {"--e-size", cells[3], "--e-prune", cells[2]});
    if (cells[4] != "all") args.insert(args.end(), {"--max-size", cells[4], "--max-prune", cells[2]});
    ASSERT_EQ(run(args).code, 0);
    const auto d = read_decisions(dir / "p.jsonl")[0];
    EXPECT_NEAR(std::stod(cells[7]), d.expected_utility, 1e-6) << rows[k];
    EXPECT_NEAR(std::stod(cells[8]), oracle::sbleu(d.chosen_text, "a b c d"), 1e-6) << rows[k];
    EXPECT_EQ(std::stod(cells[5]), static_cast<double>(d.pool_size));
    EXPECT_EQ(std::stod(cells[6]), static_cast<double>(d.eref_size));
    if (cells[1] == "e" && cells[0] == "1") {
      EXPECT_EQ(d.eref_size, 1u);
    }
  }
}

TEST(CliOracle, DominatesDecisions) {
  Fixture f;
  ASSERT_EQ(run({"decode", "--candidates", f.candidates, "--utility", "sbleu", "--out", f.path("d.jsonl")}).code, 0);
  const auto r = run({"oracle", "--candidates", f.candidates, "--references", f.references, "--decisions",
                      f.path("d.jsonl"), "--metric", "sbleu", "--out", f.path("o.tsv")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("rank_p50="), std::string::npos);
  const auto rows = split_rows(testsupport::slurp(f.path("o.tsv")));
  ASSERT_EQ(rows.size(), 4u);
  for (std::size_t k = 1; k < rows.size(); ++k) {
    const auto cells = split_tabs(rows[k]);
    EXPECT_GE(std::stod(cells[2]), std::stod(cells[4]));
    EXPECT_GE(std::stoi(cells[5]), 1);
  }
}

TEST(CliRerank, QeFileAndBridge) {
  testsupport::TempDir dir;
  dir.write("c.jsonl",
            "{\"seg_id\":\"s1\",\"source\":\"src\",\"candidates\":[{\"text\":\"a\"},{\"text\":\"b\"},{\"text\":\"c\"}]}\n");
  dir.write("qe.tsv", "s1\t0\t0.1\ns1\t1\t0.9\ns1\t2\t0.5\n");
  const auto r = run({"rerank", "--candidates", (dir / "c.jsonl").string(), "--qe", (dir / "qe.tsv").string(), "--out",
                      (dir / "r.jsonl").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto d = read_decisions(dir / "r.jsonl");
  EXPECT_EQ(d[0].chosen_index, 1u);
  EXPECT_EQ(d[0].chosen_text, "b");
  EXPECT_EQ(d[0].expected_utility, 0.9);

  dir.write("short.tsv", "s1\t0\t0.1\ns1\t1\t0.9\n");
  const auto bad = run({"rerank", "--candidates", (dir / "c.jsonl").string(), "--qe", (dir / "short.tsv").string(),
                        "--out", (dir / "x.jsonl").string()});
  EXPECT_EQ(bad.code, 1);
  EXPECT_NE(bad.err.find("candidate 2"), std::string::npos) << bad.err;

  const auto br = run({"rerank", "--candidates", (dir / "c.jsonl").string(), "--qe", "bridge:" + stub("srclen"),
                       "--out", (dir / "b.jsonl").string()});
  ASSERT_EQ(br.code, 0) << br.err;
  EXPECT_EQ(read_decisions(dir / "b.jsonl")[0].chosen_index, 0u);
}

TEST(CliCrossBleu, DuplicatedSystemsAllHundred) {
  testsupport::TempDir dir;
  dir.write("a.txt", "the cat sat on the mat\na dog barked\n");
  dir.write("b.txt", "the cat sat on the mat\na dog barked\n");
  const auto r = run({"cross-bleu", "--system", "A=" + (dir / "a.txt").string(), "--system",
                      "B=" + (dir / "b.txt").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = split_rows(r.out);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[1], "A\t100.00\t100.00");
  EXPECT_EQ(rows[2], "B\t100.00\t100.00");
  EXPECT_EQ(run({"cross-bleu", "--system", "noequals"}).code, 1);
}

TEST(CliScore, CorpusAndSentenceScores) {
  testsupport::TempDir dir;
  dir.write("h.txt", "The cat is on the mat.\nThere is a dog in the garden today.\nEr kam sp\xc3\xa4t nach Hause.\n");
  dir.write("r.txt", "The cat sat on the mat.\nA dog is in the garden.\nEr kam sehr sp\xc3\xa4t nach Hause.\n");
  const auto r = run({"score", "--hyp", (dir / "h.txt").string(), "--ref", (dir / "r.txt").string(), "--segments-out",
                      (dir / "seg.tsv").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out.rfind("BLEU\t37.9322\t", 0), 0u) << r.out;
  EXPECT_EQ(split_rows(testsupport::slurp(dir / "seg.tsv")).size(), 4u);
  EXPECT_EQ(run({"score", "--ref", (dir / "r.txt").string()}).code, 1);
}

TEST(CliMqm, OneMajorError) {
  testsupport::TempDir dir;
  dir.write("a.tsv", "s1\trater1\tmajor\tAccuracy/Mistranslation\n");
  const auto r = run({"mqm", "--annotations", (dir / "a.tsv").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("segment\ts1\t5.0000\n"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("overall\t5.0000\n"), std::string::npos) << r.out;

  dir.write("segs.txt", "s1\ns2\n");
  const auto two = run({"mqm", "--annotations", (dir / "a.tsv").string(), "--segments", (dir / "segs.txt").string()});
  EXPECT_NE(two.out.find("overall\t2.5000\n"), std::string::npos) << two.out;
}

TEST(Cli, ForcedIsa) {
  Fixture f;
  const auto r = run({"--isa", "scalar", "decode", "--candidates", f.candidates, "--utility", "sbleu", "--out",
                      f.path("s.jsonl")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(run({"--isa", "mmx", "decode", "--candidates", f.candidates, "--utility", "sbleu", "--out", f.path("x")}).code,
            1);
  ASSERT_EQ(run({"decode", "--candidates", f.candidates, "--utility", "sbleu", "--out", f.path("a.jsonl")}).code, 0);
  EXPECT_EQ(testsupport::slurp(f.path("s.jsonl")), testsupport::slurp(f.path("a.jsonl")));
}
