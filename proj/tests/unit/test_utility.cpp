#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "../oracles.hpp"
#include "../support.hpp"
#include "mbrlab/error.hpp"
#include "mbrlab/simd/overlap.hpp"
#include "mbrlab/utility.hpp"

using namespace mbrlab;

namespace {

CandidateList texts(std::initializer_list<const char*> items) {
  CandidateList out;
  for (const char* t : items) out.push_back({t, std::nullopt, 1});
  return out;
}

CandidateList random_pool(std::mt19937_64& rng, int n, int vocab, int max_len) {
  CandidateList out;
  for (int k = 0; k < n; ++k) out.push_back({testsupport::random_sentence(rng, vocab, 1, max_len), std::nullopt, 1});
  return out;
}

std::string kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind() + ": " + e.what();
  }
  return "no error";
}

}  // namespace

TEST(Collapse, MergesAndKeepsFirstOccurrence) {
  const CandidateList in{{"a", -1.0, 1}, {"b", -2.0, 1}, {"a", -1.0, 1}};
  const CandidateList want{{"a", -1.0, 2}, {"b", -2.0, 1}};
  EXPECT_EQ(collapse_duplicates(in), want);
}

TEST(Collapse, DistinctListUnchanged) {
  const auto in = texts({"a", "b", "c", "d", "e"});
  EXPECT_EQ(collapse_duplicates(in), in);
}

TEST(Collapse, ThousandCopies) {
  const CandidateList in(1000, Candidate{"same", -0.5, 1});
  const auto out = collapse_duplicates(in);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].count, 1000u);
  EXPECT_EQ(total_count(out), 1000u);
  EXPECT_EQ(expand(out).size(), 1000u);
}

TEST(Collapse, SumsExistingCounts) {
  const CandidateList in{{"x", std::nullopt, 2}, {"y", std::nullopt, 1}, {"x", std::nullopt, 3}};
  EXPECT_EQ(collapse_duplicates(in), (CandidateList{{"x", std::nullopt, 5}, {"y", std::nullopt, 1}}));
}

TEST(BuildMatrix, Identity) {
  const auto m = build_matrix(texts({"x"}), texts({"x"}), UtilitySpec::sentence_bleu());
  ASSERT_EQ(m.pool_size, 1u);
  EXPECT_EQ(m.at(0, 0), 100.0);
}

TEST(BuildMatrix, ChrfIdentityAndDisjoint) {
  const auto m = build_matrix(texts({"a b", "c d"}), texts({"a b"}), UtilitySpec::chrf());
  EXPECT_EQ(m.at(0, 0), 100.0);
  EXPECT_EQ(m.at(1, 0), 0.0);
}

TEST(BuildMatrix, WeightsAndIds) {
  const CandidateList erefs{{"a", std::nullopt, 3}, {"b", std::nullopt, 1}};
  const auto m = build_matrix(texts({"a", "b", "c"}), erefs, UtilitySpec::chrf());
  EXPECT_EQ(m.eref_weights, (std::vector<std::uint32_t>{3, 1}));
  EXPECT_EQ(m.pool_ids, (std::vector<std::uint32_t>{0, 1, 2}));
  EXPECT_EQ(m.eref_ids, (std::vector<std::uint32_t>{0, 1}));
}

TEST(BuildMatrix, TwentyByTwentyEqualsNaiveLoop) {
  std::mt19937_64 rng(41);
  const auto pool = random_pool(rng, 20, 8, 12);
  const auto m = build_matrix(pool, pool, UtilitySpec::sentence_bleu());
  for (std::size_t i = 0; i < 20; ++i) {
    for (std::size_t j = 0; j < 20; ++j) {
      EXPECT_NEAR(m.at(i, j), oracle::sbleu(pool[i].text, pool[j].text), 1e-9);
      EXPECT_EQ(m.at(i, j), utility(UtilityKind::kSentenceBleu, pool[i].text, pool[j].text));
    }
  }
}

TEST(BuildMatrix, CacheTransparentAndJobIndependent) {
  std::mt19937_64 rng(43);
  for (const auto& spec : {UtilitySpec::sentence_bleu(), UtilitySpec::chrf()}) {
    const auto pool = random_pool(rng, 40, 20, 25);
    const auto erefs = random_pool(rng, 30, 20, 25);
    const auto base = build_matrix(pool, erefs, spec, {1, false});
    EXPECT_EQ(build_matrix(pool, erefs, spec, {1, true}), base);
    EXPECT_EQ(build_matrix(pool, erefs, spec, {4, true}), base);
    EXPECT_EQ(build_matrix(pool, erefs, spec, {3, false}), base);
  }
}

TEST(BuildMatrix, SameResultUnderEveryKernel) {
  std::mt19937_64 rng(47);
  const auto pool = random_pool(rng, 25, 6, 30);
  const auto base = build_matrix(pool, pool, UtilitySpec::chrf(), {1, false});
  for (simd::Isa isa : {simd::Isa::kScalar, simd::Isa::kAvx2, simd::Isa::kNeon}) {
    if (!simd::isa_available(isa)) continue;
    simd::force_isa(isa);
    EXPECT_EQ(build_matrix(pool, pool, UtilitySpec::chrf()), base) << simd::isa_name(isa);
    EXPECT_EQ(build_matrix(pool, pool, UtilitySpec::sentence_bleu()),
              build_matrix(pool, pool, UtilitySpec::sentence_bleu(), {1, false}));
  }
  simd::force_isa(std::nullopt);
}

TEST(BuildMatrix, RejectsExternalKinds) {
  EXPECT_THROW(build_matrix(texts({"a"}), texts({"a"}), UtilitySpec::matrix_file("m.txt")), Error);
}

TEST(UtilitySpec, ParseAndPrint) {
  for (const char* s : {"sbleu", "chrf", "matrix:/tmp/m{seg}.txt", "bridge:python3 -m scorer --plugin x"}) {
    EXPECT_EQ(UtilitySpec::parse(s).to_string(), s);
  }
  EXPECT_EQ(UtilitySpec::parse("matrix:x").params.at("path"), "x");
  EXPECT_THROW(UtilitySpec::parse("bleurt"), Error);
  EXPECT_THROW(UtilitySpec::parse("matrix:"), Error);
  EXPECT_THROW(UtilitySpec::parse("bridge:"), Error);
}

TEST(MatrixFile, RoundTrip) {
  std::mt19937_64 rng(53);
  const auto pool = random_pool(rng, 7, 10, 10);
  CandidateList erefs = random_pool(rng, 5, 10, 10);
  erefs[2].count = 4;
  auto m = build_matrix(pool, erefs, UtilitySpec::chrf());
  m.at(0, 0) = 1.0 / 3.0;
  testsupport::TempDir dir;
  save_matrix(m, dir / "m.txt");
  const auto back = load_matrix(dir / "m.txt");
  EXPECT_EQ(back.scores, m.scores);
  EXPECT_EQ(back.eref_weights, m.eref_weights);
  EXPECT_EQ(back.pool_size, 7u);
  EXPECT_EQ(back.eref_size, 5u);
}

TEST(MatrixFile, CommentsBeforeHeaderOnly) {
  EXPECT_EQ(parse_matrix("# produced elsewhere\nMBRMAT v1 1 2\nWEIGHTS 1 2\n0.5 1.5\n").at(0, 1), 1.5);
  EXPECT_NE(kind_of([] { parse_matrix("MBRMAT v1 1 1\nWEIGHTS 1\n# late\n0.5\n"); }), "no error");
}

TEST(MatrixFile, ShortRowNamesRowZero) {
  const auto msg = kind_of([] { parse_matrix("MBRMAT v1 2 3\nWEIGHTS 1 1 1\n1 2\n3 4\n"); });
  EXPECT_EQ(msg.rfind("dimension:", 0), 0u) << msg;
  EXPECT_NE(msg.find("row 0"), std::string::npos) << msg;
}

TEST(MatrixFile, NanCellNamed) {
  const auto msg = kind_of([] { parse_matrix("MBRMAT v1 2 2\nWEIGHTS 1 1\n1 2\n3 nan\n"); });
  EXPECT_EQ(msg.rfind("nonfinite:", 0), 0u) << msg;
  EXPECT_NE(msg.find("row 1, column 1"), std::string::npos) << msg;
}

TEST(MatrixFile, MalformedInputs) {
  EXPECT_EQ(kind_of([] { parse_matrix(""); }).rfind("malformed", 0), 0u);
  EXPECT_EQ(kind_of([] { parse_matrix("MBRMAT v2 1 1\nWEIGHTS 1\n1\n"); }).rfind("malformed", 0), 0u);
  EXPECT_EQ(kind_of([] { parse_matrix("MBRMAT v1 1 1\nWEIGHTS 0\n1\n"); }).rfind("malformed", 0), 0u);
  EXPECT_EQ(kind_of([] { parse_matrix("MBRMAT v1 1 2\nWEIGHTS 1\n1 1\n"); }).rfind("dimension", 0), 0u);
  EXPECT_EQ(kind_of([] { parse_matrix("MBRMAT v1 1 1\nWEIGHTS 1\nabc\n"); }).rfind("malformed", 0), 0u);
  EXPECT_EQ(kind_of([] { parse_matrix("MBRMAT v1 1 1\nWEIGHTS 1\n1\n2\n"); }).rfind("dimension", 0), 0u);
  EXPECT_EQ(kind_of([] { parse_matrix("MBRMAT v1 1 1\nWEIGHTS 1\ninf\n"); }).rfind("nonfinite", 0), 0u);
  EXPECT_EQ(kind_of([] { load_matrix("/nonexistent/m.txt"); }).rfind("io", 0), 0u);
}

TEST(UtilityMatrix, Validate) {
  UtilityMatrix m(1, 1);
  m.at(0, 0) = std::nan("");
  EXPECT_THROW(m.validate(), Error);
  m.at(0, 0) = 1.0;
  EXPECT_NO_THROW(m.validate());
  m.eref_weights[0] = 0;
  EXPECT_THROW(m.validate(), Error);
}
