#include <gtest/gtest.h>

#include <random>

#include "../oracles.hpp"
#include "radeval/error.hpp"
#include "radeval/semantic.hpp"

using namespace radeval;

namespace {

EmbeddingMatrix matrix(const std::vector<std::vector<float>>& rows, std::vector<std::string> tokens = {}) {
  EmbeddingMatrix m;
  m.dim = rows.front().size();
  for (const auto& r : rows) m.values.insert(m.values.end(), r.begin(), r.end());
  if (tokens.empty()) {
    for (std::size_t i = 0; i < rows.size(); ++i) tokens.push_back("t" + std::to_string(i));
  }
  m.tokens = std::move(tokens);
  return m;
}

std::vector<std::vector<double>> as_double(const std::vector<std::vector<float>>& rows) {
  std::vector<std::vector<double>> out;
  for (const auto& r : rows) out.emplace_back(r.begin(), r.end());
  return out;
}

std::vector<std::vector<float>> random_rows(std::mt19937& gen, std::size_t n, std::size_t dim) {
  std::uniform_int_distribution<int> d(-3, 3);
  std::vector<std::vector<float>> rows(n, std::vector<float>(dim));
  for (auto& r : rows) {
    do {
      for (auto& v : r) v = static_cast<float>(d(gen));
    } while (std::all_of(r.begin(), r.end(), [](float v) { return v == 0.0f; }));
  }
  return rows;
}

}  // namespace

TEST(BertScore, IdentityIsExactlyOne) {
  std::mt19937 gen(3);
  for (int t = 0; t < 200; ++t) {
    std::uniform_real_distribution<float> u(-1.0f, 1.0f);
    std::vector<std::vector<float>> rows(1 + t % 6, std::vector<float>(5));
    for (auto& r : rows) {
      for (auto& v : r) v = u(gen);
    }
    const auto s = bertscore(matrix(rows), matrix(rows));
    ASSERT_EQ(s.precision, 1.0);
    ASSERT_EQ(s.recall, 1.0);
    ASSERT_EQ(s.f1, 1.0);
  }
}

TEST(BertScore, HandExample) {
  const auto s = bertscore(matrix({{1, 0}}), matrix({{1, 0}, {0, 1}}));
  EXPECT_DOUBLE_EQ(s.precision, 1.0);
  EXPECT_DOUBLE_EQ(s.recall, 0.5);
  EXPECT_NEAR(s.f1, 2.0 / 3.0, 1e-15);
}

TEST(BertScore, RescaleAndClamp) {
  SimilarityConfig cfg;
  cfg.rescale_baseline = 0.5;
  // Raw P = 1, R = 0.5, F = 2/3 from the hand example.
  const auto s = bertscore(matrix({{1, 0}}), matrix({{1, 0}, {0, 1}}), cfg);
  EXPECT_DOUBLE_EQ(s.precision, 1.0);
  EXPECT_DOUBLE_EQ(s.recall, 0.0);
  EXPECT_NEAR(s.f1, (2.0 / 3.0 - 0.5) / 0.5, 1e-12);

  // Raw recall 0.75 maps to 0.5.
  const auto r = bertscore(matrix({{1, 0}}), matrix({{1, 0}, {1, 0}, {1, 0}, {0, 1}}), cfg);
  EXPECT_NEAR(r.recall, 0.5, 1e-15);

  SimilarityConfig clamp = cfg;
  clamp.clamp_negative = true;
  const auto neg = bertscore(matrix({{1, 0}}), matrix({{-1, 0}}), clamp);
  EXPECT_EQ(neg.precision, 0.0);
  const auto unclamped = bertscore(matrix({{1, 0}}), matrix({{-1, 0}}), cfg);
  EXPECT_LT(unclamped.precision, 0.0);
}

TEST(BertScore, Errors) {
  EXPECT_THROW(bertscore(matrix({{1, 0}}), matrix({{1, 0, 0}})), std::invalid_argument);
  EmbeddingMatrix empty;
  empty.dim = 2;
  try {
    bertscore(empty, matrix({{1, 0}}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_STREQ(e.what(), "no tokens");
  }
  SimilarityConfig bad;
  bad.rescale_baseline = 1.0;
  EXPECT_THROW(bertscore(matrix({{1, 0}}), matrix({{1, 0}}), bad), std::invalid_argument);
  SimilarityConfig idf;
  idf.idf_weighting = true;
  EXPECT_THROW(bertscore(matrix({{1, 0}}), matrix({{1, 0}}), idf), std::invalid_argument);
}

TEST(BertScore, MatchesOracleOnRandomInstances) {
  std::mt19937 gen(17);
  for (int t = 0; t < 500; ++t) {
    const auto c = random_rows(gen, 1 + gen() % 6, 3);
    const auto r = random_rows(gen, 1 + gen() % 6, 3);
    const auto s = bertscore(matrix(c), matrix(r));
    const auto o = oracle::bertscore(as_double(c), as_double(r));
    ASSERT_NEAR(s.precision, o[0], 1e-9);
    ASSERT_NEAR(s.recall, o[1], 1e-9);
    ASSERT_NEAR(s.f1, o[2], 1e-9);
  }
}

TEST(BertScore, SwapSymmetry) {
  std::mt19937 gen(23);
  for (int t = 0; t < 200; ++t) {
    const auto c = random_rows(gen, 1 + gen() % 6, 4);
    const auto r = random_rows(gen, 1 + gen() % 6, 4);
    const auto a = bertscore(matrix(c), matrix(r));
    const auto b = bertscore(matrix(r), matrix(c));
    ASSERT_EQ(a.precision, b.recall);
    ASSERT_EQ(a.recall, b.precision);
    ASSERT_EQ(a.f1, b.f1);
  }
}

TEST(BertScore, ScaleInvariance) {
  std::mt19937 gen(29);
  for (int t = 0; t < 100; ++t) {
    const auto c = random_rows(gen, 1 + gen() % 5, 4);
    auto scaled = c;
    for (auto& row : scaled) {
      for (auto& v : row) v *= 4.0f;
    }
    const auto r = random_rows(gen, 1 + gen() % 5, 4);
    const auto a = bertscore(matrix(c), matrix(r));
    const auto b = bertscore(matrix(scaled), matrix(r));
    ASSERT_NEAR(a.f1, b.f1, 1e-12);
    for (auto& row : scaled) {
      for (auto& v : row) v *= 0.37f;
    }
    ASSERT_NEAR(a.f1, bertscore(matrix(scaled), matrix(r)).f1, 1e-6);
  }
}

TEST(BertScore, EqualIdfWeightsMatchUniform) {
  std::mt19937 gen(31);
  IdfTable flat;
  flat.unseen_weight = 2.5;
  SimilarityConfig cfg;
  cfg.idf_weighting = true;
  for (int t = 0; t < 100; ++t) {
    const auto c = random_rows(gen, 1 + gen() % 5, 3);
    const auto r = random_rows(gen, 1 + gen() % 5, 3);
    const auto a = bertscore(matrix(c), matrix(r));
    const auto b = bertscore(matrix(c), matrix(r), cfg, &flat);
    ASSERT_NEAR(a.f1, b.f1, 1e-12);
  }
}

TEST(BertScore, IdfWeighting) {
  const std::vector<std::vector<std::string>> refs = {{"a", "b"}, {"a"}, {"a", "c"}};
  const IdfTable idf = compute_idf(refs);
  EXPECT_DOUBLE_EQ(idf.weight("a"), std::log(4.0 / 4.0));
  EXPECT_DOUBLE_EQ(idf.weight("b"), std::log(4.0 / 2.0));
  EXPECT_DOUBLE_EQ(idf.weight("zzz"), std::log(4.0));

  SimilarityConfig cfg;
  cfg.idf_weighting = true;
  // Reference tokens a (weight 0) and b (weight log 2); the candidate only
  // matches b, so recall is 1 under idf weighting and 1/2 without it.
  const auto cand = matrix({{0, 1}}, {"b"});
  const auto ref = matrix({{1, 0}, {0, 1}}, {"a", "b"});
  EXPECT_DOUBLE_EQ(bertscore(cand, ref, cfg, &idf).recall, 1.0);
  EXPECT_DOUBLE_EQ(bertscore(cand, ref).recall, 0.5);
}

TEST(BertScore, SumMatching) {
  SimilarityConfig cfg;
  cfg.matching = MatchingMode::sum;
  const auto s = bertscore(matrix({{1, 0}}), matrix({{1, 0}, {0, 1}}), cfg);
  EXPECT_DOUBLE_EQ(s.precision, 0.5);
  EXPECT_DOUBLE_EQ(s.recall, 0.5);
}

TEST(ReportCosine, Examples) {
  const std::vector<float> v = {0.3f, -1.2f, 2.0f};
  const std::vector<float> neg = {-0.3f, 1.2f, -2.0f};
  EXPECT_EQ(report_cosine(v, v), 1.0);
  EXPECT_EQ(report_cosine(v, neg), -1.0);
  EXPECT_NEAR(report_cosine(std::vector<float>{1, 0}, std::vector<float>{1, 1}), 1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(report_cosine(std::vector<float>{1, 0}, std::vector<float>{1, 1}), 0.70711, 1e-5);
}

TEST(ReportCosine, DegenerateEmbedding) {
  try {
    report_cosine(std::vector<float>{0, 0}, std::vector<float>{1, 1});
    FAIL();
  } catch (const UndefinedError& e) {
    EXPECT_STREQ(e.what(), "degenerate embedding");
  }
  EXPECT_THROW(report_cosine(std::vector<float>{1}, std::vector<float>{1, 1}), std::invalid_argument);
}
