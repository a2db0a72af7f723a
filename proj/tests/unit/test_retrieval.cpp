#include <gtest/gtest.h>

#include <random>

#include "../oracles.hpp"
#include "radeval/error.hpp"
#include "radeval/retrieval.hpp"

using namespace radeval;

namespace {

RetrievalItem item(const std::string& key, std::vector<float> v, std::set<std::string> labels = {"x"}) {
  return {{key, "REF"}, std::move(v), std::move(labels)};
}

std::vector<RetrievalItem> orthogonal_corpus(std::size_t per_label) {
  std::vector<RetrievalItem> out;
  for (std::size_t i = 0; i < per_label; ++i) {
    out.push_back(item("a" + std::to_string(100 + i), {1.0f, 0.0f}, {"A"}));
    out.push_back(item("b" + std::to_string(100 + i), {0.0f, 2.0f}, {"B"}));
  }
  return out;
}

}  // namespace

TEST(Rank, Examples) {
  const auto q = item("q", {1, 0});
  const std::vector<RetrievalItem> one = {item("z", {0, 1})};
  EXPECT_EQ(rank(q, one), (std::vector<std::size_t>{0}));
  const std::vector<RetrievalItem> pool = {item("b", {0, 1}), item("a", {1, 0})};
  EXPECT_EQ(rank(q, pool), (std::vector<std::size_t>{1, 0}));
  const std::vector<RetrievalItem> ties = {item("c", {1, 1}), item("a", {2, 2}), item("b", {1, 1})};
  EXPECT_EQ(rank(q, ties), (std::vector<std::size_t>{1, 2, 0}));
  EXPECT_THROW(rank(q, std::vector<RetrievalItem>{}), Error);
}

TEST(RetrievalMetrics, Examples) {
  const std::vector<int> rel = {1, 1, 0, 1, 0};
  EXPECT_DOUBLE_EQ(precision_at_k(rel, 5), 0.6);
  EXPECT_EQ(precision_at_k(std::vector<int>{1, 1, 1}, 3), 1.0);
  EXPECT_EQ(precision_at_k(std::vector<int>{0, 0, 0}, 3), 0.0);
  EXPECT_DOUBLE_EQ(precision_at_k(std::vector<int>{1, 1}, 5), 1.0);
  EXPECT_DOUBLE_EQ(precision_at_k(std::vector<int>{1, 1}, 5, true), 0.4);

  EXPECT_NEAR(*average_precision(std::vector<int>{1, 0, 1}), (1.0 + 2.0 / 3.0) / 2.0, 1e-15);
  EXPECT_NEAR(*average_precision(std::vector<int>{1, 0, 1}), 0.8333, 1e-4);
  EXPECT_EQ(*average_precision(std::vector<int>{1, 1, 1, 0, 0}), 1.0);
  EXPECT_EQ(*average_precision(std::vector<int>{0, 1}), 0.5);
  EXPECT_FALSE(average_precision(std::vector<int>{0, 0}).has_value());

  const double v = *ndcg_at_k(std::vector<double>{2, 0, 1}, 3);
  EXPECT_NEAR(v, 2.5 / (2.0 + 1.0 / std::log2(3.0)), 1e-15);
  EXPECT_NEAR(v, 0.95023, 1e-5);
  EXPECT_EQ(*ndcg_at_k(std::vector<double>{3, 2, 1, 0}, 4), 1.0);
  EXPECT_EQ(*ndcg_at_k(std::vector<double>{1, 0, 0}, 2), 1.0);
  EXPECT_FALSE(ndcg_at_k(std::vector<double>{0, 0}, 2).has_value());
  EXPECT_THROW(ndcg_at_k(std::vector<double>{-1, 0}, 2), std::invalid_argument);
}

TEST(RetrievalMetrics, MatchOracles) {
  std::mt19937 gen(21);
  for (int t = 0; t < 2000; ++t) {
    const std::size_t n = 1 + gen() % 6;
    std::vector<int> rel(n);
    std::vector<double> gains(n);
    for (std::size_t i = 0; i < n; ++i) {
      gains[i] = static_cast<double>(gen() % 4);
      rel[i] = gains[i] > 0 ? 1 : 0;
    }
    const std::size_t k = 1 + gen() % 7;
    ASSERT_NEAR(precision_at_k(rel, k), oracle::precision_at_k(rel, k), 1e-12);
    const bool any = std::any_of(rel.begin(), rel.end(), [](int r) { return r != 0; });
    ASSERT_EQ(average_precision(rel).has_value(), any);
    ASSERT_EQ(ndcg_at_k(gains, k).has_value(), any);
    if (!any) continue;
    ASSERT_NEAR(*average_precision(rel), oracle::average_precision(rel), 1e-12);
    ASSERT_NEAR(*ndcg_at_k(gains, k), oracle::ndcg(gains, k), 1e-12);
  }
}

TEST(Protocol, OrthogonalCorpusIsPerfect) {
  const auto corpus = orthogonal_corpus(15);
  RetrievalOptions o;
  o.n_queries = 4;
  o.max_pos_per_label = 5;
  o.n_seeds = 10;
  o.seed = 7;
  o.ks = {1, 5};
  const auto r = run_protocol(corpus, o);
  ASSERT_EQ(r.metrics.size(), 5u);
  for (const auto& m : r.metrics) {
    EXPECT_EQ(m.mean, 1.0) << m.name;
    EXPECT_EQ(m.std, 0.0) << m.name;
    EXPECT_EQ(m.per_seed.size(), 10u);
  }
  EXPECT_TRUE(r.excluded.empty());
  for (const auto& run : r.runs) {
    EXPECT_EQ(run.queries.size(), 4u);
    EXPECT_EQ(run.pool.size(), 10u);
    for (const auto& q : run.queries) {
      EXPECT_EQ(std::count(run.pool.begin(), run.pool.end(), q), 0);
    }
  }
}

TEST(Protocol, DeterministicAcrossThreads) {
  std::mt19937 gen(4);
  std::vector<RetrievalItem> corpus;
  for (int i = 0; i < 60; ++i) {
    std::uniform_real_distribution<float> u(-1, 1);
    std::set<std::string> labels = {"L" + std::to_string(gen() % 4)};
    if (gen() % 3 == 0) labels.insert("L" + std::to_string(gen() % 4));
    corpus.push_back(item("k" + std::to_string(i), {u(gen), u(gen), u(gen)}, labels));
  }
  RetrievalOptions o;
  o.n_queries = 5;
  o.max_pos_per_label = 6;
  o.seed = 3;
  o.threads = 1;
  const auto a = run_protocol(corpus, o);
  o.threads = 8;
  const auto b = run_protocol(corpus, o);
  ASSERT_EQ(a.metrics.size(), b.metrics.size());
  for (std::size_t m = 0; m < a.metrics.size(); ++m) {
    EXPECT_EQ(a.metrics[m].per_seed, b.metrics[m].per_seed);
    EXPECT_EQ(a.metrics[m].mean, b.metrics[m].mean);
  }
  for (std::size_t s = 0; s < a.runs.size(); ++s) EXPECT_EQ(a.runs[s].rankings, b.runs[s].rankings);
  ASSERT_NE(a.find("mAP"), nullptr);
  EXPECT_EQ(a.find("nope"), nullptr);
}

TEST(Protocol, Shortfall) {
  const auto corpus = orthogonal_corpus(2);
  RetrievalOptions o;
  o.n_queries = 10;
  try {
    run_protocol(corpus, o);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("short by 7"), std::string::npos) << e.what();
  }
}
