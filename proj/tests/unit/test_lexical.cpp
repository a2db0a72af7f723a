#include <gtest/gtest.h>

#include <random>

#include "../oracles.hpp"
#include "radeval/error.hpp"
#include "radeval/lexical.hpp"

using namespace radeval;

TEST(Tokenize, LowercasesAndStripsPunctuation) {
  EXPECT_EQ(tokenize("No acute cardiopulmonary process."),
            (TokenSequence{"no", "acute", "cardiopulmonary", "process"}));
}

TEST(Tokenize, EmptyInput) { EXPECT_TRUE(tokenize("").empty()); }

TEST(Tokenize, KeepsMeasurements) {
  EXPECT_EQ(tokenize("3.5 cm nodule,"), (TokenSequence{"3.5", "cm", "nodule"}));
  EXPECT_EQ(tokenize("(well-defined) 2.0-cm"), (TokenSequence{"well-defined", "2.0-cm"}));
}

TEST(Tokenize, UnicodeWhitespaceAndPunctuationOnlyTokens) {
  EXPECT_EQ(tokenize("left\xC2\xA0lung\xE2\x80\x83" "base -- ..."), (TokenSequence{"left", "lung", "base"}));
  EXPECT_EQ(tokenize("\t A \n b\r\n"), (TokenSequence{"a", "b"}));
}

TEST(Tokenize, Deterministic) {
  const std::string s = "Mild Bibasilar ATELECTASIS; no effusion.";
  EXPECT_EQ(tokenize(s), tokenize(s));
}

TEST(Bleu, IdentityIsOne) {
  const TokenSequence a = tokenize("the heart size is within normal limits");
  EXPECT_DOUBLE_EQ(sentence_bleu(a, a), 1.0);
}

TEST(Bleu, BrevityPenaltyExample) {
  const std::vector<TokenSequence> c = {{"the", "cat"}};
  const std::vector<TokenSequence> r = {{"the", "cat", "sat"}};
  BleuOptions o;
  o.max_n = 2;
  const double expected = std::exp(1.0 - 3.0 / 2.0);
  EXPECT_NEAR(bleu(c, r, o), expected, 1e-12);
  EXPECT_NEAR(bleu(c, r, o), 0.60653, 1e-5);
  EXPECT_NEAR(bleu(c, r, o), oracle::bleu(c, r, 2), 1e-12);
}

TEST(Bleu, EmptyCandidateIsZero) {
  const std::vector<TokenSequence> c = {{}};
  const std::vector<TokenSequence> r = {{"a", "b"}};
  EXPECT_EQ(bleu(c, r), 0.0);
}

TEST(Bleu, ZeroPrecisionWithoutSmoothing) {
  const std::vector<TokenSequence> c = {{"a", "b", "c", "d"}};
  const std::vector<TokenSequence> r = {{"a", "x", "c", "y"}};
  EXPECT_EQ(bleu(c, r), 0.0);
  BleuOptions o;
  o.smoothing = BleuSmoothing::add_epsilon;
  const double s = bleu(c, r, o);
  EXPECT_GT(s, 0.0);
  EXPECT_LT(s, 1e-3);
}

TEST(Bleu, Errors) {
  const std::vector<TokenSequence> none;
  EXPECT_THROW(bleu(none, none), Error);
  try {
    bleu(none, none);
  } catch (const Error& e) {
    EXPECT_STREQ(e.what(), "empty corpus");
  }
  const std::vector<TokenSequence> one = {{"a"}};
  EXPECT_THROW(bleu(one, none), std::invalid_argument);
}

TEST(Bleu, ClippingAndCorpusSums) {
  const std::vector<TokenSequence> c = {{"the", "the", "the", "the"}, {"a", "b"}};
  const std::vector<TokenSequence> r = {{"the", "cat", "on", "the", "mat"}, {"a", "b", "c"}};
  BleuOptions o;
  o.max_n = 1;
  EXPECT_NEAR(bleu(c, r, o), oracle::bleu(c, r, 1), 1e-12);
}

TEST(Bleu, MatchesOracleOnRandomSmallCorpora) {
  std::mt19937 gen(5);
  const std::vector<std::string> vocab = {"a", "b", "c", "d"};
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<TokenSequence> c(3);
    std::vector<TokenSequence> r(3);
    for (int i = 0; i < 3; ++i) {
      const int lc = 1 + static_cast<int>(gen() % 6);
      const int lr = 1 + static_cast<int>(gen() % 6);
      for (int k = 0; k < lc; ++k) c[i].push_back(vocab[gen() % vocab.size()]);
      for (int k = 0; k < lr; ++k) r[i].push_back(vocab[gen() % vocab.size()]);
    }
    for (int n : {1, 2, 3}) {
      BleuOptions o;
      o.max_n = n;
      ASSERT_NEAR(bleu(c, r, o), oracle::bleu(c, r, n), 1e-9);
    }
  }
}

TEST(Bleu, AppendingNonMatchingTokenNeverAddsMatches) {
  // Candidates at least as long as the reference, so the brevity penalty
  // stays at 1 and the score tracks the clipped counts alone.
  const TokenSequence ref = {"a", "b", "a"};
  TokenSequence cand = {"a", "b", "a", "c"};
  BleuOptions o;
  o.max_n = 2;
  double previous = sentence_bleu(cand, ref, o);
  for (int i = 0; i < 4; ++i) {
    cand.push_back("zzz");
    const double now = sentence_bleu(cand, ref, o);
    EXPECT_LT(now, previous);
    previous = now;
  }
}

TEST(RougeL, Examples) {
  const auto r = rouge_l({"a", "b", "c"}, {"a", "c", "d"});
  EXPECT_NEAR(r.precision, 2.0 / 3.0, 1e-12);
  EXPECT_NEAR(r.recall, 2.0 / 3.0, 1e-12);
  EXPECT_NEAR(r.f1, 2.0 / 3.0, 1e-12);
  EXPECT_EQ(rouge_l({"x", "y"}, {"a", "b"}).f1, 0.0);
  EXPECT_EQ(rouge_l({"a", "b"}, {"a", "b"}).f1, 1.0);
  EXPECT_EQ(rouge_l({}, {}).f1, 1.0);
  EXPECT_EQ(rouge_l({}, {"a"}).f1, 0.0);
  EXPECT_EQ(rouge_l({"a"}, {}).f1, 0.0);
}

TEST(RougeL, ExhaustiveAgainstSubsequenceOracle) {
  // Every pair of sequences over {a, b} up to length 4, plus random longer ones.
  std::vector<TokenSequence> all = {{}};
  for (int len = 1; len <= 4; ++len) {
    for (int mask = 0; mask < (1 << len); ++mask) {
      TokenSequence s;
      for (int i = 0; i < len; ++i) s.push_back((mask >> i & 1) ? "a" : "b");
      all.push_back(s);
    }
  }
  for (const auto& c : all) {
    for (const auto& r : all) {
      ASSERT_EQ(lcs_length(c, r), oracle::lcs(c, r));
      ASSERT_NEAR(rouge_l(c, r).f1, oracle::rouge_l_f1(c, r), 1e-12);
      ASSERT_EQ(rouge_l(c, r).f1, rouge_l(r, c).f1);
    }
  }
}

TEST(RougeL, IdentityOnlyWhenEqual) {
  std::mt19937 gen(11);
  const std::vector<std::string> vocab = {"a", "b", "c"};
  for (int t = 0; t < 500; ++t) {
    TokenSequence c;
    TokenSequence r;
    for (int i = 0; i < 1 + static_cast<int>(gen() % 6); ++i) c.push_back(vocab[gen() % 3]);
    for (int i = 0; i < 1 + static_cast<int>(gen() % 6); ++i) r.push_back(vocab[gen() % 3]);
    const double f = rouge_l(c, r).f1;
    ASSERT_GE(f, 0.0);
    ASSERT_LE(f, 1.0);
    ASSERT_EQ(f == 1.0, c == r);
    ASSERT_NEAR(f, oracle::rouge_l_f1(c, r), 1e-12);
  }
}

TEST(RougeL, CorpusMean) {
  const std::vector<TokenSequence> c = {{"a", "b", "c"}, {"x"}};
  const std::vector<TokenSequence> r = {{"a", "c", "d"}, {"x"}};
  EXPECT_NEAR(corpus_rouge_l(c, r), (2.0 / 3.0 + 1.0) / 2.0, 1e-12);
}
