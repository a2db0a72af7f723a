#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "radeval/lexical.hpp"
#include "radeval/types.hpp"

namespace radeval {

enum class MatchingMode {
  greedy,  ///< each token takes its best cosine match on the other side
  sum,     ///< each token takes the mean cosine over all tokens on the other side
};

struct SimilarityConfig {
  bool idf_weighting = false;
  /// Baseline b in [0, 1); maps x -> (x - b) / (1 - b).
  std::optional<double> rescale_baseline;
  bool clamp_negative = false;
  MatchingMode matching = MatchingMode::greedy;
};

/// idf(t) = log((N + 1) / (df(t) + 1)) over N reference documents. Tokens
/// never seen in the references get log(N + 1).
struct IdfTable {
  std::map<std::string, double> weights;
  double unseen_weight = 0.0;

  double weight(const std::string& token) const {
    auto it = weights.find(token);
    return it == weights.end() ? unseen_weight : it->second;
  }
};

IdfTable compute_idf(std::span<const std::vector<std::string>> reference_tokens);

/// Cosine similarity in double precision. Throws UndefinedError
/// "degenerate embedding" for a zero vector and std::invalid_argument when
/// dimensions differ.
double cosine(std::span<const float> a, std::span<const float> b);

/// BERTScore-style token matching. Recall is the (idf-)weighted mean over
/// reference tokens of their best match among candidate tokens; precision
/// is the same over candidate tokens; F1 is their harmonic mean. When the
/// idf weights of one side sum to zero that side falls back to uniform
/// weights. Throws std::invalid_argument on dimension mismatch, on a
/// baseline outside [0, 1) or when idf weighting is requested without a
/// table, and radeval::Error "no tokens" for an empty side.
PrecisionRecallF1 bertscore(const EmbeddingMatrix& candidate, const EmbeddingMatrix& reference,
                            const SimilarityConfig& config = {}, const IdfTable* idf = nullptr);

/// Unclamped cosine between two report embeddings.
double report_cosine(std::span<const float> candidate, std::span<const float> reference);

}  // namespace radeval
