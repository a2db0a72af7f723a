#include "radeval/semantic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

#include "radeval/error.hpp"

namespace radeval {

namespace {

double dot(std::span<const float> a, std::span<const float> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    s += static_cast<double>(a[i]) * static_cast<double>(b[i]);
  }
  return s;
}

// Weighted mean of per-token scores; divides by the weight sum so uniform
// weights of 1 reproduce a plain mean and all-ones scores give exactly 1.
double weighted_mean(std::span<const double> scores, std::span<const double> weights) {
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    num += weights[i] * scores[i];
    den += weights[i];
  }
  if (den <= 0.0) {
    num = 0.0;
    for (double s : scores) num += s;
    den = static_cast<double>(scores.size());
  }
  return num / den;
}

std::vector<double> token_weights(const EmbeddingMatrix& m, const IdfTable* idf) {
  std::vector<double> w(m.rows(), 1.0);
  if (idf != nullptr) {
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = idf->weight(m.tokens[i]);
  }
  return w;
}

double finish(double x, const SimilarityConfig& cfg) {
  if (cfg.rescale_baseline) x = (x - *cfg.rescale_baseline) / (1.0 - *cfg.rescale_baseline);
  if (cfg.clamp_negative) x = std::clamp(x, 0.0, 1.0);
  return x;
}

}  // namespace

IdfTable compute_idf(std::span<const std::vector<std::string>> reference_tokens) {
  std::map<std::string, std::size_t> df;
  for (const auto& doc : reference_tokens) {
    for (const auto& t : std::set<std::string>(doc.begin(), doc.end())) ++df[t];
  }
  const auto n = static_cast<double>(reference_tokens.size());
  IdfTable table;
  for (const auto& [token, count] : df) {
    table.weights[token] = std::log((n + 1.0) / (static_cast<double>(count) + 1.0));
  }
  table.unseen_weight = std::log(n + 1.0);
  return table;
}

double cosine(std::span<const float> a, std::span<const float> b) {
  if (a.size() != b.size()) throw std::invalid_argument("cosine: dimension mismatch");
  const double aa = dot(a, a);
  const double bb = dot(b, b);
  if (aa == 0.0 || bb == 0.0) throw UndefinedError("degenerate embedding");
  // sqrt(aa * bb) rather than sqrt(aa) * sqrt(bb): for a == b this is
  // exactly aa, so self-similarity is exactly 1. Rounding can push nearly
  // parallel vectors past +-1.
  return std::clamp(dot(a, b) / std::sqrt(aa * bb), -1.0, 1.0);
}

PrecisionRecallF1 bertscore(const EmbeddingMatrix& candidate, const EmbeddingMatrix& reference,
                            const SimilarityConfig& config, const IdfTable* idf) {
  if (candidate.dim != reference.dim) throw std::invalid_argument("bertscore: dimension mismatch");
  if (candidate.rows() == 0 || reference.rows() == 0) throw Error("no tokens");
  if (config.rescale_baseline &&
      !(*config.rescale_baseline >= 0.0 && *config.rescale_baseline < 1.0)) {
    throw std::invalid_argument("bertscore: rescale baseline must lie in [0, 1)");
  }
  if (config.idf_weighting && idf == nullptr) {
    throw std::invalid_argument("bertscore: idf weighting requested without an idf table");
  }

  const std::size_t nc = candidate.rows();
  const std::size_t nr = reference.rows();
  std::vector<double> sim(nc * nr);
  for (std::size_t i = 0; i < nc; ++i) {
    for (std::size_t j = 0; j < nr; ++j) sim[i * nr + j] = cosine(candidate.row(i), reference.row(j));
  }

  std::vector<double> cand_best(nc);
  std::vector<double> ref_best(nr);
  if (config.matching == MatchingMode::greedy) {
    std::fill(cand_best.begin(), cand_best.end(), -std::numeric_limits<double>::infinity());
    std::fill(ref_best.begin(), ref_best.end(), -std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < nc; ++i) {
      for (std::size_t j = 0; j < nr; ++j) {
        cand_best[i] = std::max(cand_best[i], sim[i * nr + j]);
        ref_best[j] = std::max(ref_best[j], sim[i * nr + j]);
      }
    }
  } else {
    for (std::size_t i = 0; i < nc; ++i) {
      for (std::size_t j = 0; j < nr; ++j) {
        cand_best[i] += sim[i * nr + j];
        ref_best[j] += sim[i * nr + j];
      }
    }
    for (double& v : cand_best) v /= static_cast<double>(nr);
    for (double& v : ref_best) v /= static_cast<double>(nc);
  }

  const IdfTable* weights = config.idf_weighting ? idf : nullptr;
  const double p = weighted_mean(cand_best, token_weights(candidate, weights));
  const double r = weighted_mean(ref_best, token_weights(reference, weights));
  const double f = (p + r) == 0.0 ? 0.0 : 2.0 * (p * r) / (p + r);
  return {finish(p, config), finish(r, config), finish(f, config)};
}

double report_cosine(std::span<const float> candidate, std::span<const float> reference) {
  return cosine(candidate, reference);
}

}  // namespace radeval
