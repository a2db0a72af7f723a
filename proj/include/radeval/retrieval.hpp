#pragma once

// Zero-shot report-to-report retrieval: ranking by cosine similarity and
// the P@k / AP / nDCG@k metrics, plus the multi-seed sampling protocol.

#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "radeval/types.hpp"

namespace radeval {

struct RetrievalItem {
  ReportKey key;
  std::vector<float> embedding;  // non-zero
  std::set<std::string> labels;  // non-empty

  bool operator==(const RetrievalItem&) const = default;
};

/// Pool indices by descending cosine similarity to `query`; equal
/// similarities are ordered by ascending key. Throws radeval::Error for an
/// empty pool and std::invalid_argument for a dimension mismatch.
std::vector<std::size_t> rank(const RetrievalItem& query, std::span<const RetrievalItem> pool);

/// Fraction of the first k ranks that are relevant. When fewer than k items
/// are ranked the denominator is the ranking length, or k when
/// `divide_by_k` is set. Throws std::invalid_argument for k < 1.
double precision_at_k(std::span<const int> relevance, std::size_t k, bool divide_by_k = false);

/// Mean of precision@r over relevant ranks r; nullopt when nothing is
/// relevant.
std::optional<double> average_precision(std::span<const int> relevance);

/// DCG@k / IDCG@k with raw gains and discount 1/log2(rank + 1); nullopt
/// when every gain is zero. Throws std::invalid_argument for negative gains
/// or k < 1.
std::optional<double> ndcg_at_k(std::span<const double> gains, std::size_t k);

enum class QuerySampling { uniform, per_label };
QuerySampling parse_query_sampling(std::string_view s);

struct RetrievalOptions {
  std::size_t n_queries = 10;
  std::size_t max_pos_per_label = 200;
  std::size_t n_seeds = 10;
  std::uint64_t seed = 0;
  std::vector<std::size_t> ks = {1, 5, 10};
  bool map = true;
  bool ndcg = true;
  bool divide_by_k = false;
  QuerySampling query_sampling = QuerySampling::uniform;
  std::size_t threads = 1;
};

struct RetrievalRun {
  std::uint64_t seed = 0;
  std::vector<ReportKey> queries;
  std::vector<ReportKey> pool;
  std::vector<std::vector<ReportKey>> rankings;  ///< one per query
};

struct MetricSummary {
  std::string name;  ///< "P@5", "mAP", "nDCG@10", ...
  double mean = 0.0;
  double std = 0.0;  ///< sample standard deviation over seeds
  std::vector<double> per_seed;
};

struct ExcludedQuery {
  std::uint64_t seed = 0;
  ReportKey key;
  std::string metric;
  std::string reason;
};

struct RetrievalResult {
  std::vector<MetricSummary> metrics;
  std::vector<RetrievalRun> runs;
  std::vector<ExcludedQuery> excluded;

  const MetricSummary* find(std::string_view name) const;
};

/// For each of n_seeds seeds (seed i uses derive_seed(seed, i)): draw
/// n_queries queries without replacement, build the pool from up to
/// max_pos_per_label items per label (labels in sorted order, items
/// already pooled are not drawn twice) from the remaining items, rank the
/// pool for every query and average the metrics over queries. Relevance is
/// "shares at least one label"; the nDCG gain is the shared-label count.
/// Queries without a relevant pool item are excluded from mAP and nDCG and
/// listed. Throws radeval::Error naming the shortfall when the corpus
/// cannot supply the queries and a non-empty pool.
RetrievalResult run_protocol(std::span<const RetrievalItem> corpus, const RetrievalOptions& options);

}  // namespace radeval
