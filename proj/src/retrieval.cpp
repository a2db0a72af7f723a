#include "radeval/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>

#include "radeval/error.hpp"
#include "radeval/parallel.hpp"
#include "radeval/rng.hpp"
#include "radeval/semantic.hpp"

namespace radeval {

namespace {

std::size_t shared_labels(const RetrievalItem& a, const RetrievalItem& b) {
  std::size_t n = 0;
  for (const auto& l : a.labels) n += b.labels.count(l);
  return n;
}

// First `k` entries of a uniform random permutation of `items`.
std::vector<std::size_t> draw_without_replacement(std::vector<std::size_t> items, std::size_t k,
                                                  Rng& rng) {
  k = std::min(k, items.size());
  for (std::size_t i = 0; i < k; ++i) {
    std::swap(items[i], items[i + rng.uniform_index(items.size() - i)]);
  }
  items.resize(k);
  return items;
}

std::vector<std::size_t> sample_queries(std::span<const RetrievalItem> corpus,
                                        const RetrievalOptions& options, Rng& rng) {
  std::vector<std::size_t> all(corpus.size());
  std::iota(all.begin(), all.end(), 0);
  if (options.query_sampling == QuerySampling::uniform) {
    return draw_without_replacement(std::move(all), options.n_queries, rng);
  }
  // Round-robin over labels in sorted order, one unused item per turn.
  std::map<std::string, std::vector<std::size_t>> by_label;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    for (const auto& l : corpus[i].labels) by_label[l].push_back(i);
  }
  std::vector<bool> used(corpus.size(), false);
  std::vector<std::size_t> queries;
  while (queries.size() < options.n_queries) {
    bool progressed = false;
    for (auto& [label, members] : by_label) {
      if (queries.size() == options.n_queries) break;
      std::erase_if(members, [&](std::size_t i) { return used[i]; });
      if (members.empty()) continue;
      const std::size_t pick = members[rng.uniform_index(members.size())];
      used[pick] = true;
      queries.push_back(pick);
      progressed = true;
    }
    if (!progressed) break;
  }
  return queries;
}

struct SeedOutcome {
  RetrievalRun run;
  std::vector<std::optional<double>> values;  // per metric, nullopt = undefined for the seed
  std::vector<ExcludedQuery> excluded;
};

double sample_std(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

}  // namespace

std::vector<std::size_t> rank(const RetrievalItem& query, std::span<const RetrievalItem> pool) {
  if (pool.empty()) throw Error("empty pool");
  std::vector<double> sim(pool.size());
  for (std::size_t i = 0; i < pool.size(); ++i) sim[i] = cosine(query.embedding, pool[i].embedding);
  std::vector<std::size_t> order(pool.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (sim[a] != sim[b]) return sim[a] > sim[b];
    return pool[a].key < pool[b].key;
  });
  return order;
}

double precision_at_k(std::span<const int> relevance, std::size_t k, bool divide_by_k) {
  if (k < 1) throw std::invalid_argument("precision_at_k: k must be at least 1");
  const std::size_t top = std::min(k, relevance.size());
  std::size_t hits = 0;
  for (std::size_t i = 0; i < top; ++i) hits += relevance[i] != 0 ? 1 : 0;
  const std::size_t denom = divide_by_k ? k : top;
  return denom == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(denom);
}

std::optional<double> average_precision(std::span<const int> relevance) {
  double sum = 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < relevance.size(); ++i) {
    if (relevance[i] == 0) continue;
    ++hits;
    sum += static_cast<double>(hits) / static_cast<double>(i + 1);
  }
  if (hits == 0) return std::nullopt;
  return sum / static_cast<double>(hits);
}

std::optional<double> ndcg_at_k(std::span<const double> gains, std::size_t k) {
  if (k < 1) throw std::invalid_argument("ndcg_at_k: k must be at least 1");
  for (double g : gains) {
    if (!(g >= 0.0)) throw std::invalid_argument("ndcg_at_k: gains must be non-negative");
  }
  auto dcg = [k](std::span<const double> g) {
    double total = 0.0;
    for (std::size_t r = 0; r < std::min(k, g.size()); ++r) {
      total += g[r] / std::log2(static_cast<double>(r) + 2.0);
    }
    return total;
  };
  std::vector<double> ideal(gains.begin(), gains.end());
  std::sort(ideal.begin(), ideal.end(), std::greater<>());
  const double idcg = dcg(ideal);
  if (idcg == 0.0) return std::nullopt;
  return dcg(gains) / idcg;
}

QuerySampling parse_query_sampling(std::string_view s) {
  if (s == "uniform") return QuerySampling::uniform;
  if (s == "per_label") return QuerySampling::per_label;
  throw Error("unknown query sampling '" + std::string(s) + "'");
}

const MetricSummary* RetrievalResult::find(std::string_view name) const {
  for (const auto& m : metrics) {
    if (m.name == name) return &m;
  }
  return nullptr;
}

RetrievalResult run_protocol(std::span<const RetrievalItem> corpus, const RetrievalOptions& options) {
  if (options.n_queries == 0) throw std::invalid_argument("retrieval: n_queries must be positive");
  if (options.max_pos_per_label == 0) {
    throw std::invalid_argument("retrieval: max_pos_per_label must be positive");
  }
  if (options.n_seeds == 0) throw std::invalid_argument("retrieval: n_seeds must be positive");
  for (std::size_t k : options.ks) {
    if (k == 0) throw std::invalid_argument("retrieval: k must be at least 1");
  }
  for (const auto& item : corpus) {
    if (item.labels.empty()) throw Error("retrieval item " + item.key.str() + " has no labels");
  }
  if (corpus.size() < options.n_queries + 1) {
    throw Error("retrieval corpus has " + std::to_string(corpus.size()) + " items; " +
                std::to_string(options.n_queries) + " queries plus at least one pool item need " +
                std::to_string(options.n_queries + 1) + " (short by " +
                std::to_string(options.n_queries + 1 - corpus.size()) + ")");
  }

  std::vector<std::string> names;
  for (std::size_t k : options.ks) names.push_back("P@" + std::to_string(k));
  if (options.map) names.emplace_back("mAP");
  if (options.ndcg) {
    for (std::size_t k : options.ks) names.push_back("nDCG@" + std::to_string(k));
  }

  std::vector<SeedOutcome> outcomes(options.n_seeds);
  parallel_for(options.n_seeds, options.threads, [&](std::size_t s) {
    SeedOutcome& out = outcomes[s];
    out.run.seed = derive_seed(options.seed, s);
    Rng rng(out.run.seed);

    const std::vector<std::size_t> queries = sample_queries(corpus, options, rng);
    if (queries.size() < options.n_queries) {
      throw Error("retrieval corpus supplies only " + std::to_string(queries.size()) + " of " +
                  std::to_string(options.n_queries) + " queries");
    }
    std::vector<bool> taken(corpus.size(), false);
    for (std::size_t q : queries) taken[q] = true;

    std::map<std::string, std::vector<std::size_t>> by_label;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
      if (taken[i]) continue;
      for (const auto& l : corpus[i].labels) by_label[l].push_back(i);
    }
    std::vector<std::size_t> pool_idx;
    for (auto& [label, members] : by_label) {
      std::erase_if(members, [&](std::size_t i) { return taken[i]; });
      for (std::size_t i : draw_without_replacement(members, options.max_pos_per_label, rng)) {
        taken[i] = true;
        pool_idx.push_back(i);
      }
    }
    if (pool_idx.empty()) throw Error("retrieval pool is empty after drawing queries");

    std::vector<RetrievalItem> pool;
    for (std::size_t i : pool_idx) pool.push_back(corpus[i]);
    for (std::size_t q : queries) out.run.queries.push_back(corpus[q].key);
    for (const auto& p : pool) out.run.pool.push_back(p.key);

    std::vector<std::vector<double>> per_metric(names.size());
    for (std::size_t q : queries) {
      const RetrievalItem& query = corpus[q];
      const std::vector<std::size_t> order = rank(query, pool);
      std::vector<int> rel;
      std::vector<double> gains;
      std::vector<ReportKey> ranking;
      for (std::size_t i : order) {
        const std::size_t shared = shared_labels(query, pool[i]);
        rel.push_back(shared > 0 ? 1 : 0);
        gains.push_back(static_cast<double>(shared));
        ranking.push_back(pool[i].key);
      }
      out.run.rankings.push_back(std::move(ranking));

      std::size_t m = 0;
      for (std::size_t k : options.ks) per_metric[m++].push_back(precision_at_k(rel, k, options.divide_by_k));
      if (options.map) {
        if (auto ap = average_precision(rel)) {
          per_metric[m].push_back(*ap);
        } else {
          out.excluded.push_back({out.run.seed, query.key, "mAP", "no relevant item in pool"});
        }
        ++m;
      }
      if (options.ndcg) {
        for (std::size_t k : options.ks) {
          if (auto v = ndcg_at_k(gains, k)) {
            per_metric[m].push_back(*v);
          } else {
            out.excluded.push_back({out.run.seed, query.key, names[m], "all gains zero"});
          }
          ++m;
        }
      }
    }
    for (const auto& values : per_metric) {
      if (values.empty()) {
        out.values.emplace_back(std::nullopt);
      } else {
        out.values.emplace_back(std::accumulate(values.begin(), values.end(), 0.0) /
                                static_cast<double>(values.size()));
      }
    }
  });

  RetrievalResult result;
  for (std::size_t m = 0; m < names.size(); ++m) {
    MetricSummary summary;
    summary.name = names[m];
    for (const auto& o : outcomes) {
      if (o.values[m]) summary.per_seed.push_back(*o.values[m]);
    }
    if (!summary.per_seed.empty()) {
      summary.mean = std::accumulate(summary.per_seed.begin(), summary.per_seed.end(), 0.0) /
                     static_cast<double>(summary.per_seed.size());
      summary.std = sample_std(summary.per_seed);
    }
    result.metrics.push_back(std::move(summary));
  }
  for (auto& o : outcomes) {
    result.runs.push_back(std::move(o.run));
    std::move(o.excluded.begin(), o.excluded.end(), std::back_inserter(result.excluded));
  }
  return result;
}

}  // namespace radeval
