#include "radeval/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>

#include "radeval/error.hpp"
#include "radeval/parallel.hpp"
#include "radeval/rng.hpp"

namespace radeval {

namespace {

std::int64_t pairs_of(std::int64_t t) { return t * (t - 1) / 2; }

// Sum of t(t-1)/2 over runs of equal adjacent values.
template <typename It, typename Eq>
std::int64_t tied_pairs(It first, It last, Eq equal) {
  std::int64_t total = 0;
  while (first != last) {
    It run_end = std::next(first);
    while (run_end != last && equal(*first, *run_end)) ++run_end;
    total += pairs_of(std::distance(first, run_end));
    first = run_end;
  }
  return total;
}

// Sorts `v` ascending and returns the number of strict inversions.
std::int64_t merge_sort_inversions(std::vector<double>& v, std::vector<double>& scratch,
                                   std::size_t lo, std::size_t hi) {
  if (hi - lo < 2) return 0;
  const std::size_t mid = lo + (hi - lo) / 2;
  std::int64_t inv = merge_sort_inversions(v, scratch, lo, mid) +
                     merge_sort_inversions(v, scratch, mid, hi);
  std::size_t i = lo;
  std::size_t j = mid;
  std::size_t k = lo;
  while (i < mid && j < hi) {
    if (v[j] < v[i]) {
      inv += static_cast<std::int64_t>(mid - i);
      scratch[k++] = v[j++];
    } else {
      scratch[k++] = v[i++];
    }
  }
  while (i < mid) scratch[k++] = v[i++];
  while (j < hi) scratch[k++] = v[j++];
  std::copy(scratch.begin() + static_cast<std::ptrdiff_t>(lo),
            scratch.begin() + static_cast<std::ptrdiff_t>(hi),
            v.begin() + static_cast<std::ptrdiff_t>(lo));
  return inv;
}

struct Block {
  std::string id;
  std::vector<std::size_t> items;
  Section stratum = Section::findings;
};

std::vector<Block> group_blocks(const PairedSample& s) {
  std::vector<Block> blocks;
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < s.x.size(); ++i) {
    const std::string id = s.block_id.empty() ? std::to_string(i) : s.block_id[i];
    auto [it, inserted] = index.try_emplace(id, blocks.size());
    if (inserted) {
      blocks.push_back({id, {}, s.stratum.empty() ? Section::findings : s.stratum[i]});
    } else if (!s.stratum.empty() && blocks[it->second].stratum != s.stratum[i]) {
      throw std::invalid_argument("block " + id + " spans more than one stratum");
    }
    blocks[it->second].items.push_back(i);
  }
  return blocks;
}

void check_sample(const PairedSample& s) {
  if (s.x.size() != s.y.size()) throw std::invalid_argument("paired sample: x and y differ in length");
  if (!s.block_id.empty() && s.block_id.size() != s.x.size()) {
    throw std::invalid_argument("paired sample: block_id length differs from x");
  }
  if (!s.stratum.empty() && s.stratum.size() != s.x.size()) {
    throw std::invalid_argument("paired sample: stratum length differs from x");
  }
  for (double v : s.y) {
    if (std::isnan(v)) throw std::invalid_argument("paired sample: y contains NaN");
  }
}

TauCounts counts_for(const PairedSample& s, std::span<const std::size_t> items) {
  std::vector<double> x;
  std::vector<double> y;
  x.reserve(items.size());
  y.reserve(items.size());
  for (std::size_t i : items) {
    x.push_back(s.x[i]);
    y.push_back(s.y[i]);
  }
  return kendall_counts(x, y);
}

std::optional<double> try_tau(const TauCounts& c) {
  const std::int64_t dx = c.n0 - c.x_ties;
  const std::int64_t dy = c.n0 - c.y_ties;
  if (dx == 0 || dy == 0) return std::nullopt;
  return static_cast<double>(c.concordant - c.discordant) /
         std::sqrt(static_cast<double>(dx) * static_cast<double>(dy));
}

std::pair<double, double> percentile_interval(std::vector<double> values, double level) {
  std::sort(values.begin(), values.end());
  const double alpha = 1.0 - level;
  return {percentile(values, alpha / 2.0), percentile(values, 1.0 - alpha / 2.0)};
}

void check_level(double level) {
  if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("confidence level must lie in (0, 1)");
}

}  // namespace

TauCounts kendall_counts(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("kendall: x and y differ in length");
  const std::size_t n = x.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (std::isnan(x[i]) || std::isnan(y[i])) throw std::invalid_argument("kendall: NaN input");
  }
  TauCounts c;
  c.n0 = pairs_of(static_cast<std::int64_t>(n));
  if (n < 2) return c;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return x[a] < x[b] || (x[a] == x[b] && y[a] < y[b]);
  });

  c.x_ties = tied_pairs(order.begin(), order.end(),
                        [&](std::size_t a, std::size_t b) { return x[a] == x[b]; });
  const std::int64_t joint_ties = tied_pairs(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return x[a] == x[b] && y[a] == y[b];
  });

  // With x ascending (ties broken by y ascending), every strict inversion of
  // the y sequence is a discordant pair and nothing else is.
  std::vector<double> ys(n);
  for (std::size_t i = 0; i < n; ++i) ys[i] = y[order[i]];
  std::vector<double> scratch(n);
  c.discordant = merge_sort_inversions(ys, scratch, 0, n);
  c.y_ties = tied_pairs(ys.begin(), ys.end(), [](double a, double b) { return a == b; });

  c.concordant = c.n0 - c.x_ties - c.y_ties + joint_ties - c.discordant;
  return c;
}

double tau_b_from_counts(const TauCounts& counts) {
  if (auto tau = try_tau(counts)) return *tau;
  throw UndefinedError("undefined tau_b");
}

TauResult kendall_tau_b(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("kendall: x and y differ in length");
  if (x.size() < 2) throw std::invalid_argument("kendall: need at least two observations");
  const TauCounts c = kendall_counts(x, y);
  return {tau_b_from_counts(c), c.concordant, c.discordant, c.n0};
}

PooledTau pooled_tau(const PairedSample& sample) {
  check_sample(sample);
  std::vector<double> x;
  std::vector<double> y;
  for (std::size_t i = 0; i < sample.x.size(); ++i) {
    if (std::isnan(sample.x[i])) continue;
    x.push_back(sample.x[i]);
    y.push_back(sample.y[i]);
  }
  if (x.size() < 2) throw UndefinedError("undefined tau_b: fewer than two scored items");
  PooledTau out;
  out.counts = kendall_counts(x, y);
  out.tau_b = tau_b_from_counts(out.counts);
  out.n = static_cast<std::int64_t>(x.size());
  out.n_pairs = out.counts.n0;
  return out;
}

BlockedTau blocked_tau(const PairedSample& sample) {
  check_sample(sample);
  if (sample.block_id.empty()) throw std::invalid_argument("blocked tau needs block ids");
  BlockedTau out;
  for (const Block& b : group_blocks(sample)) {
    if (std::any_of(b.items.begin(), b.items.end(), [&](std::size_t i) { return std::isnan(sample.x[i]); })) {
      out.dropped.push_back({b.id, "missing score"});
      continue;
    }
    if (b.items.size() < 2) {
      out.dropped.push_back({b.id, "singleton"});
      continue;
    }
    const TauCounts c = counts_for(sample, b.items);
    if (c.concordant + c.discordant == 0) {
      out.dropped.push_back({b.id, "no comparable pair"});
      continue;
    }
    out.counts += c;
    ++out.n_blocks;
  }
  if (out.n_blocks == 0) throw UndefinedError("undefined tau_b: no retained blocks");
  out.n_pairs = out.counts.n0;
  out.tau_b = tau_b_from_counts(out.counts);
  return out;
}

std::string_view to_string(Classification c) {
  switch (c) {
    case Classification::aligned:
      return "aligned";
    case Classification::misaligned:
      return "misaligned";
    case Classification::ns:
      return "ns";
  }
  return "?";
}

Classification classify(double ci_low, double ci_high) {
  if (ci_high < 0.0) return Classification::aligned;
  if (ci_low > 0.0) return Classification::misaligned;
  return Classification::ns;
}

std::string_view to_string(AgreementStatistic s) {
  return s == AgreementStatistic::pooled ? "pooled" : "blocked";
}

double percentile(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw std::invalid_argument("percentile of an empty range");
  const double h = static_cast<double>(sorted.size() - 1) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= sorted.size()) return sorted.back();
  const double frac = h - static_cast<double>(lo);
  if (frac == 0.0) return sorted[lo];
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

AgreementResult block_bootstrap_ci(const PairedSample& sample, AgreementStatistic statistic,
                                   const BootstrapOptions& options) {
  check_sample(sample);
  check_level(options.level);
  if (options.resamples == 0) throw std::invalid_argument("bootstrap needs at least one resample");

  AgreementResult result;
  result.statistic = statistic;

  // Resampling units. For the blocked statistic each retained block is
  // reduced to its pair counts; for the pooled statistic it keeps its
  // scored items.
  std::vector<Block> units;
  std::vector<TauCounts> unit_counts;
  if (statistic == AgreementStatistic::blocked) {
    const BlockedTau point = blocked_tau(sample);
    result.tau_b = point.tau_b;
    result.n_pairs = point.n_pairs;
    result.n_blocks = point.n_blocks;
    result.dropped = point.dropped;
    std::vector<std::string> dropped_ids;
    for (const auto& d : point.dropped) dropped_ids.push_back(d.block_id);
    std::sort(dropped_ids.begin(), dropped_ids.end());
    for (Block& b : group_blocks(sample)) {
      if (std::binary_search(dropped_ids.begin(), dropped_ids.end(), b.id)) continue;
      result.n += static_cast<std::int64_t>(b.items.size());
      unit_counts.push_back(counts_for(sample, b.items));
      units.push_back(std::move(b));
    }
  } else {
    const PooledTau point = pooled_tau(sample);
    result.tau_b = point.tau_b;
    result.n_pairs = point.n_pairs;
    result.n = point.n;
    for (Block& b : group_blocks(sample)) {
      std::erase_if(b.items, [&](std::size_t i) { return std::isnan(sample.x[i]); });
      if (!b.items.empty()) units.push_back(std::move(b));
    }
    if (!sample.block_id.empty()) result.n_blocks = static_cast<std::int64_t>(units.size());
  }

  // Strata in a fixed order so draws do not depend on input ordering
  // beyond block first-appearance.
  std::map<Section, std::vector<std::size_t>> strata;
  for (std::size_t u = 0; u < units.size(); ++u) strata[units[u].stratum].push_back(u);

  constexpr double kUndefined = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> stats(options.resamples, kUndefined);
  parallel_for(options.resamples, options.threads, [&](std::size_t b) {
    Rng rng = Rng::substream(options.seed, b);
    std::optional<double> tau;
    if (statistic == AgreementStatistic::blocked) {
      TauCounts total;
      for (const auto& [stratum, members] : strata) {
        for (std::size_t k = 0; k < members.size(); ++k) {
          total += unit_counts[members[rng.uniform_index(members.size())]];
        }
      }
      tau = try_tau(total);
    } else {
      std::vector<double> x;
      std::vector<double> y;
      for (const auto& [stratum, members] : strata) {
        for (std::size_t k = 0; k < members.size(); ++k) {
          for (std::size_t i : units[members[rng.uniform_index(members.size())]].items) {
            x.push_back(sample.x[i]);
            y.push_back(sample.y[i]);
          }
        }
      }
      tau = try_tau(kendall_counts(x, y));
    }
    if (tau) stats[b] = *tau;
  });

  std::vector<double> valid;
  valid.reserve(stats.size());
  for (double v : stats) {
    if (!std::isnan(v)) valid.push_back(v);
  }
  result.undefined_resamples = stats.size() - valid.size();
  if (result.undefined_resamples * 2 > stats.size()) throw UndefinedError("unstable statistic");

  std::tie(result.ci_low, result.ci_high) = percentile_interval(std::move(valid), options.level);
  result.classification = classify(result.ci_low, result.ci_high);
  return result;
}

PermutationResult permutation_test(std::span<const double> a, std::span<const double> b,
                                   const PermutationOptions& options) {
  if (a.size() != b.size()) throw std::invalid_argument("permutation test: unpaired inputs");
  if (a.size() < 2) throw Error("permutation test needs at least two pairs");
  if (options.iterations == 0) throw std::invalid_argument("permutation test needs iterations");

  const std::size_t n = a.size();
  std::vector<double> diff(n);
  double sum = 0.0;
  double scale = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    diff[i] = a[i] - b[i];
    sum += diff[i];
    scale += std::abs(diff[i]);
  }
  const double observed = sum / static_cast<double>(n);
  // Mathematically tied statistics can differ in the last bits depending on
  // summation order; count those as ties.
  const double threshold = std::abs(observed) - 1e-12 * (scale / static_cast<double>(n));

  std::vector<std::uint8_t> hit(options.iterations, 0);
  parallel_for(options.iterations, options.threads, [&](std::size_t r) {
    Rng rng = Rng::substream(options.seed, r);
    double s = 0.0;
    for (double d : diff) s += rng.coin() ? -d : d;
    if (std::abs(s / static_cast<double>(n)) >= threshold) hit[r] = 1;
  });
  const auto hits = static_cast<std::size_t>(std::count(hit.begin(), hit.end(), 1));

  PermutationResult out;
  out.observed = observed;
  out.iterations = options.iterations;
  out.p_value = static_cast<double>(hits + 1) / static_cast<double>(options.iterations + 1);
  return out;
}

DiffInterval bootstrap_diff_ci(std::span<const double> a, std::span<const double> b,
                               const BootstrapOptions& options) {
  if (a.size() != b.size()) throw std::invalid_argument("bootstrap: unpaired inputs");
  if (a.size() < 2) throw Error("bootstrap needs at least two pairs");
  check_level(options.level);
  if (options.resamples == 0) throw std::invalid_argument("bootstrap needs at least one resample");

  const std::size_t n = a.size();
  std::vector<double> diff(n);
  for (std::size_t i = 0; i < n; ++i) diff[i] = a[i] - b[i];

  std::vector<double> means(options.resamples);
  parallel_for(options.resamples, options.threads, [&](std::size_t r) {
    Rng rng = Rng::substream(options.seed, r);
    double s = 0.0;
    for (std::size_t k = 0; k < n; ++k) s += diff[rng.uniform_index(n)];
    means[r] = s / static_cast<double>(n);
  });

  DiffInterval out;
  out.mean_diff = std::accumulate(diff.begin(), diff.end(), 0.0) / static_cast<double>(n);
  std::tie(out.ci_low, out.ci_high) = percentile_interval(std::move(means), options.level);
  return out;
}

}  // namespace radeval
