#pragma once

// Rank agreement (Kendall tau-b, pooled and within-block), block bootstrap
// confidence intervals, and paired significance tests.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "radeval/types.hpp"

namespace radeval {

/// Pair counts behind tau-b. x_ties / y_ties count pairs tied in x / y
/// (including pairs tied in both).
struct TauCounts {
  std::int64_t concordant = 0;
  std::int64_t discordant = 0;
  std::int64_t n0 = 0;
  std::int64_t x_ties = 0;
  std::int64_t y_ties = 0;

  TauCounts& operator+=(const TauCounts& o) {
    concordant += o.concordant;
    discordant += o.discordant;
    n0 += o.n0;
    x_ties += o.x_ties;
    y_ties += o.y_ties;
    return *this;
  }
  bool operator==(const TauCounts&) const = default;
};

/// Knight's O(n log n) counting. Throws std::invalid_argument for unequal
/// lengths or NaN values.
TauCounts kendall_counts(std::span<const double> x, std::span<const double> y);

/// (C - D) / sqrt((n0 - n1)(n0 - n2)). Throws UndefinedError
/// "undefined tau_b" when either factor is zero.
double tau_b_from_counts(const TauCounts& counts);

struct TauResult {
  double tau_b = 0.0;
  std::int64_t concordant = 0;
  std::int64_t discordant = 0;
  std::int64_t n_pairs = 0;
};

/// Tie-corrected Kendall tau over all n(n-1)/2 pairs; n >= 2.
TauResult kendall_tau_b(std::span<const double> x, std::span<const double> y);

/// Metric scores paired with an outcome (error counts or a second system's
/// scores). A NaN in `x` marks a missing score. `block_id` groups items
/// into blocks (empty: no blocking); `stratum` carries the resampling
/// stratum per item (empty: one stratum).
struct PairedSample {
  std::vector<double> x;
  std::vector<double> y;
  std::vector<std::string> block_id;
  std::vector<Section> stratum;
};

struct PooledTau {
  double tau_b = 0.0;
  TauCounts counts;
  std::int64_t n = 0;
  std::int64_t n_pairs = 0;
};

/// Tau-b over every item with a score, ignoring blocks.
PooledTau pooled_tau(const PairedSample& sample);

struct DroppedBlock {
  std::string block_id;
  std::string reason;  // "missing score", "singleton", "no comparable pair"

  bool operator==(const DroppedBlock&) const = default;
};

struct BlockedTau {
  double tau_b = 0.0;
  TauCounts counts;
  std::int64_t n_blocks = 0;
  std::int64_t n_pairs = 0;
  std::vector<DroppedBlock> dropped;
};

/// Tau-b from counts accumulated over within-block pairs only. Blocks with
/// a missing score, fewer than two items or no pair untied in both
/// variables are dropped and listed. Throws UndefinedError when no block
/// is retained.
BlockedTau blocked_tau(const PairedSample& sample);

enum class Classification { aligned, misaligned, ns };
std::string_view to_string(Classification c);

/// aligned iff ci_high < 0, misaligned iff ci_low > 0, ns otherwise.
Classification classify(double ci_low, double ci_high);

enum class AgreementStatistic { pooled, blocked };
std::string_view to_string(AgreementStatistic s);

struct BootstrapOptions {
  std::size_t resamples = 1000;
  double level = 0.95;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
};

struct AgreementResult {
  AgreementStatistic statistic = AgreementStatistic::blocked;
  double tau_b = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::int64_t n = 0;        ///< scored items
  std::int64_t n_pairs = 0;  ///< pairs entering the statistic
  std::optional<std::int64_t> n_blocks;
  Classification classification = Classification::ns;
  std::size_t undefined_resamples = 0;
  std::vector<DroppedBlock> dropped;
};

/// Percentile interval for tau-b from resampling whole blocks with
/// replacement, independently within each stratum (per-stratum block
/// counts are preserved). Resample b draws from Rng::substream(seed, b).
/// Undefined resamples are skipped and counted; more than half undefined
/// raises UndefinedError "unstable statistic".
AgreementResult block_bootstrap_ci(const PairedSample& sample, AgreementStatistic statistic,
                                   const BootstrapOptions& options = {});

/// Linear-interpolation quantile of an ascending range, q in [0, 1].
double percentile(std::span<const double> sorted, double q);

struct PermutationOptions {
  std::size_t iterations = 10000;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
};

struct PermutationResult {
  double p_value = 1.0;
  double observed = 0.0;  ///< mean(a) - mean(b)
  std::size_t iterations = 0;
};

/// Paired approximate randomization on the mean difference. Each iteration
/// swaps each pair with probability 1/2; two-sided
/// p = (#{|d*| >= |d_obs|} + 1) / (R + 1).
PermutationResult permutation_test(std::span<const double> a, std::span<const double> b,
                                   const PermutationOptions& options = {});

struct DiffInterval {
  double mean_diff = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
};

/// Paired bootstrap percentile interval on mean(a) - mean(b).
DiffInterval bootstrap_diff_ci(std::span<const double> a, std::span<const double> b,
                               const BootstrapOptions& options = {});

}  // namespace radeval
