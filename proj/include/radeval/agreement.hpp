#pragma once

// Metric-versus-expert agreement: joins a ScoreMatrix with error
// annotations and runs the rank statistics in stats.hpp.

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "radeval/stats.hpp"
#include "radeval/types.hpp"

namespace radeval {

/// Error-count selector. Grammar: `<significant|insignificant|category>`
/// optionally followed by `@all`, `@findings` or `@impression`. A category
/// name selects that category's significant count.
struct Endpoint {
  enum class Target { total_significant, total_insignificant, category };

  Target target = Target::total_significant;
  ErrorCategory category = ErrorCategory::false_prediction;
  std::optional<Section> section;  ///< nullopt = all sections

  std::int64_t value(const ErrorAnnotation& a) const;
  std::string str() const;
  bool operator==(const Endpoint&) const = default;
};

/// Throws radeval::Error for anything outside the grammar.
Endpoint parse_endpoint(std::string_view text);

struct SampleAudit {
  std::size_t annotations = 0;                ///< annotations selected by the endpoint
  std::vector<std::string> missing_scores;    ///< "study/system/section" without a score
};

/// One item per selected annotation: x = the candidate's score (NaN when
/// missing; negated for lower-is-better metrics so that "aligned" always
/// means more negative tau), y = the endpoint count, block = study and
/// section, stratum = section. `dataset` restricts the matrix rows; without
/// it a candidate found in several datasets is an error.
PairedSample make_paired_sample(const ScoreMatrix& matrix, std::string_view metric,
                                std::span<const ErrorAnnotation> annotations,
                                const Endpoint& endpoint, SampleAudit* audit = nullptr,
                                const std::optional<std::string>& dataset = std::nullopt);

/// Point estimate and block-bootstrap interval for one metric/endpoint.
AgreementResult agree(const ScoreMatrix& matrix, std::string_view metric,
                      std::span<const ErrorAnnotation> annotations, const Endpoint& endpoint,
                      AgreementStatistic statistic, const BootstrapOptions& options = {});

struct AgreementRow {
  std::string metric;
  Endpoint endpoint;
  AgreementStatistic statistic = AgreementStatistic::blocked;
  std::optional<AgreementResult> result;  ///< nullopt when undefined
  std::string error;                      ///< why `result` is missing
  SampleAudit audit;
};

/// Every metric × endpoint × statistic, ordered by tau_b ascending within
/// each (endpoint, statistic) group; undefined rows go last. The groups
/// follow the order of `endpoints`, pooled before blocked.
std::vector<AgreementRow> agreement_table(const ScoreMatrix& matrix,
                                          std::span<const std::string> metrics,
                                          std::span<const ErrorAnnotation> annotations,
                                          std::span<const Endpoint> endpoints,
                                          const BootstrapOptions& options = {},
                                          const std::optional<std::string>& dataset = std::nullopt);

/// "(pairs P, n N)" for pooled results, "(blocks B, pairs P)" for blocked;
/// counts use comma thousands separators.
std::string scope_string(const AgreementResult& result);

}  // namespace radeval
