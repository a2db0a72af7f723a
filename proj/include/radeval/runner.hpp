#pragma once

// Configuration and orchestration behind the radeval command-line tool.
//
// Exit-code contract: 0 success, 1 validation or data failure, 2 config
// error (see exit_code()).

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "radeval/agreement.hpp"
#include "radeval/clinical.hpp"
#include "radeval/error.hpp"
#include "radeval/lexical.hpp"
#include "radeval/retrieval.hpp"
#include "radeval/semantic.hpp"
#include "radeval/stats.hpp"
#include "radeval/validate.hpp"

namespace radeval {

/// Bad or inconsistent configuration (exit code 2).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Input data failed validation (exit code 1).
class ValidationFailed : public Error {
 public:
  explicit ValidationFailed(ValidationReport report);
  const ValidationReport& report() const { return report_; }

 private:
  ValidationReport report_;
};

/// Names of the built-in metrics, in canonical order. Any other metric name
/// is looked up as a precomputed judge-score column.
const std::vector<std::string>& builtin_metrics();

struct CorpusConfig {
  std::string dataset;
  Section section = Section::findings;
  std::filesystem::path studies;
  std::filesystem::path candidates;
  /// token_embeddings, radeval_token_embeddings, report_embeddings,
  /// chexpert_labels, srr_labels, graphs, judge_scores
  std::map<std::string, std::filesystem::path> sidecars;
};

struct MetricOptions {
  BleuOptions bleu;
  SimilarityConfig bertscore;
  SimilarityConfig radevalbertscore;
  UncertainPolicy uncertain = UncertainPolicy::as_negative;
  LabelAverage label_average = LabelAverage::micro;
  EmptyPolicy temporal_empty = EmptyPolicy::one;
  std::optional<std::filesystem::path> temporal_lexicon;
  std::optional<std::filesystem::path> radcliq_spec;
};

struct CompareConfig {
  std::string system_a;
  std::string system_b;
  std::string metric;
};

struct RetrievalDataset {
  std::string name;
  std::filesystem::path embeddings;  ///< report-kind embedding file
  std::filesystem::path labels;      ///< label file; positive labels form the label set
  LabelSchema schema = LabelSchema::chexpert14;
};

struct RetrievalConfig {
  std::vector<RetrievalDataset> datasets;
  RetrievalOptions options;  ///< seed and threads are taken from RunConfig
};

struct RunConfig {
  std::optional<std::uint64_t> seed;
  std::size_t threads = 0;  ///< 0 = hardware concurrency; capped by RADEVAL_THREADS
  std::filesystem::path output_dir = "radeval_out";
  std::vector<std::string> metrics;
  MetricOptions options;
  std::vector<CorpusConfig> corpora;
  std::optional<std::filesystem::path> scores;
  std::optional<std::filesystem::path> annotations;
  std::vector<Endpoint> endpoints;
  std::optional<std::string> agree_dataset;
  BootstrapOptions bootstrap;      ///< seed and threads come from the fields above
  PermutationOptions permutation;  ///< likewise
  std::optional<CompareConfig> compare;
  std::optional<RetrievalConfig> retrieval;

  std::uint64_t require_seed(std::string_view command) const;
  std::size_t worker_count() const;
};

/// Parses a config document. Relative paths resolve against `base_dir`.
/// Unknown keys, unknown metric options, malformed values and missing files
/// raise ConfigError.
RunConfig config_from_json(const nlohmann::json& doc,
                           const std::filesystem::path& base_dir = std::filesystem::current_path());
RunConfig load_config(const std::filesystem::path& path);

/// Effective configuration echoed into every output. Parallelism and the
/// output directory are left out so outputs do not depend on them.
nlohmann::json config_to_json(const RunConfig& config);

/// Reads every corpus in the config, including sidecars.
std::vector<Corpus> load_corpora(const RunConfig& config);

struct Audit {
  std::vector<std::string> warnings;
  nlohmann::json details = nlohmann::json::object();

  void warn(std::string message) { warnings.push_back(std::move(message)); }
  nlohmann::json to_json() const;
};

struct ScoreOutcome {
  ScoreMatrix matrix;
  Audit audit;
};

/// Scores every candidate for every selected metric, then adds one
/// aggregate row per (dataset, section, system) with study_id "*".
/// Metrics whose sidecar is missing are skipped with a warning. Corpora are
/// validated first; any issue raises ValidationFailed.
ScoreOutcome score_corpora(std::span<const Corpus> corpora, const RunConfig& config);

struct CompareOutcome {
  PermutationResult permutation;
  DiffInterval interval;
  std::size_t n_pairs = 0;
  Audit audit;
};

/// Pairs the per-study scores of two systems (same dataset, section and
/// study, both present) and runs the permutation test and the bootstrap
/// interval with the configured seed.
CompareOutcome compare_systems(const ScoreMatrix& matrix, const CompareConfig& compare,
                               const RunConfig& config);

struct RetrievalOutcome {
  std::vector<std::pair<std::string, RetrievalResult>> datasets;
  Audit audit;
};

RetrievalOutcome run_retrieval(const RunConfig& config);

// Commands. Each writes results.json (lossless, with the config echo and
// audit section) and report.md into config.output_dir; cmd_score also
// writes scores.jsonl. They return the process exit code.
int cmd_score(const RunConfig& config);
int cmd_compare(const RunConfig& config);
int cmd_agree(const RunConfig& config);
int cmd_retrieve(const RunConfig& config);

/// A sidecar checked on its own, e.g. an exported embedding file.
struct StandaloneSidecar {
  /// embeddings, token_embeddings, radeval_token_embeddings, report_embeddings,
  /// chexpert_labels, chexpert5_labels, srr_labels, custom_labels, graphs,
  /// annotations, judge_scores, scores
  std::string kind;
  std::filesystem::path path;
};

/// Parse problems are reported as issues rather than thrown.
ValidationReport validate_inputs(const RunConfig* config, std::span<const StandaloneSidecar> sidecars);
int cmd_validate(const RunConfig* config, std::span<const StandaloneSidecar> sidecars);

/// Maps an exception to the exit-code contract.
int exit_code(const std::exception& e);

}  // namespace radeval
