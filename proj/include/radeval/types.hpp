#pragma once

// Domain types shared by every module. Values are plain aggregates; the
// invariants listed next to each type are checked by validate_corpus() and
// by the readers in io.hpp, not by the constructors.

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace radeval {

enum class Section { findings, impression };

std::string_view to_string(Section s);
/// Throws radeval::Error on anything other than "findings" / "impression".
Section parse_section(std::string_view s);

/// System id used for the reference report of a study in sidecar keys.
inline constexpr std::string_view kReferenceSystem = "REF";

/// Key shared by every per-report artifact: (study_id, system_id), with
/// system_id == "REF" for the reference text.
struct ReportKey {
  std::string study_id;
  std::string system_id;

  bool is_reference() const { return system_id == kReferenceSystem; }
  std::string str() const { return study_id + "/" + system_id; }

  auto operator<=>(const ReportKey&) const = default;
  bool operator==(const ReportKey&) const = default;
};

/// Invariants: study_id non-empty and unique per section; reference_text
/// non-empty.
struct Study {
  std::string study_id;
  Section section = Section::findings;
  std::string reference_text;
  std::string source_dataset;

  bool operator==(const Study&) const = default;
};

/// Invariants: (study_id, system_id) unique; study_id resolves to a Study.
struct CandidateReport {
  std::string study_id;
  std::string system_id;
  std::string text;

  ReportKey key() const { return {study_id, system_id}; }
  bool operator==(const CandidateReport&) const = default;
};

// --- labels -----------------------------------------------------------------

enum class LabelState { positive, negative, uncertain, blank };
enum class LabelSchema { chexpert14, chexpert5, srr55, custom };

std::string_view to_string(LabelState s);
LabelState parse_label_state(std::string_view s);
std::string_view to_string(LabelSchema s);
/// Throws SchemaError for unknown identifiers.
LabelSchema parse_label_schema(std::string_view s);

/// The 14 CheXpert observation names, in canonical order.
const std::vector<std::string>& chexpert14_labels();
/// The 5-label subset (Atelectasis, Cardiomegaly, Consolidation, Edema,
/// Pleural Effusion).
const std::vector<std::string>& chexpert5_labels();
inline constexpr std::size_t kSrr55LabelCount = 55;

struct LabelVector {
  ReportKey key;
  std::map<std::string, LabelState> labels;
  LabelSchema schema = LabelSchema::custom;

  bool operator==(const LabelVector&) const = default;
};

// --- entity graphs ----------------------------------------------------------

struct Entity {
  std::string id;
  std::vector<std::string> tokens;  // lowercase, non-empty
  std::string type;

  bool operator==(const Entity&) const = default;
};

struct Relation {
  std::string head_id;
  std::string tail_id;
  std::string type;

  bool operator==(const Relation&) const = default;
};

/// Invariants: entity ids unique; every relation endpoint resolves; every
/// token span non-empty.
struct EntityGraph {
  ReportKey key;
  std::vector<Entity> entities;
  std::vector<Relation> relations;

  bool operator==(const EntityGraph&) const = default;
};

// --- embeddings -------------------------------------------------------------

enum class EmbeddingKind { token, report };

std::string_view to_string(EmbeddingKind k);
EmbeddingKind parse_embedding_kind(std::string_view s);

/// Row-major float32 matrix. For token embeddings there is one row per
/// token; a report embedding is a single row with no tokens.
struct EmbeddingMatrix {
  std::vector<std::string> tokens;
  std::size_t dim = 0;
  std::vector<float> values;

  std::size_t rows() const { return dim == 0 ? 0 : values.size() / dim; }
  std::span<const float> row(std::size_t i) const {
    return std::span<const float>(values).subspan(i * dim, dim);
  }
  bool operator==(const EmbeddingMatrix&) const = default;
};

struct EmbeddingRecord {
  ReportKey key;
  EmbeddingMatrix matrix;

  bool operator==(const EmbeddingRecord&) const = default;
};

struct EmbeddingFile {
  static constexpr int kFormatVersion = 1;

  EmbeddingKind kind = EmbeddingKind::token;
  std::size_t dim = 0;
  std::vector<EmbeddingRecord> records;

  const EmbeddingRecord* find(const ReportKey& key) const;
  bool operator==(const EmbeddingFile&) const = default;
};

// --- expert error annotations -----------------------------------------------

enum class ErrorCategory {
  false_prediction,
  omission,
  incorrect_location,
  incorrect_severity,
  spurious_comparison,
  omission_of_change,
  inarticulate,
};
inline constexpr std::size_t kErrorCategoryCount = 7;
inline constexpr std::array<ErrorCategory, kErrorCategoryCount> kErrorCategories = {
    ErrorCategory::false_prediction,   ErrorCategory::omission,
    ErrorCategory::incorrect_location, ErrorCategory::incorrect_severity,
    ErrorCategory::spurious_comparison, ErrorCategory::omission_of_change,
    ErrorCategory::inarticulate,
};

enum class Significance { significant, insignificant };

std::string_view to_string(ErrorCategory c);
ErrorCategory parse_error_category(std::string_view s);
std::string_view to_string(Significance s);
Significance parse_significance(std::string_view s);

/// Expert error counts for one candidate. Presence-only annotations are
/// stored as a count of 1.
struct ErrorAnnotation {
  std::string study_id;
  std::string system_id;
  Section section = Section::findings;
  std::array<std::array<std::int64_t, 2>, kErrorCategoryCount> counts{};
  /// Total carried by the input file, if any. Must equal total(significant).
  std::optional<std::int64_t> stored_total_significant;

  std::int64_t count(ErrorCategory c, Significance s) const {
    return counts[static_cast<std::size_t>(c)][static_cast<std::size_t>(s)];
  }
  std::int64_t& count(ErrorCategory c, Significance s) {
    return counts[static_cast<std::size_t>(c)][static_cast<std::size_t>(s)];
  }
  std::int64_t total(Significance s) const;
  std::int64_t total_significant() const { return total(Significance::significant); }

  bool operator==(const ErrorAnnotation&) const = default;
};

// --- precomputed judge scores -------------------------------------------------

/// Scores produced outside the engine (e.g. an LLM judge), one record per
/// report key.
struct JudgeScores {
  ReportKey key;
  std::map<std::string, double> scores;

  bool operator==(const JudgeScores&) const = default;
};

// --- score matrix -------------------------------------------------------------

/// Row of a ScoreMatrix. Corpus-level aggregate rows use study_id == "*".
struct RowKey {
  std::string dataset;
  Section section = Section::findings;
  std::string study_id;
  std::string system_id;

  auto operator<=>(const RowKey&) const = default;
  bool operator==(const RowKey&) const = default;
};

inline constexpr std::string_view kAggregateStudy = "*";

enum class Direction { higher_better, lower_better };
std::string_view to_string(Direction d);
Direction parse_direction(std::string_view s);

/// Metric × candidate table. Missing cells are explicit (std::nullopt); a
/// cell never holds a non-finite value.
class ScoreMatrix {
 public:
  /// Returns the column index; adding an existing metric is a no-op.
  std::size_t add_metric(const std::string& name, Direction direction = Direction::higher_better);
  /// Throws DuplicateError when the row already exists.
  std::size_t add_row(const RowKey& key);

  /// Throws radeval::Error on a non-finite value.
  void set(std::size_t row, std::size_t col, double value);
  void clear(std::size_t row, std::size_t col);
  std::optional<double> get(std::size_t row, std::size_t col) const;

  std::optional<std::size_t> find_row(const RowKey& key) const;
  std::optional<std::size_t> find_metric(std::string_view name) const;

  const std::vector<RowKey>& rows() const { return rows_; }
  const std::vector<std::string>& metrics() const { return metrics_; }
  Direction direction(std::size_t col) const { return directions_.at(col); }
  std::size_t row_count() const { return rows_.size(); }
  std::size_t metric_count() const { return metrics_.size(); }
  bool empty() const { return rows_.empty(); }

  /// Bitwise equality of values, same row/metric order.
  bool operator==(const ScoreMatrix& other) const;

 private:
  std::vector<RowKey> rows_;
  std::map<RowKey, std::size_t> row_index_;
  std::vector<std::string> metrics_;
  std::vector<Direction> directions_;
  std::vector<std::vector<std::optional<double>>> cells_;  // [row][col]
};

// --- corpus -------------------------------------------------------------------

struct Sidecars {
  std::optional<EmbeddingFile> token_embeddings;
  std::optional<EmbeddingFile> radeval_token_embeddings;
  std::optional<EmbeddingFile> report_embeddings;
  std::optional<std::vector<LabelVector>> chexpert_labels;
  std::optional<std::vector<LabelVector>> srr_labels;
  std::optional<std::vector<EntityGraph>> graphs;
  std::optional<std::vector<JudgeScores>> judge_scores;
};

/// One (dataset, section) block of studies with their candidates and the
/// sidecars keyed by ReportKey.
struct Corpus {
  std::string dataset;
  Section section = Section::findings;
  std::vector<Study> studies;
  std::vector<CandidateReport> candidates;
  Sidecars sidecars;
};

}  // namespace radeval
