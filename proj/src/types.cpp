#include "radeval/types.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include "radeval/error.hpp"

namespace radeval {

namespace {

template <typename Enum, std::size_t N>
Enum lookup(std::string_view s, const std::array<std::pair<std::string_view, Enum>, N>& table,
            std::string_view what) {
  for (const auto& [name, value] : table) {
    if (name == s) return value;
  }
  throw Error("unknown " + std::string(what) + " '" + std::string(s) + "'");
}

template <typename Enum, std::size_t N>
std::string_view name_of(Enum e, const std::array<std::pair<std::string_view, Enum>, N>& table) {
  for (const auto& [name, value] : table) {
    if (value == e) return name;
  }
  return "?";
}

constexpr std::array<std::pair<std::string_view, Section>, 2> kSections{{
    {"findings", Section::findings},
    {"impression", Section::impression},
}};

constexpr std::array<std::pair<std::string_view, LabelState>, 4> kStates{{
    {"positive", LabelState::positive},
    {"negative", LabelState::negative},
    {"uncertain", LabelState::uncertain},
    {"blank", LabelState::blank},
}};

constexpr std::array<std::pair<std::string_view, LabelSchema>, 4> kSchemas{{
    {"chexpert14", LabelSchema::chexpert14},
    {"chexpert5", LabelSchema::chexpert5},
    {"srr55", LabelSchema::srr55},
    {"custom", LabelSchema::custom},
}};

constexpr std::array<std::pair<std::string_view, EmbeddingKind>, 2> kKinds{{
    {"token", EmbeddingKind::token},
    {"report", EmbeddingKind::report},
}};

constexpr std::array<std::pair<std::string_view, ErrorCategory>, kErrorCategoryCount> kCategories{{
    {"false_prediction", ErrorCategory::false_prediction},
    {"omission", ErrorCategory::omission},
    {"incorrect_location", ErrorCategory::incorrect_location},
    {"incorrect_severity", ErrorCategory::incorrect_severity},
    {"spurious_comparison", ErrorCategory::spurious_comparison},
    {"omission_of_change", ErrorCategory::omission_of_change},
    {"inarticulate", ErrorCategory::inarticulate},
}};

constexpr std::array<std::pair<std::string_view, Significance>, 2> kSignificance{{
    {"significant", Significance::significant},
    {"insignificant", Significance::insignificant},
}};

constexpr std::array<std::pair<std::string_view, Direction>, 2> kDirections{{
    {"higher_better", Direction::higher_better},
    {"lower_better", Direction::lower_better},
}};

}  // namespace

std::string_view to_string(Section s) { return name_of(s, kSections); }
Section parse_section(std::string_view s) { return lookup(s, kSections, "section"); }

std::string_view to_string(LabelState s) { return name_of(s, kStates); }
LabelState parse_label_state(std::string_view s) { return lookup(s, kStates, "label state"); }

std::string_view to_string(LabelSchema s) { return name_of(s, kSchemas); }
LabelSchema parse_label_schema(std::string_view s) {
  for (const auto& [name, value] : kSchemas) {
    if (name == s) return value;
  }
  throw SchemaError("unknown schema_id '" + std::string(s) + "'");
}

std::string_view to_string(EmbeddingKind k) { return name_of(k, kKinds); }
EmbeddingKind parse_embedding_kind(std::string_view s) {
  return lookup(s, kKinds, "embedding kind");
}

std::string_view to_string(ErrorCategory c) { return name_of(c, kCategories); }
ErrorCategory parse_error_category(std::string_view s) {
  return lookup(s, kCategories, "error category");
}

std::string_view to_string(Significance s) { return name_of(s, kSignificance); }
Significance parse_significance(std::string_view s) {
  return lookup(s, kSignificance, "significance");
}

std::string_view to_string(Direction d) { return name_of(d, kDirections); }
Direction parse_direction(std::string_view s) { return lookup(s, kDirections, "direction"); }

const std::vector<std::string>& chexpert14_labels() {
  static const std::vector<std::string> labels = {
      "Enlarged Cardiomediastinum", "Cardiomegaly", "Lung Opacity",   "Lung Lesion",
      "Edema",                      "Consolidation", "Pneumonia",     "Atelectasis",
      "Pneumothorax",               "Pleural Effusion", "Pleural Other", "Fracture",
      "Support Devices",            "No Finding",
  };
  return labels;
}

const std::vector<std::string>& chexpert5_labels() {
  static const std::vector<std::string> labels = {
      "Atelectasis", "Cardiomegaly", "Consolidation", "Edema", "Pleural Effusion",
  };
  return labels;
}

const EmbeddingRecord* EmbeddingFile::find(const ReportKey& key) const {
  auto it = std::find_if(records.begin(), records.end(),
                         [&](const EmbeddingRecord& r) { return r.key == key; });
  return it == records.end() ? nullptr : &*it;
}

std::int64_t ErrorAnnotation::total(Significance s) const {
  std::int64_t sum = 0;
  for (const auto& per_category : counts) sum += per_category[static_cast<std::size_t>(s)];
  return sum;
}

// ScoreMatrix -----------------------------------------------------------------

std::size_t ScoreMatrix::add_metric(const std::string& name, Direction direction) {
  if (auto existing = find_metric(name)) return *existing;
  metrics_.push_back(name);
  directions_.push_back(direction);
  for (auto& row : cells_) row.emplace_back();
  return metrics_.size() - 1;
}

std::size_t ScoreMatrix::add_row(const RowKey& key) {
  auto [it, inserted] = row_index_.emplace(key, rows_.size());
  if (!inserted) {
    throw DuplicateError("duplicate score row " + key.dataset + "/" +
                         std::string(to_string(key.section)) + "/" + key.study_id + "/" +
                         key.system_id);
  }
  rows_.push_back(key);
  cells_.emplace_back(metrics_.size());
  return rows_.size() - 1;
}

void ScoreMatrix::set(std::size_t row, std::size_t col, double value) {
  if (!std::isfinite(value)) {
    throw Error("non-finite score for metric '" + metrics_.at(col) + "'");
  }
  cells_.at(row).at(col) = value;
}

void ScoreMatrix::clear(std::size_t row, std::size_t col) { cells_.at(row).at(col).reset(); }

std::optional<double> ScoreMatrix::get(std::size_t row, std::size_t col) const {
  return cells_.at(row).at(col);
}

std::optional<std::size_t> ScoreMatrix::find_row(const RowKey& key) const {
  auto it = row_index_.find(key);
  if (it == row_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> ScoreMatrix::find_metric(std::string_view name) const {
  auto it = std::find(metrics_.begin(), metrics_.end(), name);
  if (it == metrics_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - metrics_.begin());
}

bool ScoreMatrix::operator==(const ScoreMatrix& other) const {
  if (rows_ != other.rows_ || metrics_ != other.metrics_ || directions_ != other.directions_) {
    return false;
  }
  for (std::size_t r = 0; r < cells_.size(); ++r) {
    for (std::size_t c = 0; c < metrics_.size(); ++c) {
      const auto& a = cells_[r][c];
      const auto& b = other.cells_[r][c];
      if (a.has_value() != b.has_value()) return false;
      if (a && std::bit_cast<std::uint64_t>(*a) != std::bit_cast<std::uint64_t>(*b)) return false;
    }
  }
  return true;
}

}  // namespace radeval
