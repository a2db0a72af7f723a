#pragma once

#include <span>
#include <string>
#include <vector>

#include "radeval/types.hpp"

namespace radeval {

/// One problem found by validation. `code` is a stable short identifier
/// ("dangling study_id", "duplicate key", "row/token mismatch", ...);
/// `detail` names the record.
struct ValidationIssue {
  std::string code;
  std::string detail;

  bool operator==(const ValidationIssue&) const = default;
};

struct ValidationReport {
  std::vector<ValidationIssue> issues;

  bool ok() const { return issues.empty(); }
  void add(std::string code, std::string detail) {
    issues.push_back({std::move(code), std::move(detail)});
  }
  void merge(const ValidationReport& other) {
    issues.insert(issues.end(), other.issues.begin(), other.issues.end());
  }
  std::size_t count(std::string_view code) const;
};

/// Checks every core invariant across the given corpora and annotations.
/// Annotations must resolve to a candidate in a corpus of the same section.
/// Never throws; problems become report entries.
ValidationReport validate_corpora(std::span<const Corpus> corpora,
                                  std::span<const ErrorAnnotation> annotations);

ValidationReport validate_corpus(const Corpus& corpus,
                                 std::span<const ErrorAnnotation> annotations = {});

/// Describes how `labels` violates its declared schema's fixed label set
/// ("unknown label 'X'", "missing label 'Y'", "expected 55 labels"), or
/// returns an empty string. srr55 and custom sets are only checked for size
/// here; cross-record consistency is checked by validate_labels().
std::string label_schema_violation(const LabelVector& labels);

// Standalone checks used for sidecar files that are validated without a
// corpus (keys are not resolved).
ValidationReport validate_embeddings(const EmbeddingFile& file);
ValidationReport validate_labels(std::span<const LabelVector> labels);
ValidationReport validate_graphs(std::span<const EntityGraph> graphs);
ValidationReport validate_annotations(std::span<const ErrorAnnotation> annotations);

}  // namespace radeval
