#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "radeval/types.hpp"

namespace radeval {

// --- label F1 -------------------------------------------------------------------

enum class UncertainPolicy { as_negative, as_positive };
enum class LabelAverage { micro, macro, example };

UncertainPolicy parse_uncertain_policy(std::string_view s);
LabelAverage parse_label_average(std::string_view s);

/// F1 over binarized label presence. positive -> 1, negative/blank -> 0,
/// uncertain per `policy`.
///   micro:   one F1 over TP/FP/FN pooled across every (report, label) cell
///   macro:   unweighted mean of per-label F1
///   example: unweighted mean of per-report F1
/// A label (macro) or report (example) with no positives on either side
/// contributes 1. `schema` selects the evaluated label set; chexpert5
/// restricts chexpert14 vectors to the 5-label subset.
/// Throws std::invalid_argument for unaligned lists, SchemaError when the
/// vectors do not carry `schema` (or a superset of it), radeval::Error
/// "empty corpus" for empty input and UndefinedError "no positive labels"
/// when micro F1 has nothing to score.
double label_f1(std::span<const LabelVector> candidates, std::span<const LabelVector> references,
                LabelSchema schema, UncertainPolicy policy = UncertainPolicy::as_negative,
                LabelAverage average = LabelAverage::micro);

// --- entity graph F1 ------------------------------------------------------------

enum class GraphVariant {
  avg_er,                ///< mean of entity-set F1 and relation-set F1
  entity_match,          ///< entity-set F1
  entity_with_relation,  ///< entity-set F1 where matches also need a shared relation
};

GraphVariant parse_graph_variant(std::string_view s);

/// Entity identity is (space-joined lowercase tokens, type); relation
/// identity is (head identity, tail identity, relation type); both are
/// compared as sets. Empty vs empty scores 1, empty vs non-empty 0.
/// Throws radeval::Error "invalid graph" for dangling relation endpoints or
/// duplicate entity ids.
double graph_f1(const EntityGraph& candidate, const EntityGraph& reference, GraphVariant variant);

// --- temporal entity F1 -----------------------------------------------------------

/// Maps lowercase surface forms to canonical temporal keys.
struct TemporalLexicon {
  std::map<std::string, std::string> entries;

  /// Eight canonical keys (worsen, improve, stable, increase, decrease, new,
  /// unchanged, resolve) with their common inflections.
  static TemporalLexicon defaults();
};

/// Reads {"entries": {surface: canonical}}; surface forms must be lowercase.
TemporalLexicon load_temporal_lexicon(const std::filesystem::path& path);

enum class EmptyPolicy { one, skip };
EmptyPolicy parse_empty_policy(std::string_view s);

/// Canonical temporal keys whose surface forms occur as whole tokens.
std::vector<std::string> extract_temporal_keys(std::string_view text,
                                               const TemporalLexicon& lexicon);

/// F1 over the two canonical-key sets. When neither text mentions a
/// temporal term the result is 1 under EmptyPolicy::one and nullopt (pair
/// excluded) under EmptyPolicy::skip.
std::optional<double> temporal_entity_f1(std::string_view candidate, std::string_view reference,
                                         const TemporalLexicon& lexicon,
                                         EmptyPolicy policy = EmptyPolicy::one);

// --- composite ------------------------------------------------------------------

struct CompositeSpec {
  std::string name = "radcliq";
  std::map<std::string, double> weights;
  double bias = 0.0;
  Direction direction = Direction::higher_better;
};

CompositeSpec load_composite_spec(const std::filesystem::path& path);

/// Throws radeval::Error naming the first weighted metric that is not in
/// `available`.
void check_composite(const CompositeSpec& spec, std::span<const std::string> available);

/// bias + sum(weight * score) per row; rows missing any input stay missing.
std::vector<std::optional<double>> composite(const ScoreMatrix& matrix, const CompositeSpec& spec);

}  // namespace radeval
