#include "radeval/clinical.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <stdexcept>
#include <tuple>

#include <nlohmann/json.hpp>

#include "radeval/error.hpp"
#include "radeval/lexical.hpp"

namespace radeval {

namespace {

// F1 of two sets given their sizes and the size of their intersection.
double set_f1(std::size_t n_cand, std::size_t n_ref, std::size_t n_common) {
  if (n_cand == 0 && n_ref == 0) return 1.0;
  if (n_cand == 0 || n_ref == 0 || n_common == 0) return 0.0;
  const double p = static_cast<double>(n_common) / static_cast<double>(n_cand);
  const double r = static_cast<double>(n_common) / static_cast<double>(n_ref);
  return 2.0 * (p * r) / (p + r);
}

template <typename T>
std::size_t intersection_size(const std::set<T>& a, const std::set<T>& b) {
  std::size_t n = 0;
  for (const auto& x : a) n += b.contains(x) ? 1 : 0;
  return n;
}

struct Confusion {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;

  double f1_or_one() const {
    if (tp + fp + fn == 0) return 1.0;
    return 2.0 * static_cast<double>(tp) / static_cast<double>(2 * tp + fp + fn);
  }
  void add(bool cand, bool ref) {
    if (cand && ref) ++tp;
    if (cand && !ref) ++fp;
    if (!cand && ref) ++fn;
  }
};

bool binarize(LabelState s, UncertainPolicy policy) {
  switch (s) {
    case LabelState::positive:
      return true;
    case LabelState::uncertain:
      return policy == UncertainPolicy::as_positive;
    case LabelState::negative:
    case LabelState::blank:
      return false;
  }
  return false;
}

std::vector<std::string> evaluated_labels(std::span<const LabelVector> vectors, LabelSchema schema) {
  auto accepts = [schema](LabelSchema carried) {
    if (schema == LabelSchema::chexpert5) {
      return carried == LabelSchema::chexpert5 || carried == LabelSchema::chexpert14;
    }
    return carried == schema;
  };
  for (const auto& v : vectors) {
    if (!accepts(v.schema)) {
      throw SchemaError("schema mismatch: vector " + v.key.str() + " carries " +
                        std::string(to_string(v.schema)) + ", evaluating " +
                        std::string(to_string(schema)));
    }
  }
  switch (schema) {
    case LabelSchema::chexpert14:
      return chexpert14_labels();
    case LabelSchema::chexpert5:
      return chexpert5_labels();
    case LabelSchema::srr55:
    case LabelSchema::custom:
      break;
  }
  std::vector<std::string> names;
  for (const auto& [name, state] : vectors.front().labels) names.push_back(name);
  return names;
}

LabelState state_of(const LabelVector& v, const std::string& label) {
  auto it = v.labels.find(label);
  if (it == v.labels.end()) {
    throw SchemaError("schema mismatch: vector " + v.key.str() + " lacks label '" + label + "'");
  }
  return it->second;
}

using EntityId = std::pair<std::string, std::string>;                 // (span, type)
using RelationId = std::tuple<EntityId, EntityId, std::string>;

struct GraphSets {
  std::set<EntityId> entities;
  std::set<RelationId> relations;
};

GraphSets graph_sets(const EntityGraph& g) {
  std::map<std::string, EntityId> by_id;
  GraphSets sets;
  for (const auto& e : g.entities) {
    if (e.tokens.empty()) throw Error("invalid graph " + g.key.str() + ": empty token span");
    std::string span;
    for (const auto& t : e.tokens) {
      if (!span.empty()) span += ' ';
      for (char c : t) span += (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
    }
    EntityId id{span, e.type};
    if (!by_id.emplace(e.id, id).second) {
      throw Error("invalid graph " + g.key.str() + ": duplicate entity id " + e.id);
    }
    sets.entities.insert(std::move(id));
  }
  for (const auto& r : g.relations) {
    auto head = by_id.find(r.head_id);
    auto tail = by_id.find(r.tail_id);
    if (head == by_id.end() || tail == by_id.end()) {
      throw Error("invalid graph " + g.key.str() + ": dangling relation endpoint");
    }
    sets.relations.emplace(head->second, tail->second, r.type);
  }
  return sets;
}

std::set<RelationId> relations_touching(const std::set<RelationId>& relations, const EntityId& e) {
  std::set<RelationId> out;
  for (const auto& r : relations) {
    if (std::get<0>(r) == e || std::get<1>(r) == e) out.insert(r);
  }
  return out;
}

}  // namespace

UncertainPolicy parse_uncertain_policy(std::string_view s) {
  if (s == "as_negative") return UncertainPolicy::as_negative;
  if (s == "as_positive") return UncertainPolicy::as_positive;
  throw Error("unknown uncertain policy '" + std::string(s) + "'");
}

LabelAverage parse_label_average(std::string_view s) {
  if (s == "micro") return LabelAverage::micro;
  if (s == "macro") return LabelAverage::macro;
  if (s == "example") return LabelAverage::example;
  throw Error("unknown label average '" + std::string(s) + "'");
}

double label_f1(std::span<const LabelVector> candidates, std::span<const LabelVector> references,
                LabelSchema schema, UncertainPolicy policy, LabelAverage average) {
  if (candidates.size() != references.size()) {
    throw std::invalid_argument("label_f1: candidate and reference lists differ in length");
  }
  if (candidates.empty()) throw Error("empty corpus");
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (candidates[i].schema != references[i].schema) {
      throw SchemaError("schema mismatch between " + candidates[i].key.str() + " and " +
                        references[i].key.str());
    }
  }
  const auto labels = evaluated_labels(candidates, schema);
  evaluated_labels(references, schema);

  switch (average) {
    case LabelAverage::micro: {
      Confusion c;
      for (std::size_t i = 0; i < candidates.size(); ++i) {
        for (const auto& label : labels) {
          c.add(binarize(state_of(candidates[i], label), policy),
                binarize(state_of(references[i], label), policy));
        }
      }
      if (c.tp + c.fp + c.fn == 0) throw UndefinedError("no positive labels");
      return c.f1_or_one();
    }
    case LabelAverage::macro: {
      double sum = 0.0;
      for (const auto& label : labels) {
        Confusion c;
        for (std::size_t i = 0; i < candidates.size(); ++i) {
          c.add(binarize(state_of(candidates[i], label), policy),
                binarize(state_of(references[i], label), policy));
        }
        sum += c.f1_or_one();
      }
      return sum / static_cast<double>(labels.size());
    }
    case LabelAverage::example: {
      double sum = 0.0;
      for (std::size_t i = 0; i < candidates.size(); ++i) {
        Confusion c;
        for (const auto& label : labels) {
          c.add(binarize(state_of(candidates[i], label), policy),
                binarize(state_of(references[i], label), policy));
        }
        sum += c.f1_or_one();
      }
      return sum / static_cast<double>(candidates.size());
    }
  }
  return 0.0;
}

GraphVariant parse_graph_variant(std::string_view s) {
  if (s == "avg_er") return GraphVariant::avg_er;
  if (s == "entity_match") return GraphVariant::entity_match;
  if (s == "entity_with_relation") return GraphVariant::entity_with_relation;
  throw Error("unknown graph variant '" + std::string(s) + "'");
}

double graph_f1(const EntityGraph& candidate, const EntityGraph& reference, GraphVariant variant) {
  const GraphSets cand = graph_sets(candidate);
  const GraphSets ref = graph_sets(reference);
  const std::size_t common_entities = intersection_size(cand.entities, ref.entities);
  const double entity_f1 = set_f1(cand.entities.size(), ref.entities.size(), common_entities);

  switch (variant) {
    case GraphVariant::entity_match:
      return entity_f1;
    case GraphVariant::avg_er: {
      const double relation_f1 = set_f1(cand.relations.size(), ref.relations.size(),
                                        intersection_size(cand.relations, ref.relations));
      return (entity_f1 + relation_f1) / 2.0;
    }
    case GraphVariant::entity_with_relation: {
      std::size_t matched = 0;
      for (const auto& e : cand.entities) {
        if (!ref.entities.contains(e)) continue;
        const auto cand_rel = relations_touching(cand.relations, e);
        const auto ref_rel = relations_touching(ref.relations, e);
        if ((cand_rel.empty() && ref_rel.empty()) || intersection_size(cand_rel, ref_rel) > 0) {
          ++matched;
        }
      }
      return set_f1(cand.entities.size(), ref.entities.size(), matched);
    }
  }
  return 0.0;
}

TemporalLexicon TemporalLexicon::defaults() {
  TemporalLexicon lex;
  const std::vector<std::pair<std::string, std::vector<std::string>>> groups = {
      {"worsen", {"worsen", "worsens", "worsened", "worsening", "worse"}},
      {"improve", {"improve", "improves", "improved", "improving", "improvement"}},
      {"stable", {"stable", "stability", "stabilized"}},
      {"increase", {"increase", "increases", "increased", "increasing"}},
      {"decrease", {"decrease", "decreases", "decreased", "decreasing"}},
      {"new", {"new", "newly"}},
      {"unchanged", {"unchanged"}},
      {"resolve", {"resolve", "resolves", "resolved", "resolving", "resolution"}},
  };
  for (const auto& [key, forms] : groups) {
    for (const auto& form : forms) lex.entries[form] = key;
  }
  return lex;
}

TemporalLexicon load_temporal_lexicon(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open temporal lexicon '" + path.string() + "'");
  TemporalLexicon lex;
  try {
    const auto j = nlohmann::json::parse(in);
    for (const auto& [surface, canonical] : j.at("entries").items()) {
      for (char c : surface) {
        if (c >= 'A' && c <= 'Z') throw Error("lexicon surface form '" + surface + "' is not lowercase");
      }
      lex.entries[surface] = canonical.get<std::string>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error("malformed temporal lexicon '" + path.string() + "': " + e.what());
  }
  return lex;
}

EmptyPolicy parse_empty_policy(std::string_view s) {
  if (s == "one") return EmptyPolicy::one;
  if (s == "skip") return EmptyPolicy::skip;
  throw Error("unknown empty policy '" + std::string(s) + "'");
}

std::vector<std::string> extract_temporal_keys(std::string_view text,
                                               const TemporalLexicon& lexicon) {
  std::set<std::string> keys;
  for (const auto& token : tokenize(text)) {
    auto it = lexicon.entries.find(token);
    if (it != lexicon.entries.end()) keys.insert(it->second);
  }
  return {keys.begin(), keys.end()};
}

std::optional<double> temporal_entity_f1(std::string_view candidate, std::string_view reference,
                                         const TemporalLexicon& lexicon, EmptyPolicy policy) {
  const auto cand_keys = extract_temporal_keys(candidate, lexicon);
  const auto ref_keys = extract_temporal_keys(reference, lexicon);
  if (cand_keys.empty() && ref_keys.empty()) {
    if (policy == EmptyPolicy::skip) return std::nullopt;
    return 1.0;
  }
  const std::set<std::string> c(cand_keys.begin(), cand_keys.end());
  const std::set<std::string> r(ref_keys.begin(), ref_keys.end());
  return set_f1(c.size(), r.size(), intersection_size(c, r));
}

CompositeSpec load_composite_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open composite spec '" + path.string() + "'");
  CompositeSpec spec;
  try {
    const auto j = nlohmann::json::parse(in);
    spec.name = j.value("name", spec.name);
    spec.bias = j.value("bias", 0.0);
    spec.direction = parse_direction(j.value("direction", std::string("higher_better")));
    for (const auto& [metric, w] : j.at("weights").items()) spec.weights[metric] = w.get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw Error("malformed composite spec '" + path.string() + "': " + e.what());
  }
  if (spec.weights.empty()) throw Error("composite spec '" + path.string() + "' has no weights");
  return spec;
}

void check_composite(const CompositeSpec& spec, std::span<const std::string> available) {
  for (const auto& [metric, weight] : spec.weights) {
    if (std::find(available.begin(), available.end(), metric) == available.end()) {
      throw Error("composite '" + spec.name + "' references unknown metric '" + metric + "'");
    }
  }
}

std::vector<std::optional<double>> composite(const ScoreMatrix& matrix, const CompositeSpec& spec) {
  check_composite(spec, matrix.metrics());
  std::vector<std::pair<std::size_t, double>> terms;
  for (const auto& [metric, weight] : spec.weights) terms.emplace_back(*matrix.find_metric(metric), weight);

  std::vector<std::optional<double>> out(matrix.row_count());
  for (std::size_t r = 0; r < matrix.row_count(); ++r) {
    double value = spec.bias;
    bool complete = true;
    for (const auto& [col, weight] : terms) {
      const auto score = matrix.get(r, col);
      if (!score) {
        complete = false;
        break;
      }
      value += weight * *score;
    }
    if (complete) out[r] = value;
  }
  return out;
}

}  // namespace radeval
