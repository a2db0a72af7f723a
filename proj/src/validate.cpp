#include "radeval/validate.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <tuple>

namespace radeval {

namespace {

std::string corpus_label(const Corpus& c) {
  return c.dataset + "/" + std::string(to_string(c.section));
}

template <typename Records, typename KeyFn>
void check_keys(const Records& records, KeyFn key_of, const std::set<ReportKey>* known,
                const std::string& where, ValidationReport& report) {
  std::set<ReportKey> seen;
  for (const auto& r : records) {
    const ReportKey& key = key_of(r);
    if (!seen.insert(key).second) report.add("duplicate key", where + ": " + key.str());
    if (known != nullptr && !known->contains(key)) {
      report.add("dangling key", where + ": " + key.str());
    }
  }
}

void prefix(ValidationReport& report, std::size_t from, const std::string& where) {
  for (std::size_t i = from; i < report.issues.size(); ++i) {
    report.issues[i].detail = where + ": " + report.issues[i].detail;
  }
}

}  // namespace

std::size_t ValidationReport::count(std::string_view code) const {
  return static_cast<std::size_t>(std::count_if(
      issues.begin(), issues.end(), [&](const ValidationIssue& i) { return i.code == code; }));
}

std::string label_schema_violation(const LabelVector& v) {
  const std::vector<std::string>* fixed = nullptr;
  switch (v.schema) {
    case LabelSchema::chexpert14:
      fixed = &chexpert14_labels();
      break;
    case LabelSchema::chexpert5:
      fixed = &chexpert5_labels();
      break;
    case LabelSchema::srr55:
      if (v.labels.size() != kSrr55LabelCount) {
        return "expected 55 labels, found " + std::to_string(v.labels.size());
      }
      return {};
    case LabelSchema::custom:
      return {};
  }
  for (const auto& [name, state] : v.labels) {
    if (std::find(fixed->begin(), fixed->end(), name) == fixed->end()) {
      return "unknown label '" + name + "' for schema " + std::string(to_string(v.schema));
    }
  }
  for (const auto& name : *fixed) {
    if (!v.labels.contains(name)) {
      return "missing label '" + name + "' for schema " + std::string(to_string(v.schema));
    }
  }
  return {};
}

ValidationReport validate_embeddings(const EmbeddingFile& file) {
  ValidationReport report;
  if (file.dim == 0) report.add("invalid dim", "embedding dim must be positive");
  std::set<ReportKey> seen;
  for (const auto& rec : file.records) {
    const std::string key = rec.key.str();
    if (!seen.insert(rec.key).second) report.add("duplicate key", key);
    const auto& m = rec.matrix;
    if (m.dim != file.dim) {
      report.add("dim mismatch", key + ": dim " + std::to_string(m.dim) + " vs file dim " +
                                     std::to_string(file.dim));
      continue;
    }
    if (file.kind == EmbeddingKind::token) {
      if (m.values.size() != m.tokens.size() * m.dim) {
        report.add("row/token mismatch",
                   key + ": " + std::to_string(m.dim == 0 ? 0 : m.values.size() / m.dim) +
                       " rows for " + std::to_string(m.tokens.size()) + " tokens");
      }
    } else if (m.values.size() != m.dim || !m.tokens.empty()) {
      report.add("row count mismatch", key + ": report embeddings hold exactly one row");
    }
    if (!std::all_of(m.values.begin(), m.values.end(), [](float f) { return std::isfinite(f); })) {
      report.add("non-finite vector", key);
    }
  }
  return report;
}

ValidationReport validate_labels(std::span<const LabelVector> labels) {
  ValidationReport report;
  std::set<ReportKey> seen;
  const LabelVector* first = labels.empty() ? nullptr : &labels.front();
  for (const auto& v : labels) {
    const std::string key = v.key.str();
    if (!seen.insert(v.key).second) report.add("duplicate key", key);
    if (auto problem = label_schema_violation(v); !problem.empty()) {
      report.add("schema mismatch", key + ": " + problem);
      continue;
    }
    if (v.schema != first->schema) {
      report.add("schema mismatch", key + ": schema " + std::string(to_string(v.schema)) +
                                        " differs from " + std::string(to_string(first->schema)));
      continue;
    }
    if (v.schema == LabelSchema::srr55 || v.schema == LabelSchema::custom) {
      const bool same_names = std::equal(
          v.labels.begin(), v.labels.end(), first->labels.begin(), first->labels.end(),
          [](const auto& a, const auto& b) { return a.first == b.first; });
      if (!same_names) report.add("schema mismatch", key + ": label set differs from first record");
    }
  }
  return report;
}

ValidationReport validate_graphs(std::span<const EntityGraph> graphs) {
  ValidationReport report;
  std::set<ReportKey> seen;
  for (const auto& g : graphs) {
    const std::string key = g.key.str();
    if (!seen.insert(g.key).second) report.add("duplicate key", key);
    std::set<std::string> ids;
    for (const auto& e : g.entities) {
      if (!ids.insert(e.id).second) report.add("invalid graph", key + ": duplicate entity id " + e.id);
      if (e.tokens.empty()) report.add("invalid graph", key + ": empty token span for " + e.id);
    }
    for (const auto& r : g.relations) {
      if (!ids.contains(r.head_id) || !ids.contains(r.tail_id)) {
        report.add("invalid graph",
                   key + ": relation " + r.head_id + "->" + r.tail_id + " has unknown endpoint");
      }
    }
  }
  return report;
}

ValidationReport validate_annotations(std::span<const ErrorAnnotation> annotations) {
  ValidationReport report;
  std::set<std::tuple<std::string, std::string, Section>> seen;
  for (const auto& a : annotations) {
    const std::string key = a.study_id + "/" + a.system_id + "/" + std::string(to_string(a.section));
    if (!seen.emplace(a.study_id, a.system_id, a.section).second) {
      report.add("duplicate key", key);
    }
    for (ErrorCategory c : kErrorCategories) {
      for (Significance s : {Significance::significant, Significance::insignificant}) {
        if (a.count(c, s) < 0) {
          report.add("negative count", key + ": " + std::string(to_string(c)) + "/" +
                                           std::string(to_string(s)));
        }
      }
    }
    if (a.stored_total_significant && *a.stored_total_significant != a.total_significant()) {
      report.add("total mismatch", key + ": stored " + std::to_string(*a.stored_total_significant) +
                                       ", recomputed " + std::to_string(a.total_significant()));
    }
  }
  return report;
}

ValidationReport validate_corpora(std::span<const Corpus> corpora,
                                  std::span<const ErrorAnnotation> annotations) {
  ValidationReport report;
  for (const auto& corpus : corpora) {
    const std::string where = corpus_label(corpus);

    std::set<std::string> study_ids;
    for (const auto& s : corpus.studies) {
      if (s.study_id.empty()) report.add("empty field", where + ": study with empty study_id");
      if (!study_ids.insert(s.study_id).second) {
        report.add("duplicate key", where + ": study " + s.study_id);
      }
      if (s.reference_text.empty()) {
        report.add("empty field", where + ": study " + s.study_id + " has empty reference_text");
      }
      if (s.section != corpus.section) {
        report.add("section mismatch", where + ": study " + s.study_id + " is " +
                                           std::string(to_string(s.section)));
      }
    }

    std::set<ReportKey> known;
    for (const auto& id : study_ids) known.insert({id, std::string(kReferenceSystem)});
    for (const auto& c : corpus.candidates) {
      const ReportKey key = c.key();
      if (c.study_id.empty() || c.system_id.empty()) {
        report.add("empty field", where + ": candidate " + key.str());
      }
      if (key.is_reference()) {
        report.add("reserved system_id", where + ": candidate " + key.str());
      } else if (!known.insert(key).second) {
        report.add("duplicate key", where + ": candidate " + key.str());
      }
      if (!study_ids.contains(c.study_id)) {
        report.add("dangling study_id", where + ": candidate " + key.str());
      }
    }

    const auto& sc = corpus.sidecars;
    auto check_embeddings = [&](const std::optional<EmbeddingFile>& file, const char* name) {
      if (!file) return;
      const std::string at = where + " " + name;
      auto sub = validate_embeddings(*file);
      prefix(sub, 0, at);
      report.merge(sub);
      for (const auto& r : file->records) {
        if (!known.contains(r.key)) report.add("dangling key", at + ": " + r.key.str());
      }
    };
    check_embeddings(sc.token_embeddings, "token_embeddings");
    check_embeddings(sc.radeval_token_embeddings, "radeval_token_embeddings");
    check_embeddings(sc.report_embeddings, "report_embeddings");

    auto check_labels = [&](const std::optional<std::vector<LabelVector>>& labels, const char* name) {
      if (!labels) return;
      const std::string at = where + " " + name;
      auto sub = validate_labels(*labels);
      prefix(sub, 0, at);
      report.merge(sub);
      for (const auto& v : *labels) {
        if (!known.contains(v.key)) report.add("dangling key", at + ": " + v.key.str());
      }
    };
    check_labels(sc.chexpert_labels, "chexpert_labels");
    check_labels(sc.srr_labels, "srr_labels");

    if (sc.graphs) {
      const std::string at = where + " graphs";
      auto sub = validate_graphs(*sc.graphs);
      prefix(sub, 0, at);
      report.merge(sub);
      for (const auto& g : *sc.graphs) {
        if (!known.contains(g.key)) report.add("dangling key", at + ": " + g.key.str());
      }
    }

    if (sc.judge_scores) {
      check_keys(
          *sc.judge_scores, [](const JudgeScores& j) -> const ReportKey& { return j.key; }, &known,
          where + " judge_scores", report);
      for (const auto& j : *sc.judge_scores) {
        for (const auto& [metric, value] : j.scores) {
          if (!std::isfinite(value)) {
            report.add("non-finite score", where + " judge_scores: " + j.key.str() + " " + metric);
          }
        }
      }
    }
  }

  report.merge(validate_annotations(annotations));
  for (const auto& a : annotations) {
    const bool resolves = std::any_of(corpora.begin(), corpora.end(), [&](const Corpus& c) {
      return c.section == a.section &&
             std::any_of(c.candidates.begin(), c.candidates.end(), [&](const CandidateReport& r) {
               return r.study_id == a.study_id && r.system_id == a.system_id;
             });
    });
    if (!resolves) {
      report.add("dangling annotation",
                 a.study_id + "/" + a.system_id + "/" + std::string(to_string(a.section)));
    }
  }
  return report;
}

ValidationReport validate_corpus(const Corpus& corpus,
                                 std::span<const ErrorAnnotation> annotations) {
  return validate_corpora(std::span<const Corpus>(&corpus, 1), annotations);
}

}  // namespace radeval
