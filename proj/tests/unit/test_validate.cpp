#include <gtest/gtest.h>

#include "radeval/validate.hpp"

using namespace radeval;

namespace {

Corpus two_study_corpus() {
  Corpus c;
  c.dataset = "toy";
  c.section = Section::findings;
  c.studies = {{"s1", Section::findings, "Clear lungs.", "toy"}, {"s2", Section::findings, "Small effusion.", "toy"}};
  c.candidates = {{"s1", "sysA", "Lungs are clear."}, {"s2", "sysA", "Effusion."}};
  return c;
}

EmbeddingFile token_file(std::size_t rows, std::size_t tokens) {
  EmbeddingFile f;
  f.kind = EmbeddingKind::token;
  f.dim = 2;
  EmbeddingRecord r;
  r.key = {"s1", "sysA"};
  r.matrix.dim = 2;
  r.matrix.values.assign(rows * 2, 1.0f);
  for (std::size_t i = 0; i < tokens; ++i) r.matrix.tokens.push_back("t" + std::to_string(i));
  f.records.push_back(r);
  return f;
}

}  // namespace

TEST(Validate, ConsistentCorpusIsClean) {
  const auto report = validate_corpus(two_study_corpus());
  EXPECT_TRUE(report.ok());
  EXPECT_EQ(report.issues.size(), 0u);
}

TEST(Validate, DanglingStudy) {
  auto c = two_study_corpus();
  c.candidates.push_back({"s9", "sysA", "x"});
  const auto report = validate_corpus(c);
  EXPECT_EQ(report.count("dangling study_id"), 1u);
}

TEST(Validate, RowTokenMismatch) {
  auto c = two_study_corpus();
  c.sidecars.token_embeddings = token_file(3, 4);
  EXPECT_EQ(validate_corpus(c).count("row/token mismatch"), 1u);
  EXPECT_EQ(validate_embeddings(token_file(3, 4)).count("row/token mismatch"), 1u);
  EXPECT_TRUE(validate_embeddings(token_file(3, 3)).ok());
}

TEST(Validate, DuplicatesAndReservedIds) {
  auto c = two_study_corpus();
  c.candidates.push_back({"s1", "sysA", "again"});
  c.candidates.push_back({"s2", "REF", "reference as system"});
  const auto report = validate_corpus(c);
  EXPECT_EQ(report.count("duplicate key"), 1u);
  EXPECT_EQ(report.count("reserved system_id"), 1u);
}

TEST(Validate, AnnotationsResolve) {
  const auto c = two_study_corpus();
  ErrorAnnotation good;
  good.study_id = "s1";
  good.system_id = "sysA";
  ErrorAnnotation dangling = good;
  dangling.system_id = "sysZ";
  ErrorAnnotation wrong_total = good;
  wrong_total.study_id = "s2";
  wrong_total.count(ErrorCategory::omission, Significance::significant) = 1;
  wrong_total.stored_total_significant = 3;
  const std::vector<ErrorAnnotation> anns = {good, dangling, wrong_total};
  const auto report = validate_corpus(c, anns);
  EXPECT_EQ(report.count("dangling annotation"), 1u);
  EXPECT_EQ(report.count("total mismatch"), 1u);
}

TEST(Validate, LabelSchemaViolations) {
  LabelVector v;
  v.key = {"s1", "REF"};
  v.schema = LabelSchema::chexpert14;
  for (const auto& n : chexpert14_labels()) v.labels[n] = LabelState::blank;
  EXPECT_EQ(label_schema_violation(v), "");
  v.labels["Bogus"] = LabelState::positive;
  EXPECT_NE(label_schema_violation(v).find("Bogus"), std::string::npos);

  LabelVector srr;
  srr.schema = LabelSchema::srr55;
  srr.labels["only one"] = LabelState::positive;
  EXPECT_NE(label_schema_violation(srr), "");
}

TEST(Validate, InvalidGraph) {
  EntityGraph g;
  g.key = {"s1", "sysA"};
  g.entities = {{"e1", {"lung"}, "ANAT"}, {"e1", {}, "OBS"}};
  g.relations = {{"e1", "e7", "modify"}};
  const std::vector<EntityGraph> graphs = {g};
  EXPECT_GE(validate_graphs(graphs).count("invalid graph"), 3u);
}
