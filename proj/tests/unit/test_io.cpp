#include <gtest/gtest.h>

#include <cstring>
#include <sstream>

#include "radeval/error.hpp"
#include "radeval/io.hpp"

using namespace radeval;

namespace {

// Little-endian float32 bytes built bit by bit, independent of the packer.
std::vector<std::uint8_t> le_bytes(const std::vector<float>& values) {
  std::vector<std::uint8_t> out;
  for (float f : values) {
    std::uint32_t bits = 0;
    std::memcpy(&bits, &f, 4);
    for (int b = 0; b < 4; ++b) out.push_back(static_cast<std::uint8_t>((bits >> (8 * b)) & 0xFF));
  }
  return out;
}

template <typename F>
void expect_parse_error(F&& f, std::size_t line, const std::string& field) {
  try {
    f();
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), line) << e.what();
    EXPECT_EQ(e.field(), field) << e.what();
  }
}

}  // namespace

TEST(Io, StudiesAndCandidatesRoundTrip) {
  const std::vector<Study> studies = {{"s1", Section::findings, "Clear lungs.", "mimic"},
                                      {"s2", Section::impression, "No acute process.", "mimic"}};
  const std::vector<CandidateReport> cands = {{"s1", "sysA", "Lungs clear."}, {"s2", "sysA", ""}};
  std::stringstream a;
  write_studies(studies, a);
  EXPECT_EQ(read_studies(a), studies);
  std::stringstream b;
  write_candidates(cands, b);
  EXPECT_EQ(read_candidates(b), cands);
}

TEST(Io, EmptyFileIsEmptyList) {
  std::stringstream empty;
  EXPECT_TRUE(read_studies(empty).empty());
  std::stringstream blank("\n\n");
  EXPECT_TRUE(read_candidates(blank).empty());
  std::stringstream e2;
  EXPECT_TRUE(read_embeddings(e2).records.empty());
}

TEST(Io, TokenEmbeddingPayload) {
  const std::vector<float> values = {0.5f, -1.0f, 2.25f, 0.0f, 1e-3f, 3.0f, -0.125f, 7.0f, 1.0f, 2.0f, 3.0f, 4.0f};
  const auto bytes = le_bytes(values);
  ASSERT_EQ(bytes.size(), 48u);
  std::stringstream in;
  in << R"({"format_version": 1, "kind": "token", "dim": 4, "record_count": 1})" << "\n";
  in << R"({"study_id": "s1", "system_id": "REF", "tokens": ["a", "b", "c"], "data": ")"
     << base64_encode(bytes) << "\"}\n";
  const auto file = read_embeddings(in);
  ASSERT_EQ(file.records.size(), 1u);
  const auto& m = file.records[0].matrix;
  EXPECT_EQ(m.rows(), 3u);
  EXPECT_EQ(m.dim, 4u);
  EXPECT_EQ(m.values, values);
  EXPECT_EQ(pack_floats_le(values), bytes);

  std::stringstream out;
  write_embeddings(file, out);
  EXPECT_EQ(read_embeddings(out), file);
}

TEST(Io, Base64KnownVectors) {
  const std::string text = "foobar";
  const std::vector<std::uint8_t> bytes(text.begin(), text.end());
  EXPECT_EQ(base64_encode(bytes), "Zm9vYmFy");
  EXPECT_EQ(base64_encode(std::span(bytes).first(4)), "Zm9vYg==");
  EXPECT_EQ(base64_decode("Zm9vYg=="), std::vector<std::uint8_t>(bytes.begin(), bytes.begin() + 4));
  EXPECT_THROW(base64_decode("Zm9v!g=="), Error);
  EXPECT_THROW(base64_decode("Zm9"), Error);
}

TEST(Io, PayloadSizeMismatch) {
  std::stringstream in;
  in << R"({"format_version": 1, "kind": "token", "dim": 4, "record_count": 1})" << "\n";
  in << R"({"study_id": "s1", "system_id": "REF", "tokens": ["a", "b", "c", "d"], "data": ")"
     << base64_encode(le_bytes(std::vector<float>(12, 1.0f))) << "\"}\n";
  expect_parse_error([&] { read_embeddings(in); }, 2, "data");
}

TEST(Io, MalformedLineCarriesLineNumber) {
  std::stringstream in;
  in << R"({"study_id": "s1", "system_id": "a", "text": "x"})" << "\n";
  in << R"({"study_id": "s2", "system_id": "a", "text": })" << "\n";
  expect_parse_error([&] { read_candidates(in); }, 2, "");

  std::stringstream missing;
  missing << "\n" << R"({"study_id": "s1", "section": "findings", "source_dataset": "d"})" << "\n";
  expect_parse_error([&] { read_studies(missing); }, 2, "reference_text");

  std::stringstream bad_section;
  bad_section << R"({"study_id": "s1", "section": "history", "reference_text": "x", "source_dataset": "d"})";
  expect_parse_error([&] { read_studies(bad_section); }, 1, "section");
}

TEST(Io, LabelSchemaErrors) {
  std::stringstream in(R"({"study_id": "s1", "system_id": "REF", "schema": "chexpert14", "labels": {"Bogus Finding": "positive"}})");
  try {
    read_labels(in, LabelSchema::chexpert14);
    FAIL();
  } catch (const SchemaError& e) {
    EXPECT_NE(std::string(e.what()).find("Bogus Finding"), std::string::npos) << e.what();
  }
  std::stringstream unknown(R"({"study_id": "s1", "system_id": "REF", "schema": "radlex", "labels": {}})");
  EXPECT_THROW(read_labels(unknown, LabelSchema::chexpert14), SchemaError);
  EXPECT_THROW(parse_label_schema("radlex"), SchemaError);
}

TEST(Io, LabelsRoundTrip) {
  LabelVector v;
  v.key = {"s1", "REF"};
  v.schema = LabelSchema::custom;
  v.labels = {{"a", LabelState::positive}, {"b", LabelState::uncertain}, {"c", LabelState::blank}};
  const std::vector<LabelVector> labels = {v};
  std::stringstream io;
  write_labels(labels, io);
  EXPECT_EQ(read_labels(io, LabelSchema::custom), labels);
}

TEST(Io, DuplicateKeys) {
  std::stringstream in;
  in << R"({"study_id": "s1", "system_id": "a", "text": "x"})" << "\n";
  in << R"({"study_id": "s1", "system_id": "a", "text": "y"})" << "\n";
  EXPECT_THROW(read_candidates(in), DuplicateError);
}

TEST(Io, GraphsAnnotationsJudgeRoundTrip) {
  EntityGraph g;
  g.key = {"s1", "sysA"};
  g.entities = {{"e1", {"pleural", "effusion"}, "OBS"}, {"e2", {"lung"}, "ANAT"}};
  g.relations = {{"e1", "e2", "located_at"}};
  const std::vector<EntityGraph> graphs = {g};
  std::stringstream gs;
  write_graphs(graphs, gs);
  EXPECT_EQ(read_graphs(gs), graphs);

  ErrorAnnotation a;
  a.study_id = "s1";
  a.system_id = "sysA";
  a.section = Section::impression;
  a.count(ErrorCategory::omission, Significance::significant) = 2;
  a.count(ErrorCategory::inarticulate, Significance::insignificant) = 1;
  const std::vector<ErrorAnnotation> anns = {a};
  std::stringstream as;
  write_annotations(anns, as);
  const auto back = read_annotations(as);
  ASSERT_EQ(back.size(), 1u);
  EXPECT_EQ(back[0].counts, a.counts);
  EXPECT_EQ(back[0].total_significant(), 2);

  const std::vector<JudgeScores> js = {{{"s1", "sysA"}, {{"green", 0.25}}}};
  std::stringstream jss;
  write_judge_scores(js, jss);
  EXPECT_EQ(read_judge_scores(jss), js);
}

TEST(Io, ScoreMatrixMarkdown) {
  ScoreMatrix m;
  const auto bleu = m.add_metric("bleu");
  const auto rouge = m.add_metric("rougeL");
  const auto r = m.add_row({"mimic", Section::findings, std::string(kAggregateStudy), "CheXagent"});
  m.set(r, bleu, 0.041);
  m.set(r, rouge, 0.214);
  std::stringstream out;
  write_score_matrix(m, out, MatrixFormat::markdown);
  const std::string text = out.str();
  EXPECT_NE(text.find("| CheXagent | 4.1 | 21.4 |"), std::string::npos) << text;
  EXPECT_EQ(format_percent(0.041), "4.1");
  EXPECT_EQ(format_percent(0.214), "21.4");
  EXPECT_EQ(format_percent(-0.0001), "0.0");

  std::stringstream empty;
  write_score_matrix(ScoreMatrix{}, empty, MatrixFormat::markdown);
  EXPECT_EQ(empty.str(), "| System |\n|---|\n");
}

TEST(Io, ScoreMatrixJsonRoundTrip) {
  ScoreMatrix m;
  const auto a = m.add_metric("bleu");
  const auto b = m.add_metric("radcliq", Direction::lower_better);
  const auto r0 = m.add_row({"d", Section::findings, "s1", "sysA"});
  const auto r1 = m.add_row({"d", Section::impression, "s1", "sysB"});
  m.set(r0, a, 0.1 + 0.2);
  m.set(r0, b, -1.0 / 3.0);
  m.set(r1, a, 1e-300);
  std::stringstream io;
  write_score_matrix(m, io, MatrixFormat::json);
  EXPECT_EQ(read_scores(io), m);
  EXPECT_EQ(score_matrix_from_json(score_matrix_to_json(m)), m);
  EXPECT_THROW(m.set(r1, b, std::nan("")), Error);
  EXPECT_THROW(m.add_row({"d", Section::findings, "s1", "sysA"}), DuplicateError);
}
