#pragma once

// Line-delimited JSON readers and writers for corpus and sidecar files.
//
// Every reader consumes one record per line (blank lines are skipped) and
// raises ParseError with the file name, 1-based line and field on malformed
// input. Records are parsed in file order, one line at a time.
//
// Record layouts:
//   studies      {"study_id", "section", "reference_text", "source_dataset"}
//   candidates   {"study_id", "system_id", "text"}
//   labels       {"study_id", "system_id", "schema", "labels": {name: state}}
//   graphs       {"study_id", "system_id",
//                 "entities": [{"id", "tokens": [..], "type"}],
//                 "relations": [{"head", "tail", "type"}]}
//   embeddings   header {"format_version": 1, "kind", "dim", "record_count"}
//                then {"study_id", "system_id", ["tokens"], "data": base64}
//                with data = little-endian float32, row-major
//   annotations  {"study_id", "system_id", "section",
//                 "counts": {category: {"significant": n, "insignificant": n}},
//                 ["total_significant": n]}
//   judge scores {"study_id", "system_id", "scores": {metric: value}}
//   score matrix header {"format_version": 1, "kind": "score_matrix",
//                        "metrics": [{"name", "direction"}]}
//                then {"dataset", "section", "study_id", "system_id",
//                      "scores": {metric: value | null}}

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "radeval/types.hpp"

namespace radeval {

std::vector<Study> read_studies(std::istream& in, const std::string& source = "<stream>");
std::vector<CandidateReport> read_candidates(std::istream& in,
                                             const std::string& source = "<stream>");
/// Every record must declare `schema` (or omit it); unknown schema ids and
/// label names outside the schema raise SchemaError.
std::vector<LabelVector> read_labels(std::istream& in, LabelSchema schema,
                                     const std::string& source = "<stream>");
std::vector<EntityGraph> read_graphs(std::istream& in, const std::string& source = "<stream>");
EmbeddingFile read_embeddings(std::istream& in, const std::string& source = "<stream>");
std::vector<ErrorAnnotation> read_annotations(std::istream& in,
                                              const std::string& source = "<stream>");
std::vector<JudgeScores> read_judge_scores(std::istream& in,
                                           const std::string& source = "<stream>");
ScoreMatrix read_scores(std::istream& in, const std::string& source = "<stream>");

std::vector<Study> read_studies(const std::filesystem::path& path);
std::vector<CandidateReport> read_candidates(const std::filesystem::path& path);
std::vector<LabelVector> read_labels(const std::filesystem::path& path, LabelSchema schema);
std::vector<EntityGraph> read_graphs(const std::filesystem::path& path);
EmbeddingFile read_embeddings(const std::filesystem::path& path);
std::vector<ErrorAnnotation> read_annotations(const std::filesystem::path& path);
std::vector<JudgeScores> read_judge_scores(const std::filesystem::path& path);
ScoreMatrix read_scores(const std::filesystem::path& path);

void write_studies(std::span<const Study> studies, std::ostream& out);
void write_candidates(std::span<const CandidateReport> candidates, std::ostream& out);
void write_labels(std::span<const LabelVector> labels, std::ostream& out);
void write_graphs(std::span<const EntityGraph> graphs, std::ostream& out);
void write_embeddings(const EmbeddingFile& file, std::ostream& out);
void write_annotations(std::span<const ErrorAnnotation> annotations, std::ostream& out);
void write_judge_scores(std::span<const JudgeScores> scores, std::ostream& out);

enum class MatrixFormat { json, markdown };

/// json: lossless line-delimited layout readable by read_scores().
/// markdown: rows grouped by (dataset, section) block then system, one
/// column per metric, values ×100 with one decimal, "-" for missing.
void write_score_matrix(const ScoreMatrix& matrix, std::ostream& out, MatrixFormat format);
/// Throws radeval::Error when the path cannot be written.
void write_score_matrix(const ScoreMatrix& matrix, const std::filesystem::path& path,
                        MatrixFormat format);

/// Table cell rendering: value × 100, one decimal.
std::string format_percent(double value);

/// Single-document JSON form of a matrix, used inside results.json.
nlohmann::json score_matrix_to_json(const ScoreMatrix& matrix);
ScoreMatrix score_matrix_from_json(const nlohmann::json& j);

std::string base64_encode(std::span<const std::uint8_t> bytes);
/// Throws radeval::Error on characters outside the standard alphabet or bad
/// padding.
std::vector<std::uint8_t> base64_decode(std::string_view text);

/// Little-endian float32 packing used by the embedding format.
std::vector<std::uint8_t> pack_floats_le(std::span<const float> values);
std::vector<float> unpack_floats_le(std::span<const std::uint8_t> bytes);

}  // namespace radeval
