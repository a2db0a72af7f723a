#include "radeval/io.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <tuple>

#include "radeval/error.hpp"
#include "radeval/validate.hpp"

namespace radeval {

using nlohmann::json;

namespace {

// Walks a line-delimited file, handing each parsed object to `fn` with a
// context used for located errors.
struct LineContext {
  const std::string& source;
  std::size_t line;

  [[noreturn]] void fail(const std::string& field, const std::string& what) const {
    throw ParseError(source, line, field, what);
  }

  const json& at(const json& obj, const char* field) const {
    auto it = obj.find(field);
    if (it == obj.end()) fail(field, "missing field");
    return *it;
  }

  std::string str(const json& obj, const char* field) const {
    const json& v = at(obj, field);
    if (!v.is_string()) fail(field, "expected a string");
    return v.get<std::string>();
  }

  std::string str_or(const json& obj, const char* field, std::string fallback) const {
    auto it = obj.find(field);
    if (it == obj.end()) return fallback;
    if (!it->is_string()) fail(field, "expected a string");
    return it->get<std::string>();
  }

  std::int64_t integer(const json& obj, const char* field) const {
    const json& v = at(obj, field);
    if (!v.is_number_integer()) fail(field, "expected an integer");
    return v.get<std::int64_t>();
  }

  template <typename Fn>
  auto convert(const char* field, Fn&& fn) const -> decltype(fn()) {
    try {
      return fn();
    } catch (const SchemaError&) {
      throw;
    } catch (const Error& e) {
      fail(field, e.what());
    }
  }
};

template <typename Fn>
void for_each_record(std::istream& in, const std::string& source, Fn&& fn) {
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (!text.empty() && text.back() == '\r') text.pop_back();
    if (text.find_first_not_of(" \t") == std::string::npos) continue;
    json obj;
    try {
      obj = json::parse(text);
    } catch (const json::parse_error& e) {
      throw ParseError(source, line, "", std::string("malformed JSON: ") + e.what());
    }
    LineContext ctx{source, line};
    if (!obj.is_object()) ctx.fail("", "expected a JSON object");
    fn(obj, ctx);
  }
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "' for reading");
  return in;
}

template <typename T, typename Reader>
T read_path(const std::filesystem::path& path, Reader&& reader) {
  auto in = open_input(path);
  return reader(in, path.string());
}

ReportKey read_key(const json& obj, const LineContext& ctx) {
  return {ctx.str(obj, "study_id"), ctx.str(obj, "system_id")};
}

std::string located(const LineContext& ctx, const std::string& what) {
  return ctx.source + ":" + std::to_string(ctx.line) + ": " + what;
}

void write_line(std::ostream& out, const json& j) { out << j.dump() << '\n'; }

}  // namespace

ParseError::ParseError(std::string file, std::size_t line, std::string field,
                       const std::string& what)
    : Error(file + ":" + std::to_string(line) + (field.empty() ? "" : " [" + field + "]") + ": " +
            what),
      file_(std::move(file)),
      line_(line),
      field_(std::move(field)) {}

// --- base64 / float packing -------------------------------------------------------

namespace {
constexpr char kAlphabet[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

int decode_char(char c) {
  if (c >= 'A' && c <= 'Z') return c - 'A';
  if (c >= 'a' && c <= 'z') return c - 'a' + 26;
  if (c >= '0' && c <= '9') return c - '0' + 52;
  if (c == '+') return 62;
  if (c == '/') return 63;
  return -1;
}
}  // namespace

std::string base64_encode(std::span<const std::uint8_t> bytes) {
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 3 <= bytes.size(); i += 3) {
    const std::uint32_t v = (bytes[i] << 16) | (bytes[i + 1] << 8) | bytes[i + 2];
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += kAlphabet[(v >> 6) & 63];
    out += kAlphabet[v & 63];
  }
  const std::size_t rest = bytes.size() - i;
  if (rest == 1) {
    const std::uint32_t v = bytes[i] << 16;
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += "==";
  } else if (rest == 2) {
    const std::uint32_t v = (bytes[i] << 16) | (bytes[i + 1] << 8);
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += kAlphabet[(v >> 6) & 63];
    out += '=';
  }
  return out;
}

std::vector<std::uint8_t> base64_decode(std::string_view text) {
  if (text.size() % 4 != 0) throw Error("base64 length is not a multiple of 4");
  std::vector<std::uint8_t> out;
  out.reserve(text.size() / 4 * 3);
  for (std::size_t i = 0; i < text.size(); i += 4) {
    const bool last = i + 4 == text.size();
    std::array<int, 4> v{};
    int padding = 0;
    for (int k = 0; k < 4; ++k) {
      const char c = text[i + k];
      if (c == '=' && last && k >= 2) {
        ++padding;
        v[k] = 0;
        continue;
      }
      if (padding > 0) throw Error("invalid base64 padding");
      v[k] = decode_char(c);
      if (v[k] < 0) throw Error("invalid base64 character");
    }
    const std::uint32_t word = (v[0] << 18) | (v[1] << 12) | (v[2] << 6) | v[3];
    out.push_back(static_cast<std::uint8_t>(word >> 16));
    if (padding < 2) out.push_back(static_cast<std::uint8_t>(word >> 8));
    if (padding < 1) out.push_back(static_cast<std::uint8_t>(word));
  }
  return out;
}

std::vector<std::uint8_t> pack_floats_le(std::span<const float> values) {
  std::vector<std::uint8_t> out;
  out.reserve(values.size() * 4);
  for (float f : values) {
    const auto bits = std::bit_cast<std::uint32_t>(f);
    for (int b = 0; b < 4; ++b) out.push_back(static_cast<std::uint8_t>(bits >> (8 * b)));
  }
  return out;
}

std::vector<float> unpack_floats_le(std::span<const std::uint8_t> bytes) {
  if (bytes.size() % 4 != 0) throw Error("float payload length is not a multiple of 4");
  std::vector<float> out(bytes.size() / 4);
  for (std::size_t i = 0; i < out.size(); ++i) {
    std::uint32_t bits = 0;
    for (int b = 0; b < 4; ++b) bits |= static_cast<std::uint32_t>(bytes[4 * i + b]) << (8 * b);
    out[i] = std::bit_cast<float>(bits);
  }
  return out;
}

// --- readers ---------------------------------------------------------------------

std::vector<Study> read_studies(std::istream& in, const std::string& source) {
  std::vector<Study> out;
  std::set<std::pair<std::string, Section>> seen;
  for_each_record(in, source, [&](const json& obj, const LineContext& ctx) {
    Study s;
    s.study_id = ctx.str(obj, "study_id");
    s.section = ctx.convert("section", [&] { return parse_section(ctx.str(obj, "section")); });
    s.reference_text = ctx.str(obj, "reference_text");
    s.source_dataset = ctx.str_or(obj, "source_dataset", "");
    if (!seen.emplace(s.study_id, s.section).second) {
      throw DuplicateError(located(ctx, "duplicate study " + s.study_id));
    }
    out.push_back(std::move(s));
  });
  return out;
}

std::vector<CandidateReport> read_candidates(std::istream& in, const std::string& source) {
  std::vector<CandidateReport> out;
  std::set<ReportKey> seen;
  for_each_record(in, source, [&](const json& obj, const LineContext& ctx) {
    CandidateReport c{ctx.str(obj, "study_id"), ctx.str(obj, "system_id"), ctx.str(obj, "text")};
    if (!seen.insert(c.key()).second) {
      throw DuplicateError(located(ctx, "duplicate candidate " + c.key().str()));
    }
    out.push_back(std::move(c));
  });
  return out;
}

std::vector<LabelVector> read_labels(std::istream& in, LabelSchema schema,
                                     const std::string& source) {
  std::vector<LabelVector> out;
  std::set<ReportKey> seen;
  for_each_record(in, source, [&](const json& obj, const LineContext& ctx) {
    LabelVector v;
    v.key = read_key(obj, ctx);
    v.schema = schema;
    if (auto it = obj.find("schema"); it != obj.end()) {
      if (!it->is_string()) ctx.fail("schema", "expected a string");
      const LabelSchema declared = parse_label_schema(it->get<std::string>());
      if (declared != schema) {
        throw SchemaError(located(ctx, "record schema " + std::string(to_string(declared)) +
                                           " does not match requested " +
                                           std::string(to_string(schema))));
      }
    }
    const json& labels = ctx.at(obj, "labels");
    if (!labels.is_object()) ctx.fail("labels", "expected an object");
    for (const auto& [name, state] : labels.items()) {
      if (!state.is_string()) ctx.fail("labels." + name, "expected a state string");
      v.labels[name] = ctx.convert("labels", [&] {
        return parse_label_state(state.get<std::string>());
      });
    }
    if (auto problem = label_schema_violation(v); !problem.empty()) {
      throw SchemaError(located(ctx, problem));
    }
    if (!out.empty() && (schema == LabelSchema::srr55 || schema == LabelSchema::custom)) {
      const auto& first = out.front().labels;
      const bool same = std::equal(v.labels.begin(), v.labels.end(), first.begin(), first.end(),
                                   [](const auto& a, const auto& b) { return a.first == b.first; });
      if (!same) throw SchemaError(located(ctx, "label set differs from the first record"));
    }
    if (!seen.insert(v.key).second) {
      throw DuplicateError(located(ctx, "duplicate label record " + v.key.str()));
    }
    out.push_back(std::move(v));
  });
  return out;
}

std::vector<EntityGraph> read_graphs(std::istream& in, const std::string& source) {
  std::vector<EntityGraph> out;
  std::set<ReportKey> seen;
  for_each_record(in, source, [&](const json& obj, const LineContext& ctx) {
    EntityGraph g;
    g.key = read_key(obj, ctx);
    const json& entities = ctx.at(obj, "entities");
    if (!entities.is_array()) ctx.fail("entities", "expected an array");
    std::set<std::string> ids;
    for (const json& e : entities) {
      if (!e.is_object()) ctx.fail("entities", "expected objects");
      Entity entity;
      entity.id = ctx.str(e, "id");
      entity.type = ctx.str(e, "type");
      const json& tokens = ctx.at(e, "tokens");
      if (!tokens.is_array()) ctx.fail("tokens", "expected an array");
      for (const json& t : tokens) {
        if (!t.is_string()) ctx.fail("tokens", "expected strings");
        std::string token = t.get<std::string>();
        for (char& ch : token) {
          if (ch >= 'A' && ch <= 'Z') ch = static_cast<char>(ch - 'A' + 'a');
        }
        entity.tokens.push_back(std::move(token));
      }
      if (entity.tokens.empty()) ctx.fail("tokens", "empty token span for entity " + entity.id);
      if (!ids.insert(entity.id).second) ctx.fail("entities", "duplicate entity id " + entity.id);
      g.entities.push_back(std::move(entity));
    }
    if (auto it = obj.find("relations"); it != obj.end()) {
      if (!it->is_array()) ctx.fail("relations", "expected an array");
      for (const json& r : *it) {
        if (!r.is_object()) ctx.fail("relations", "expected objects");
        Relation rel{ctx.str(r, "head"), ctx.str(r, "tail"), ctx.str(r, "type")};
        if (!ids.contains(rel.head_id) || !ids.contains(rel.tail_id)) {
          ctx.fail("relations", "endpoint does not resolve: " + rel.head_id + "->" + rel.tail_id);
        }
        g.relations.push_back(std::move(rel));
      }
    }
    if (!seen.insert(g.key).second) {
      throw DuplicateError(located(ctx, "duplicate graph " + g.key.str()));
    }
    out.push_back(std::move(g));
  });
  return out;
}

EmbeddingFile read_embeddings(std::istream& in, const std::string& source) {
  EmbeddingFile file;
  bool have_header = false;
  std::int64_t expected_records = 0;
  std::size_t last_line = 0;
  std::set<ReportKey> seen;
  for_each_record(in, source, [&](const json& obj, const LineContext& ctx) {
    last_line = ctx.line;
    if (!have_header) {
      if (ctx.integer(obj, "format_version") != EmbeddingFile::kFormatVersion) {
        ctx.fail("format_version", "unsupported format version");
      }
      file.kind = ctx.convert("kind", [&] { return parse_embedding_kind(ctx.str(obj, "kind")); });
      const std::int64_t dim = ctx.integer(obj, "dim");
      if (dim <= 0) ctx.fail("dim", "dim must be positive");
      file.dim = static_cast<std::size_t>(dim);
      expected_records = ctx.integer(obj, "record_count");
      if (expected_records < 0) ctx.fail("record_count", "negative record count");
      have_header = true;
      return;
    }
    EmbeddingRecord rec;
    rec.key = read_key(obj, ctx);
    rec.matrix.dim = file.dim;
    std::size_t rows = 1;
    if (file.kind == EmbeddingKind::token) {
      const json& tokens = ctx.at(obj, "tokens");
      if (!tokens.is_array()) ctx.fail("tokens", "expected an array");
      for (const json& t : tokens) {
        if (!t.is_string()) ctx.fail("tokens", "expected strings");
        rec.matrix.tokens.push_back(t.get<std::string>());
      }
      rows = rec.matrix.tokens.size();
    } else if (obj.contains("tokens")) {
      ctx.fail("tokens", "report embeddings carry no tokens");
    }
    const auto bytes = ctx.convert("data", [&] { return base64_decode(ctx.str(obj, "data")); });
    if (bytes.size() != rows * file.dim * 4) {
      ctx.fail("data", "decoded " + std::to_string(bytes.size()) + " bytes, expected " +
                           std::to_string(rows * file.dim * 4) + " (rows x dim x 4)");
    }
    rec.matrix.values = unpack_floats_le(bytes);
    if (!seen.insert(rec.key).second) {
      throw DuplicateError(located(ctx, "duplicate embedding record " + rec.key.str()));
    }
    file.records.push_back(std::move(rec));
  });
  if (!have_header) {
    // An empty file is an empty set; there is nothing to describe its shape.
    return file;
  }
  if (static_cast<std::int64_t>(file.records.size()) != expected_records) {
    throw ParseError(source, last_line, "record_count",
                     "header declares " + std::to_string(expected_records) + " records, found " +
                         std::to_string(file.records.size()));
  }
  return file;
}

std::vector<ErrorAnnotation> read_annotations(std::istream& in, const std::string& source) {
  std::vector<ErrorAnnotation> out;
  std::set<std::tuple<std::string, std::string, Section>> seen;
  for_each_record(in, source, [&](const json& obj, const LineContext& ctx) {
    ErrorAnnotation a;
    a.study_id = ctx.str(obj, "study_id");
    a.system_id = ctx.str(obj, "system_id");
    a.section = ctx.convert("section", [&] { return parse_section(ctx.str(obj, "section")); });
    const json& counts = ctx.at(obj, "counts");
    if (!counts.is_object()) ctx.fail("counts", "expected an object");
    for (const auto& [category_name, per_sig] : counts.items()) {
      const ErrorCategory category =
          ctx.convert("counts", [&] { return parse_error_category(category_name); });
      if (!per_sig.is_object()) ctx.fail("counts." + category_name, "expected an object");
      for (const auto& [sig_name, n] : per_sig.items()) {
        const Significance sig = ctx.convert("counts", [&] { return parse_significance(sig_name); });
        if (!n.is_number_integer()) ctx.fail("counts." + category_name, "expected an integer");
        a.count(category, sig) = n.get<std::int64_t>();
      }
    }
    if (obj.contains("total_significant")) {
      a.stored_total_significant = ctx.integer(obj, "total_significant");
    }
    if (!seen.emplace(a.study_id, a.system_id, a.section).second) {
      throw DuplicateError(located(ctx, "duplicate annotation " + a.study_id + "/" + a.system_id));
    }
    out.push_back(std::move(a));
  });
  return out;
}

std::vector<JudgeScores> read_judge_scores(std::istream& in, const std::string& source) {
  std::vector<JudgeScores> out;
  std::set<ReportKey> seen;
  for_each_record(in, source, [&](const json& obj, const LineContext& ctx) {
    JudgeScores j;
    j.key = read_key(obj, ctx);
    const json& scores = ctx.at(obj, "scores");
    if (!scores.is_object()) ctx.fail("scores", "expected an object");
    for (const auto& [metric, value] : scores.items()) {
      if (!value.is_number()) ctx.fail("scores." + metric, "expected a number");
      j.scores[metric] = value.get<double>();
    }
    if (!seen.insert(j.key).second) {
      throw DuplicateError(located(ctx, "duplicate judge record " + j.key.str()));
    }
    out.push_back(std::move(j));
  });
  return out;
}

ScoreMatrix read_scores(std::istream& in, const std::string& source) {
  ScoreMatrix m;
  bool have_header = false;
  for_each_record(in, source, [&](const json& obj, const LineContext& ctx) {
    if (!have_header) {
      if (ctx.integer(obj, "format_version") != 1) ctx.fail("format_version", "unsupported");
      if (ctx.str(obj, "kind") != "score_matrix") ctx.fail("kind", "expected score_matrix");
      const json& metrics = ctx.at(obj, "metrics");
      if (!metrics.is_array()) ctx.fail("metrics", "expected an array");
      for (const json& metric : metrics) {
        const auto dir = ctx.convert("direction", [&] {
          return parse_direction(ctx.str_or(metric, "direction", "higher_better"));
        });
        m.add_metric(ctx.str(metric, "name"), dir);
      }
      have_header = true;
      return;
    }
    RowKey key;
    key.dataset = ctx.str(obj, "dataset");
    key.section = ctx.convert("section", [&] { return parse_section(ctx.str(obj, "section")); });
    key.study_id = ctx.str(obj, "study_id");
    key.system_id = ctx.str(obj, "system_id");
    if (m.find_row(key)) {
      throw DuplicateError(located(ctx, "duplicate score row " + key.study_id + "/" + key.system_id));
    }
    const std::size_t row = m.add_row(key);
    const json& scores = ctx.at(obj, "scores");
    if (!scores.is_object()) ctx.fail("scores", "expected an object");
    for (const auto& [metric, value] : scores.items()) {
      auto col = m.find_metric(metric);
      if (!col) ctx.fail("scores." + metric, "metric not declared in header");
      if (value.is_null()) continue;
      if (!value.is_number()) ctx.fail("scores." + metric, "expected a number or null");
      m.set(row, *col, value.get<double>());
    }
  });
  return m;
}

std::vector<Study> read_studies(const std::filesystem::path& path) {
  return read_path<std::vector<Study>>(
      path, [](std::istream& in, const std::string& src) { return read_studies(in, src); });
}
std::vector<CandidateReport> read_candidates(const std::filesystem::path& path) {
  return read_path<std::vector<CandidateReport>>(
      path, [](std::istream& in, const std::string& src) { return read_candidates(in, src); });
}
std::vector<LabelVector> read_labels(const std::filesystem::path& path, LabelSchema schema) {
  return read_path<std::vector<LabelVector>>(path, [schema](std::istream& in, const std::string& src) {
    return read_labels(in, schema, src);
  });
}
std::vector<EntityGraph> read_graphs(const std::filesystem::path& path) {
  return read_path<std::vector<EntityGraph>>(
      path, [](std::istream& in, const std::string& src) { return read_graphs(in, src); });
}
EmbeddingFile read_embeddings(const std::filesystem::path& path) {
  return read_path<EmbeddingFile>(
      path, [](std::istream& in, const std::string& src) { return read_embeddings(in, src); });
}
std::vector<ErrorAnnotation> read_annotations(const std::filesystem::path& path) {
  return read_path<std::vector<ErrorAnnotation>>(
      path, [](std::istream& in, const std::string& src) { return read_annotations(in, src); });
}
std::vector<JudgeScores> read_judge_scores(const std::filesystem::path& path) {
  return read_path<std::vector<JudgeScores>>(
      path, [](std::istream& in, const std::string& src) { return read_judge_scores(in, src); });
}
ScoreMatrix read_scores(const std::filesystem::path& path) {
  return read_path<ScoreMatrix>(
      path, [](std::istream& in, const std::string& src) { return read_scores(in, src); });
}

// --- writers ---------------------------------------------------------------------

void write_studies(std::span<const Study> studies, std::ostream& out) {
  for (const auto& s : studies) {
    write_line(out, {{"study_id", s.study_id},
                     {"section", to_string(s.section)},
                     {"reference_text", s.reference_text},
                     {"source_dataset", s.source_dataset}});
  }
}

void write_candidates(std::span<const CandidateReport> candidates, std::ostream& out) {
  for (const auto& c : candidates) {
    write_line(out, {{"study_id", c.study_id}, {"system_id", c.system_id}, {"text", c.text}});
  }
}

void write_labels(std::span<const LabelVector> labels, std::ostream& out) {
  for (const auto& v : labels) {
    json states = json::object();
    for (const auto& [name, state] : v.labels) states[name] = to_string(state);
    write_line(out, {{"study_id", v.key.study_id},
                     {"system_id", v.key.system_id},
                     {"schema", to_string(v.schema)},
                     {"labels", std::move(states)}});
  }
}

void write_graphs(std::span<const EntityGraph> graphs, std::ostream& out) {
  for (const auto& g : graphs) {
    json entities = json::array();
    for (const auto& e : g.entities) {
      entities.push_back({{"id", e.id}, {"tokens", e.tokens}, {"type", e.type}});
    }
    json relations = json::array();
    for (const auto& r : g.relations) {
      relations.push_back({{"head", r.head_id}, {"tail", r.tail_id}, {"type", r.type}});
    }
    write_line(out, {{"study_id", g.key.study_id},
                     {"system_id", g.key.system_id},
                     {"entities", std::move(entities)},
                     {"relations", std::move(relations)}});
  }
}

void write_embeddings(const EmbeddingFile& file, std::ostream& out) {
  write_line(out, {{"format_version", EmbeddingFile::kFormatVersion},
                   {"kind", to_string(file.kind)},
                   {"dim", file.dim},
                   {"record_count", file.records.size()}});
  for (const auto& rec : file.records) {
    json obj = {{"study_id", rec.key.study_id},
                {"system_id", rec.key.system_id},
                {"data", base64_encode(pack_floats_le(rec.matrix.values))}};
    if (file.kind == EmbeddingKind::token) obj["tokens"] = rec.matrix.tokens;
    write_line(out, obj);
  }
}

void write_annotations(std::span<const ErrorAnnotation> annotations, std::ostream& out) {
  for (const auto& a : annotations) {
    json counts = json::object();
    for (ErrorCategory c : kErrorCategories) {
      counts[std::string(to_string(c))] = {
          {"significant", a.count(c, Significance::significant)},
          {"insignificant", a.count(c, Significance::insignificant)}};
    }
    write_line(out, {{"study_id", a.study_id},
                     {"system_id", a.system_id},
                     {"section", to_string(a.section)},
                     {"counts", std::move(counts)},
                     {"total_significant", a.total_significant()}});
  }
}

void write_judge_scores(std::span<const JudgeScores> scores, std::ostream& out) {
  for (const auto& j : scores) {
    write_line(out, {{"study_id", j.key.study_id},
                     {"system_id", j.key.system_id},
                     {"scores", j.scores}});
  }
}

std::string format_percent(double value) {
  std::array<char, 64> buf{};
  std::snprintf(buf.data(), buf.size(), "%.1f", value * 100.0);
  std::string s(buf.data());
  if (s == "-0.0") s = "0.0";
  return s;
}

namespace {

json row_scores_json(const ScoreMatrix& m, std::size_t row) {
  json scores = json::object();
  for (std::size_t c = 0; c < m.metric_count(); ++c) {
    auto v = m.get(row, c);
    scores[m.metrics()[c]] = v ? json(*v) : json(nullptr);
  }
  return scores;
}

json metrics_header(const ScoreMatrix& m) {
  json metrics = json::array();
  for (std::size_t c = 0; c < m.metric_count(); ++c) {
    metrics.push_back({{"name", m.metrics()[c]}, {"direction", to_string(m.direction(c))}});
  }
  return metrics;
}

json row_json(const ScoreMatrix& m, std::size_t r) {
  const RowKey& k = m.rows()[r];
  return {{"dataset", k.dataset},
          {"section", to_string(k.section)},
          {"study_id", k.study_id},
          {"system_id", k.system_id},
          {"scores", row_scores_json(m, r)}};
}

void write_markdown(const ScoreMatrix& m, std::ostream& out) {
  out << "| System |";
  for (const auto& name : m.metrics()) out << ' ' << name << " |";
  out << "\n|---|";
  for (std::size_t c = 0; c < m.metric_count(); ++c) out << "---:|";
  out << '\n';

  // Blocks in order of first appearance; rows keep their order within a block.
  std::vector<std::pair<std::string, Section>> blocks;
  std::map<std::pair<std::string, Section>, std::vector<std::size_t>> members;
  for (std::size_t r = 0; r < m.row_count(); ++r) {
    const auto block = std::make_pair(m.rows()[r].dataset, m.rows()[r].section);
    auto [it, inserted] = members.try_emplace(block);
    if (inserted) blocks.push_back(block);
    it->second.push_back(r);
  }
  for (const auto& block : blocks) {
    out << "| **" << block.first << " / " << to_string(block.second) << "** |";
    for (std::size_t c = 0; c < m.metric_count(); ++c) out << " |";
    out << '\n';
    for (std::size_t r : members[block]) {
      const RowKey& k = m.rows()[r];
      out << "| " << k.system_id;
      if (k.study_id != kAggregateStudy) out << " (" << k.study_id << ")";
      out << " |";
      for (std::size_t c = 0; c < m.metric_count(); ++c) {
        auto v = m.get(r, c);
        out << ' ' << (v ? format_percent(*v) : std::string("-")) << " |";
      }
      out << '\n';
    }
  }
}

}  // namespace

void write_score_matrix(const ScoreMatrix& matrix, std::ostream& out, MatrixFormat format) {
  if (format == MatrixFormat::markdown) {
    write_markdown(matrix, out);
    return;
  }
  write_line(out, {{"format_version", 1}, {"kind", "score_matrix"}, {"metrics", metrics_header(matrix)}});
  for (std::size_t r = 0; r < matrix.row_count(); ++r) write_line(out, row_json(matrix, r));
}

void write_score_matrix(const ScoreMatrix& matrix, const std::filesystem::path& path,
                        MatrixFormat format) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  write_score_matrix(matrix, out, format);
  out.flush();
  if (!out) throw Error("failed writing '" + path.string() + "'");
}

json score_matrix_to_json(const ScoreMatrix& matrix) {
  json rows = json::array();
  for (std::size_t r = 0; r < matrix.row_count(); ++r) rows.push_back(row_json(matrix, r));
  return {{"metrics", metrics_header(matrix)}, {"rows", std::move(rows)}};
}

ScoreMatrix score_matrix_from_json(const json& j) {
  ScoreMatrix m;
  try {
    for (const auto& metric : j.at("metrics")) {
      m.add_metric(metric.at("name").get<std::string>(),
                   parse_direction(metric.value("direction", std::string("higher_better"))));
    }
    for (const auto& row : j.at("rows")) {
      RowKey key{row.at("dataset").get<std::string>(),
                 parse_section(row.at("section").get<std::string>()),
                 row.at("study_id").get<std::string>(), row.at("system_id").get<std::string>()};
      const std::size_t r = m.add_row(key);
      for (const auto& [name, value] : row.at("scores").items()) {
        auto col = m.find_metric(name);
        if (!col) throw Error("undeclared metric '" + name + "'");
        if (!value.is_null()) m.set(r, *col, value.get<double>());
      }
    }
  } catch (const json::exception& e) {
    throw Error(std::string("malformed score matrix: ") + e.what());
  }
  return m;
}

}  // namespace radeval
