#include "radeval/runner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <fstream>
#include <iostream>
#include <numeric>
#include <set>
#include <sstream>

#include "radeval/error.hpp"
#include "radeval/io.hpp"
#include "radeval/parallel.hpp"

namespace radeval {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// --- config parsing ---------------------------------------------------------------

const std::set<std::string> kSidecarKinds = {
    "token_embeddings", "radeval_token_embeddings", "report_embeddings", "chexpert_labels",
    "srr_labels",       "graphs",                   "judge_scores",
};

void check_keys(const json& obj, std::string_view where, std::initializer_list<std::string_view> allowed) {
  if (!obj.is_object()) throw ConfigError(std::string(where) + " must be an object");
  for (const auto& [key, value] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ConfigError("unknown key '" + key + "' in " + std::string(where));
    }
  }
}

fs::path existing_path(const json& value, const fs::path& base, std::string_view what) {
  if (!value.is_string()) throw ConfigError(std::string(what) + " must be a path string");
  fs::path p = value.get<std::string>();
  if (p.is_relative()) p = base / p;
  p = p.lexically_normal();
  if (!fs::exists(p)) throw ConfigError(std::string(what) + ": file not found: " + p.string());
  return p;
}

template <typename T>
T get_as(const json& obj, std::string_view key, std::string_view where) {
  try {
    return obj.at(std::string(key)).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("invalid value for '" + std::string(key) + "' in " + std::string(where));
  }
}

std::size_t get_count(const json& obj, std::string_view key, std::string_view where, bool allow_zero = false) {
  const json& v = obj.at(std::string(key));
  if (!v.is_number_unsigned() || (!allow_zero && v.get<std::uint64_t>() == 0)) {
    throw ConfigError("'" + std::string(key) + "' in " + std::string(where) + " must be a " +
                      (allow_zero ? "non-negative" : "positive") + " integer");
  }
  return v.get<std::size_t>();
}

template <typename Fn>
auto parse_enum(const json& v, std::string_view what, Fn parse) {
  if (!v.is_string()) throw ConfigError(std::string(what) + " must be a string");
  try {
    return parse(v.get<std::string>());
  } catch (const Error& e) {
    throw ConfigError(std::string(what) + ": " + e.what());
  }
}

SimilarityConfig parse_similarity(const json& obj, std::string_view where) {
  check_keys(obj, where, {"idf", "rescale_baseline", "clamp_negative", "matching"});
  SimilarityConfig c;
  if (obj.contains("idf")) c.idf_weighting = get_as<bool>(obj, "idf", where);
  if (obj.contains("clamp_negative")) c.clamp_negative = get_as<bool>(obj, "clamp_negative", where);
  if (obj.contains("rescale_baseline") && !obj["rescale_baseline"].is_null()) {
    const double b = get_as<double>(obj, "rescale_baseline", where);
    if (!(b >= 0.0 && b < 1.0)) throw ConfigError("rescale_baseline must lie in [0, 1)");
    c.rescale_baseline = b;
  }
  if (obj.contains("matching")) {
    c.matching = parse_enum(obj["matching"], "matching", [](const std::string& s) {
      if (s == "greedy") return MatchingMode::greedy;
      if (s == "sum") return MatchingMode::sum;
      throw Error("unknown matching mode '" + s + "'");
    });
  }
  return c;
}

json similarity_to_json(const SimilarityConfig& c) {
  return {{"idf", c.idf_weighting},
          {"rescale_baseline", c.rescale_baseline ? json(*c.rescale_baseline) : json(nullptr)},
          {"clamp_negative", c.clamp_negative},
          {"matching", c.matching == MatchingMode::greedy ? "greedy" : "sum"}};
}

void parse_options(const json& obj, const fs::path& base, MetricOptions& o) {
  check_keys(obj, "options", {"bleu", "bertscore", "radevalbertscore", "labels", "temporal", "radcliq"});
  if (obj.contains("bleu")) {
    const json& b = obj["bleu"];
    check_keys(b, "options.bleu", {"max_n", "smoothing", "epsilon"});
    if (b.contains("max_n")) o.bleu.max_n = static_cast<int>(get_count(b, "max_n", "options.bleu"));
    if (b.contains("epsilon")) {
      o.bleu.epsilon = get_as<double>(b, "epsilon", "options.bleu");
      if (!(o.bleu.epsilon > 0.0)) throw ConfigError("options.bleu.epsilon must be positive");
    }
    if (b.contains("smoothing")) {
      o.bleu.smoothing = parse_enum(b["smoothing"], "options.bleu.smoothing", [](const std::string& s) {
        if (s == "none") return BleuSmoothing::none;
        if (s == "add_epsilon") return BleuSmoothing::add_epsilon;
        throw Error("unknown smoothing '" + s + "'");
      });
    }
  }
  if (obj.contains("bertscore")) o.bertscore = parse_similarity(obj["bertscore"], "options.bertscore");
  if (obj.contains("radevalbertscore")) {
    o.radevalbertscore = parse_similarity(obj["radevalbertscore"], "options.radevalbertscore");
  }
  if (obj.contains("labels")) {
    const json& l = obj["labels"];
    check_keys(l, "options.labels", {"uncertain", "average"});
    if (l.contains("uncertain")) {
      o.uncertain = parse_enum(l["uncertain"], "options.labels.uncertain", parse_uncertain_policy);
    }
    if (l.contains("average")) {
      o.label_average = parse_enum(l["average"], "options.labels.average", parse_label_average);
    }
  }
  if (obj.contains("temporal")) {
    const json& t = obj["temporal"];
    check_keys(t, "options.temporal", {"lexicon", "empty_policy"});
    if (t.contains("lexicon")) o.temporal_lexicon = existing_path(t["lexicon"], base, "temporal lexicon");
    if (t.contains("empty_policy")) {
      o.temporal_empty = parse_enum(t["empty_policy"], "options.temporal.empty_policy", parse_empty_policy);
    }
  }
  if (obj.contains("radcliq")) {
    const json& r = obj["radcliq"];
    check_keys(r, "options.radcliq", {"spec"});
    if (r.contains("spec")) o.radcliq_spec = existing_path(r["spec"], base, "radcliq spec");
  }
}

CorpusConfig parse_corpus(const json& obj, const fs::path& base) {
  check_keys(obj, "corpus", {"dataset", "section", "studies", "candidates", "sidecars"});
  for (const char* key : {"dataset", "section", "studies", "candidates"}) {
    if (!obj.contains(key)) throw ConfigError(std::string("corpus entry lacks '") + key + "'");
  }
  CorpusConfig c;
  c.dataset = get_as<std::string>(obj, "dataset", "corpus");
  if (c.dataset.empty()) throw ConfigError("corpus dataset must be non-empty");
  c.section = parse_enum(obj["section"], "corpus section", parse_section);
  c.studies = existing_path(obj["studies"], base, "studies");
  c.candidates = existing_path(obj["candidates"], base, "candidates");
  if (obj.contains("sidecars")) {
    const json& s = obj["sidecars"];
    if (!s.is_object()) throw ConfigError("corpus sidecars must be an object");
    for (const auto& [kind, value] : s.items()) {
      if (!kSidecarKinds.count(kind)) throw ConfigError("unknown sidecar kind '" + kind + "'");
      c.sidecars[kind] = existing_path(value, base, kind);
    }
  }
  return c;
}

RetrievalConfig parse_retrieval(const json& obj, const fs::path& base) {
  constexpr std::string_view where = "retrieval";
  check_keys(obj, where,
             {"datasets", "n_queries", "max_pos_per_label", "n_seeds", "ks", "metrics", "divide_by_k",
              "query_sampling"});
  RetrievalConfig r;
  if (!obj.contains("datasets") || !obj["datasets"].is_array() || obj["datasets"].empty()) {
    throw ConfigError("retrieval needs a non-empty 'datasets' list");
  }
  for (const json& d : obj["datasets"]) {
    check_keys(d, "retrieval dataset", {"name", "embeddings", "labels", "schema"});
    if (!d.contains("name") || !d.contains("embeddings") || !d.contains("labels")) {
      throw ConfigError("retrieval dataset needs 'name', 'embeddings' and 'labels'");
    }
    RetrievalDataset ds;
    ds.name = get_as<std::string>(d, "name", "retrieval dataset");
    ds.embeddings = existing_path(d["embeddings"], base, "retrieval embeddings");
    ds.labels = existing_path(d["labels"], base, "retrieval labels");
    if (d.contains("schema")) ds.schema = parse_enum(d["schema"], "retrieval schema", parse_label_schema);
    r.datasets.push_back(std::move(ds));
  }
  RetrievalOptions& o = r.options;
  if (obj.contains("n_queries")) o.n_queries = get_count(obj, "n_queries", where);
  if (obj.contains("max_pos_per_label")) o.max_pos_per_label = get_count(obj, "max_pos_per_label", where);
  if (obj.contains("n_seeds")) o.n_seeds = get_count(obj, "n_seeds", where);
  if (obj.contains("divide_by_k")) o.divide_by_k = get_as<bool>(obj, "divide_by_k", where);
  if (obj.contains("query_sampling")) {
    o.query_sampling = parse_enum(obj["query_sampling"], "retrieval.query_sampling", parse_query_sampling);
  }
  if (obj.contains("ks")) {
    const json& ks = obj["ks"];
    if (!ks.is_array() || ks.empty()) throw ConfigError("retrieval.ks must be a non-empty list");
    o.ks.clear();
    for (const json& k : ks) {
      if (!k.is_number_unsigned() || k.get<std::size_t>() == 0) {
        throw ConfigError("retrieval.ks entries must be positive integers");
      }
      o.ks.push_back(k.get<std::size_t>());
    }
  }
  if (obj.contains("metrics")) {
    o.map = o.ndcg = false;
    bool precision = false;
    for (const json& m : obj["metrics"]) {
      const std::string name = m.is_string() ? m.get<std::string>() : "";
      if (name == "precision") {
        precision = true;
      } else if (name == "map") {
        o.map = true;
      } else if (name == "ndcg") {
        o.ndcg = true;
      } else {
        throw ConfigError("unknown retrieval metric '" + name + "' (expected precision, map, ndcg)");
      }
    }
    if (!precision) {
      if (!o.map && !o.ndcg) throw ConfigError("retrieval.metrics selects nothing");
      // P@k is always cheap to report; the list only switches mAP / nDCG.
    }
  }
  return r;
}

// --- output helpers -----------------------------------------------------------------

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error("cannot create output directory " + dir.string() + ": " + ec.message());
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("cannot write " + path.string());
}

void write_results(const RunConfig& config, std::string_view command, const json& results,
                   const Audit& audit) {
  json doc;
  doc["command"] = command;
  doc["config"] = config_to_json(config);
  doc["results"] = results;
  doc["audit"] = audit.to_json();
  write_text(config.output_dir / "results.json", doc.dump(2) + "\n");
}

void print_warnings(const Audit& audit) {
  for (const auto& w : audit.warnings) std::cerr << "warning: " << w << "\n";
}

std::string fixed3(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  std::string s = buf;
  if (s == "-0.000") s = "0.000";
  return s;
}

std::string warnings_md(const Audit& audit) {
  if (audit.warnings.empty()) return "";
  std::string s = "\n## Warnings\n\n";
  for (const auto& w : audit.warnings) s += "- " + w + "\n";
  return s;
}

// --- scoring ------------------------------------------------------------------------

using Cells = std::vector<std::optional<double>>;

std::map<ReportKey, const EmbeddingRecord*> index_embeddings(const EmbeddingFile& f) {
  std::map<ReportKey, const EmbeddingRecord*> m;
  for (const auto& r : f.records) m.emplace(r.key, &r);
  return m;
}

template <typename T>
std::map<ReportKey, const T*> index_by_key(const std::vector<T>& items) {
  std::map<ReportKey, const T*> m;
  for (const auto& x : items) m.emplace(x.key, &x);
  return m;
}

struct CorpusScorer {
  const Corpus& corpus;
  const RunConfig& config;
  Audit& audit;
  std::size_t threads;
  std::map<std::string, const Study*> studies;
  std::vector<TokenSequence> cand_tokens;
  std::vector<TokenSequence> ref_tokens;  // per candidate
  std::string label;                       // "dataset/section"

  CorpusScorer(const Corpus& c, const RunConfig& cfg, Audit& a)
      : corpus(c), config(cfg), audit(a), threads(cfg.worker_count()) {
    label = c.dataset + "/" + std::string(to_string(c.section));
    for (const auto& s : c.studies) studies.emplace(s.study_id, &s);
    const std::size_t n = c.candidates.size();
    cand_tokens.resize(n);
    ref_tokens.resize(n);
    parallel_for(n, threads, [&](std::size_t i) {
      cand_tokens[i] = tokenize(c.candidates[i].text);
      ref_tokens[i] = tokenize(reference_text(i));
    });
  }

  const std::string& reference_text(std::size_t i) const {
    return studies.at(corpus.candidates[i].study_id)->reference_text;
  }

  void note_missing(const std::string& metric, const ReportKey& key, std::string_view why) {
    json& m = audit.details["missing_cells"][label][metric];
    m.push_back(key.str() + ": " + std::string(why));
  }

  // Per-candidate cells; `fn` returns nullopt with a reason for a missing cell.
  template <typename Fn>
  Cells per_candidate(const std::string& metric, Fn fn) {
    const std::size_t n = corpus.candidates.size();
    Cells cells(n);
    std::vector<std::string> why(n);
    parallel_for(n, threads, [&](std::size_t i) {
      try {
        cells[i] = fn(i, why[i]);
      } catch (const Error& e) {
        cells[i].reset();
        why[i] = e.what();
      }
    });
    for (std::size_t i = 0; i < n; ++i) {
      if (!cells[i]) note_missing(metric, corpus.candidates[i].key(), why[i]);
    }
    return cells;
  }

  Cells embedding_metric(const std::string& metric, const EmbeddingFile& file, const SimilarityConfig& sim) {
    const auto index = index_embeddings(file);
    std::optional<IdfTable> idf;
    if (sim.idf_weighting) {
      std::vector<std::vector<std::string>> docs;
      for (const auto& r : file.records) {
        if (r.key.is_reference()) docs.push_back(r.matrix.tokens);
      }
      idf = compute_idf(docs);
    }
    return per_candidate(metric, [&](std::size_t i, std::string& why) -> std::optional<double> {
      const CandidateReport& c = corpus.candidates[i];
      auto cand = index.find(c.key());
      auto ref = index.find({c.study_id, std::string(kReferenceSystem)});
      if (cand == index.end() || ref == index.end()) {
        why = "no embedding record";
        return std::nullopt;
      }
      return bertscore(cand->second->matrix, ref->second->matrix, sim, idf ? &*idf : nullptr).f1;
    });
  }

  Cells label_metric(const std::string& metric, const std::vector<LabelVector>& labels, LabelSchema schema) {
    const auto index = index_by_key(labels);
    return per_candidate(metric, [&](std::size_t i, std::string& why) -> std::optional<double> {
      const CandidateReport& c = corpus.candidates[i];
      auto cand = index.find(c.key());
      auto ref = index.find({c.study_id, std::string(kReferenceSystem)});
      if (cand == index.end() || ref == index.end()) {
        why = "no label record";
        return std::nullopt;
      }
      const LabelVector* cv = cand->second;
      const LabelVector* rv = ref->second;
      return label_f1(std::span(cv, 1), std::span(rv, 1), schema, config.options.uncertain,
                      LabelAverage::example);
    });
  }

  std::optional<double> label_aggregate(const std::string& metric, const std::vector<LabelVector>& labels,
                                        LabelSchema schema, const std::vector<std::size_t>& members) {
    const auto index = index_by_key(labels);
    std::vector<LabelVector> cands;
    std::vector<LabelVector> refs;
    for (std::size_t i : members) {
      const CandidateReport& c = corpus.candidates[i];
      auto cand = index.find(c.key());
      auto ref = index.find({c.study_id, std::string(kReferenceSystem)});
      if (cand == index.end() || ref == index.end()) continue;
      cands.push_back(*cand->second);
      refs.push_back(*ref->second);
    }
    if (cands.empty()) return std::nullopt;
    try {
      return label_f1(cands, refs, schema, config.options.uncertain, config.options.label_average);
    } catch (const UndefinedError& e) {
      audit.warn(metric + " aggregate undefined for " + label + "/" + corpus.candidates[members.front()].system_id +
                 ": " + e.what());
      return std::nullopt;
    }
  }

  Cells graph_metric(const std::string& metric, const std::vector<EntityGraph>& graphs, GraphVariant variant) {
    const auto index = index_by_key(graphs);
    return per_candidate(metric, [&](std::size_t i, std::string& why) -> std::optional<double> {
      const CandidateReport& c = corpus.candidates[i];
      auto cand = index.find(c.key());
      auto ref = index.find({c.study_id, std::string(kReferenceSystem)});
      if (cand == index.end() || ref == index.end()) {
        why = "no graph record";
        return std::nullopt;
      }
      return graph_f1(*cand->second, *ref->second, variant);
    });
  }
};

std::optional<double> mean_of(const Cells& cells, const std::vector<std::size_t>& members) {
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i : members) {
    if (cells[i]) {
      sum += *cells[i];
      ++n;
    }
  }
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

ScoreMatrix aggregate_view(const ScoreMatrix& m) {
  ScoreMatrix out;
  for (std::size_t c = 0; c < m.metric_count(); ++c) out.add_metric(m.metrics()[c], m.direction(c));
  for (std::size_t r = 0; r < m.row_count(); ++r) {
    if (m.rows()[r].study_id != kAggregateStudy) continue;
    const std::size_t row = out.add_row(m.rows()[r]);
    for (std::size_t c = 0; c < m.metric_count(); ++c) {
      if (auto v = m.get(r, c)) out.set(row, c, *v);
    }
  }
  return out;
}

ScoreMatrix obtain_matrix(const RunConfig& config, Audit& audit) {
  if (config.scores) return read_scores(*config.scores);
  if (config.corpora.empty()) throw ConfigError("config needs either 'scores' or 'corpora'");
  const auto corpora = load_corpora(config);
  ScoreOutcome outcome = score_corpora(corpora, config);
  audit = std::move(outcome.audit);
  return std::move(outcome.matrix);
}

json agreement_row_json(const AgreementRow& row) {
  json j;
  j["metric"] = row.metric;
  j["endpoint"] = row.endpoint.str();
  j["statistic"] = to_string(row.statistic);
  j["annotations"] = row.audit.annotations;
  if (row.result) {
    const AgreementResult& r = *row.result;
    j["tau_b"] = r.tau_b;
    j["ci"] = {r.ci_low, r.ci_high};
    j["classification"] = to_string(r.classification);
    j["scope"] = scope_string(r);
    j["n"] = r.n;
    j["n_pairs"] = r.n_pairs;
    j["n_blocks"] = r.n_blocks ? json(*r.n_blocks) : json(nullptr);
    j["undefined_resamples"] = r.undefined_resamples;
  } else {
    j["tau_b"] = nullptr;
    j["error"] = row.error;
  }
  return j;
}

}  // namespace

// --- public API -------------------------------------------------------------------------

ValidationFailed::ValidationFailed(ValidationReport report)
    : Error("validation failed with " + std::to_string(report.issues.size()) + " issue(s)"),
      report_(std::move(report)) {}

const std::vector<std::string>& builtin_metrics() {
  static const std::vector<std::string> names = {
      "bleu",        "rougeL",     "bertscore", "radevalbertscore", "chexbert_sim",
      "chexbert_5",  "chexbert_14", "srr_bert", "radgraph_simple",  "radgraph_er",
      "radgraph_er_bar", "temporal_f1", "radcliq",
  };
  return names;
}

std::uint64_t RunConfig::require_seed(std::string_view command) const {
  if (!seed) throw ConfigError(std::string(command) + " needs a seed");
  return *seed;
}

std::size_t RunConfig::worker_count() const { return effective_threads(threads); }

RunConfig config_from_json(const json& doc, const fs::path& base_dir) {
  check_keys(doc, "config",
             {"seed", "threads", "output_dir", "metrics", "options", "corpora", "scores", "annotations",
              "endpoints", "agree_dataset", "bootstrap", "permutation", "compare", "retrieval"});
  RunConfig c;
  if (doc.contains("seed") && !doc["seed"].is_null()) {
    if (!doc["seed"].is_number_unsigned()) throw ConfigError("seed must be a non-negative integer");
    c.seed = doc["seed"].get<std::uint64_t>();
  }
  if (doc.contains("threads")) c.threads = get_count(doc, "threads", "config", true);
  if (doc.contains("output_dir")) {
    fs::path p = get_as<std::string>(doc, "output_dir", "config");
    c.output_dir = p.is_relative() ? (base_dir / p).lexically_normal() : p;
  } else {
    c.output_dir = (base_dir / c.output_dir).lexically_normal();
  }
  if (doc.contains("metrics")) {
    if (!doc["metrics"].is_array()) throw ConfigError("metrics must be a list");
    std::set<std::string> seen;
    for (const json& m : doc["metrics"]) {
      if (!m.is_string() || m.get<std::string>().empty()) throw ConfigError("metric names must be non-empty strings");
      if (!seen.insert(m.get<std::string>()).second) {
        throw ConfigError("metric '" + m.get<std::string>() + "' listed twice");
      }
      c.metrics.push_back(m.get<std::string>());
    }
  }
  if (doc.contains("options")) parse_options(doc["options"], base_dir, c.options);
  if (doc.contains("corpora")) {
    if (!doc["corpora"].is_array()) throw ConfigError("corpora must be a list");
    std::set<std::pair<std::string, Section>> seen;
    for (const json& entry : doc["corpora"]) {
      CorpusConfig cc = parse_corpus(entry, base_dir);
      if (!seen.insert({cc.dataset, cc.section}).second) {
        throw ConfigError("corpus " + cc.dataset + "/" + std::string(to_string(cc.section)) + " listed twice");
      }
      c.corpora.push_back(std::move(cc));
    }
  }
  if (doc.contains("scores")) c.scores = existing_path(doc["scores"], base_dir, "scores");
  if (doc.contains("annotations")) c.annotations = existing_path(doc["annotations"], base_dir, "annotations");
  if (doc.contains("endpoints")) {
    if (!doc["endpoints"].is_array()) throw ConfigError("endpoints must be a list");
    for (const json& e : doc["endpoints"]) c.endpoints.push_back(parse_enum(e, "endpoint", parse_endpoint));
  }
  if (c.endpoints.empty()) c.endpoints.push_back(parse_endpoint("significant@all"));
  if (doc.contains("agree_dataset")) c.agree_dataset = get_as<std::string>(doc, "agree_dataset", "config");
  if (doc.contains("bootstrap")) {
    const json& b = doc["bootstrap"];
    check_keys(b, "bootstrap", {"resamples", "level"});
    if (b.contains("resamples")) c.bootstrap.resamples = get_count(b, "resamples", "bootstrap");
    if (b.contains("level")) {
      c.bootstrap.level = get_as<double>(b, "level", "bootstrap");
      if (!(c.bootstrap.level > 0.0 && c.bootstrap.level < 1.0)) {
        throw ConfigError("bootstrap.level must lie in (0, 1)");
      }
    }
  }
  if (doc.contains("permutation")) {
    const json& p = doc["permutation"];
    check_keys(p, "permutation", {"iterations"});
    if (p.contains("iterations")) c.permutation.iterations = get_count(p, "iterations", "permutation");
  }
  if (doc.contains("compare")) {
    const json& p = doc["compare"];
    check_keys(p, "compare", {"system_a", "system_b", "metric"});
    CompareConfig cc;
    if (p.contains("system_a")) cc.system_a = get_as<std::string>(p, "system_a", "compare");
    if (p.contains("system_b")) cc.system_b = get_as<std::string>(p, "system_b", "compare");
    if (p.contains("metric")) cc.metric = get_as<std::string>(p, "metric", "compare");
    c.compare = cc;
  }
  if (doc.contains("retrieval")) c.retrieval = parse_retrieval(doc["retrieval"], base_dir);
  return c;
}

RunConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return config_from_json(doc, path.parent_path().empty() ? fs::current_path() : path.parent_path());
}

json config_to_json(const RunConfig& c) {
  json j;
  j["seed"] = c.seed ? json(*c.seed) : json(nullptr);
  j["metrics"] = c.metrics.empty() ? json(builtin_metrics()) : json(c.metrics);
  const MetricOptions& o = c.options;
  j["options"] = {
      {"bleu",
       {{"max_n", o.bleu.max_n},
        {"smoothing", o.bleu.smoothing == BleuSmoothing::none ? "none" : "add_epsilon"},
        {"epsilon", o.bleu.epsilon}}},
      {"bertscore", similarity_to_json(o.bertscore)},
      {"radevalbertscore", similarity_to_json(o.radevalbertscore)},
      {"labels",
       {{"uncertain", o.uncertain == UncertainPolicy::as_negative ? "as_negative" : "as_positive"},
        {"average", o.label_average == LabelAverage::micro   ? "micro"
                    : o.label_average == LabelAverage::macro ? "macro"
                                                             : "example"}}},
      {"temporal",
       {{"lexicon", o.temporal_lexicon ? json(o.temporal_lexicon->generic_string()) : json(nullptr)},
        {"empty_policy", o.temporal_empty == EmptyPolicy::one ? "one" : "skip"}}},
      {"radcliq", {{"spec", o.radcliq_spec ? json(o.radcliq_spec->generic_string()) : json(nullptr)}}},
  };
  j["corpora"] = json::array();
  for (const auto& cc : c.corpora) {
    json s = json::object();
    for (const auto& [kind, path] : cc.sidecars) s[kind] = path.generic_string();
    j["corpora"].push_back({{"dataset", cc.dataset},
                            {"section", to_string(cc.section)},
                            {"studies", cc.studies.generic_string()},
                            {"candidates", cc.candidates.generic_string()},
                            {"sidecars", s}});
  }
  j["scores"] = c.scores ? json(c.scores->generic_string()) : json(nullptr);
  j["annotations"] = c.annotations ? json(c.annotations->generic_string()) : json(nullptr);
  j["endpoints"] = json::array();
  for (const auto& e : c.endpoints) j["endpoints"].push_back(e.str());
  j["agree_dataset"] = c.agree_dataset ? json(*c.agree_dataset) : json(nullptr);
  j["bootstrap"] = {{"resamples", c.bootstrap.resamples}, {"level", c.bootstrap.level}};
  j["permutation"] = {{"iterations", c.permutation.iterations}};
  if (c.compare) {
    j["compare"] = {{"system_a", c.compare->system_a},
                    {"system_b", c.compare->system_b},
                    {"metric", c.compare->metric}};
  }
  if (c.retrieval) {
    const RetrievalOptions& r = c.retrieval->options;
    json ds = json::array();
    for (const auto& d : c.retrieval->datasets) {
      ds.push_back({{"name", d.name},
                    {"embeddings", d.embeddings.generic_string()},
                    {"labels", d.labels.generic_string()},
                    {"schema", to_string(d.schema)}});
    }
    json metrics = {"precision"};
    if (r.map) metrics.push_back("map");
    if (r.ndcg) metrics.push_back("ndcg");
    j["retrieval"] = {{"datasets", ds},
                      {"n_queries", r.n_queries},
                      {"max_pos_per_label", r.max_pos_per_label},
                      {"n_seeds", r.n_seeds},
                      {"ks", r.ks},
                      {"metrics", metrics},
                      {"divide_by_k", r.divide_by_k},
                      {"query_sampling", r.query_sampling == QuerySampling::uniform ? "uniform" : "per_label"}};
  }
  return j;
}

std::vector<Corpus> load_corpora(const RunConfig& config) {
  std::vector<Corpus> out;
  for (const auto& cc : config.corpora) {
    Corpus c;
    c.dataset = cc.dataset;
    c.section = cc.section;
    c.studies = read_studies(cc.studies);
    c.candidates = read_candidates(cc.candidates);
    for (const auto& [kind, path] : cc.sidecars) {
      if (kind == "token_embeddings") {
        c.sidecars.token_embeddings = read_embeddings(path);
      } else if (kind == "radeval_token_embeddings") {
        c.sidecars.radeval_token_embeddings = read_embeddings(path);
      } else if (kind == "report_embeddings") {
        c.sidecars.report_embeddings = read_embeddings(path);
      } else if (kind == "chexpert_labels") {
        c.sidecars.chexpert_labels = read_labels(path, LabelSchema::chexpert14);
      } else if (kind == "srr_labels") {
        c.sidecars.srr_labels = read_labels(path, LabelSchema::srr55);
      } else if (kind == "graphs") {
        c.sidecars.graphs = read_graphs(path);
      } else if (kind == "judge_scores") {
        c.sidecars.judge_scores = read_judge_scores(path);
      }
    }
    out.push_back(std::move(c));
  }
  return out;
}

json Audit::to_json() const {
  json j = details;
  j["warnings"] = warnings;
  return j;
}

ScoreOutcome score_corpora(std::span<const Corpus> corpora, const RunConfig& config) {
  ValidationReport report = validate_corpora(corpora, {});
  if (!report.ok()) throw ValidationFailed(std::move(report));

  ScoreOutcome out;
  Audit& audit = out.audit;
  const std::vector<std::string> metrics = config.metrics.empty() ? builtin_metrics() : config.metrics;
  const std::set<std::string> builtin(builtin_metrics().begin(), builtin_metrics().end());

  std::optional<CompositeSpec> radcliq;
  const bool want_radcliq = std::find(metrics.begin(), metrics.end(), "radcliq") != metrics.end();
  if (want_radcliq) {
    if (config.options.radcliq_spec) {
      try {
        radcliq = load_composite_spec(*config.options.radcliq_spec);
      } catch (const Error& e) {
        throw ConfigError(std::string("radcliq spec: ") + e.what());
      }
    } else {
      audit.warn("metric 'radcliq' skipped: no composite spec configured (options.radcliq.spec)");
    }
  }
  const TemporalLexicon lexicon = config.options.temporal_lexicon
                                      ? load_temporal_lexicon(*config.options.temporal_lexicon)
                                      : TemporalLexicon::defaults();

  ScoreMatrix& matrix = out.matrix;
  auto needs = [](const Corpus& c, const std::string& m) -> std::optional<std::string> {
    const Sidecars& s = c.sidecars;
    if (m == "bertscore" && !s.token_embeddings) return "token_embeddings";
    if (m == "radevalbertscore" && !s.radeval_token_embeddings) return "radeval_token_embeddings";
    if (m == "chexbert_sim" && !s.report_embeddings) return "report_embeddings";
    if ((m == "chexbert_5" || m == "chexbert_14") && !s.chexpert_labels) return "chexpert_labels";
    if (m == "srr_bert" && !s.srr_labels) return "srr_labels";
    if (m.starts_with("radgraph_") && !s.graphs) return "graphs";
    return std::nullopt;
  };
  auto judge_has = [](const Corpus& c, const std::string& m) {
    if (!c.sidecars.judge_scores) return false;
    return std::any_of(c.sidecars.judge_scores->begin(), c.sidecars.judge_scores->end(),
                       [&](const JudgeScores& j) { return j.scores.count(m) > 0; });
  };

  // Columns: every selected metric that at least one corpus can compute.
  std::vector<std::string> columns;
  for (const auto& m : metrics) {
    if (m == "radcliq") continue;
    bool any = false;
    for (const Corpus& c : corpora) {
      const std::string where = c.dataset + "/" + std::string(to_string(c.section));
      if (builtin.count(m)) {
        if (auto missing = needs(c, m)) {
          audit.warn("metric '" + m + "' skipped for " + where + ": no " + *missing + " sidecar");
        } else {
          any = true;
        }
      } else if (judge_has(c, m)) {
        any = true;
      } else {
        audit.warn("metric '" + m + "' skipped for " + where + ": not a built-in metric and no judge score column");
      }
    }
    if (any) {
      matrix.add_metric(m);
      columns.push_back(m);
    }
  }

  for (const Corpus& corpus : corpora) {
    CorpusScorer scorer(corpus, config, audit);
    const std::size_t n = corpus.candidates.size();

    std::vector<std::size_t> row_of(n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto& c = corpus.candidates[i];
      row_of[i] = matrix.add_row({corpus.dataset, corpus.section, c.study_id, c.system_id});
    }
    std::map<std::string, std::vector<std::size_t>> by_system;
    for (std::size_t i = 0; i < n; ++i) by_system[corpus.candidates[i].system_id].push_back(i);
    std::map<std::string, std::size_t> agg_row;
    for (const auto& [system, members] : by_system) {
      agg_row[system] = matrix.add_row({corpus.dataset, corpus.section, std::string(kAggregateStudy), system});
    }

    for (const std::string& m : columns) {
      if (builtin.count(m) && needs(corpus, m)) continue;
      if (!builtin.count(m) && !judge_has(corpus, m)) continue;
      const std::size_t col = *matrix.find_metric(m);
      const Sidecars& s = corpus.sidecars;

      Cells cells;
      std::function<std::optional<double>(const std::vector<std::size_t>&)> aggregate =
          [&](const std::vector<std::size_t>& members) { return mean_of(cells, members); };

      if (m == "bleu") {
        cells = scorer.per_candidate(m, [&](std::size_t i, std::string&) -> std::optional<double> {
          return sentence_bleu(scorer.cand_tokens[i], scorer.ref_tokens[i], config.options.bleu);
        });
        aggregate = [&](const std::vector<std::size_t>& members) -> std::optional<double> {
          std::vector<TokenSequence> c;
          std::vector<TokenSequence> r;
          for (std::size_t i : members) {
            c.push_back(scorer.cand_tokens[i]);
            r.push_back(scorer.ref_tokens[i]);
          }
          return bleu(c, r, config.options.bleu);
        };
      } else if (m == "rougeL") {
        cells = scorer.per_candidate(m, [&](std::size_t i, std::string&) -> std::optional<double> {
          return rouge_l(scorer.cand_tokens[i], scorer.ref_tokens[i]).f1;
        });
      } else if (m == "bertscore") {
        cells = scorer.embedding_metric(m, *s.token_embeddings, config.options.bertscore);
      } else if (m == "radevalbertscore") {
        cells = scorer.embedding_metric(m, *s.radeval_token_embeddings, config.options.radevalbertscore);
      } else if (m == "chexbert_sim") {
        const auto index = index_embeddings(*s.report_embeddings);
        cells = scorer.per_candidate(m, [&](std::size_t i, std::string& why) -> std::optional<double> {
          const CandidateReport& c = corpus.candidates[i];
          auto cand = index.find(c.key());
          auto ref = index.find({c.study_id, std::string(kReferenceSystem)});
          if (cand == index.end() || ref == index.end()) {
            why = "no embedding record";
            return std::nullopt;
          }
          if (cand->second->matrix.rows() != 1 || ref->second->matrix.rows() != 1) {
            why = "report embedding must have exactly one row";
            return std::nullopt;
          }
          return report_cosine(cand->second->matrix.row(0), ref->second->matrix.row(0));
        });
      } else if (m == "chexbert_5" || m == "chexbert_14" || m == "srr_bert") {
        const LabelSchema schema = m == "chexbert_5"    ? LabelSchema::chexpert5
                                   : m == "chexbert_14" ? LabelSchema::chexpert14
                                                        : LabelSchema::srr55;
        const auto& labels = m == "srr_bert" ? *s.srr_labels : *s.chexpert_labels;
        cells = scorer.label_metric(m, labels, schema);
        aggregate = [&, schema, m](const std::vector<std::size_t>& members) {
          return scorer.label_aggregate(m, labels, schema, members);
        };
      } else if (m.starts_with("radgraph_")) {
        const GraphVariant v = m == "radgraph_simple" ? GraphVariant::entity_match
                               : m == "radgraph_er"   ? GraphVariant::avg_er
                                                      : GraphVariant::entity_with_relation;
        cells = scorer.graph_metric(m, *s.graphs, v);
      } else if (m == "temporal_f1") {
        cells = scorer.per_candidate(m, [&](std::size_t i, std::string& why) -> std::optional<double> {
          auto v = temporal_entity_f1(corpus.candidates[i].text, scorer.reference_text(i), lexicon,
                                      config.options.temporal_empty);
          if (!v) why = "no temporal terms (skipped)";
          return v;
        });
      } else {
        const auto index = index_by_key(*s.judge_scores);
        cells = scorer.per_candidate(m, [&](std::size_t i, std::string& why) -> std::optional<double> {
          auto it = index.find(corpus.candidates[i].key());
          if (it == index.end() || !it->second->scores.count(m)) {
            why = "no judge score";
            return std::nullopt;
          }
          return it->second->scores.at(m);
        });
      }

      for (std::size_t i = 0; i < n; ++i) {
        if (cells[i]) matrix.set(row_of[i], col, *cells[i]);
      }
      for (const auto& [system, members] : by_system) {
        std::optional<double> v;
        try {
          v = aggregate(members);
        } catch (const Error& e) {
          audit.warn(m + " aggregate for " + scorer.label + "/" + system + " failed: " + e.what());
        }
        if (v) matrix.set(agg_row[system], col, *v);
      }
    }
  }

  if (radcliq) {
    try {
      check_composite(*radcliq, matrix.metrics());
    } catch (const Error& e) {
      throw ConfigError(std::string("radcliq spec: ") + e.what());
    }
    const std::vector<std::optional<double>> values = composite(matrix, *radcliq);
    const std::size_t col = matrix.add_metric("radcliq", radcliq->direction);
    for (std::size_t r = 0; r < values.size(); ++r) {
      if (values[r]) matrix.set(r, col, *values[r]);
    }
  }
  return out;
}

CompareOutcome compare_systems(const ScoreMatrix& matrix, const CompareConfig& compare, const RunConfig& config) {
  const std::uint64_t seed = config.require_seed("compare");
  if (compare.system_a.empty() || compare.system_b.empty() || compare.metric.empty()) {
    throw ConfigError("compare needs system_a, system_b and metric");
  }
  const auto col = matrix.find_metric(compare.metric);
  if (!col) throw ConfigError("metric '" + compare.metric + "' is not in the score matrix");

  CompareOutcome out;
  std::vector<double> a;
  std::vector<double> b;
  json unpaired = json::array();
  for (std::size_t r = 0; r < matrix.row_count(); ++r) {
    const RowKey& k = matrix.rows()[r];
    if (k.study_id == kAggregateStudy || k.system_id != compare.system_a) continue;
    const auto other = matrix.find_row({k.dataset, k.section, k.study_id, compare.system_b});
    const auto va = matrix.get(r, *col);
    const auto vb = other ? matrix.get(*other, *col) : std::nullopt;
    if (va && vb) {
      a.push_back(*va);
      b.push_back(*vb);
    } else {
      unpaired.push_back(k.dataset + "/" + std::string(to_string(k.section)) + "/" + k.study_id);
    }
  }
  if (!unpaired.empty()) {
    out.audit.warn(std::to_string(unpaired.size()) + " stud(ies) lack a score for both systems and were left out");
  }
  out.audit.details["unpaired"] = unpaired;
  out.n_pairs = a.size();

  PermutationOptions p = config.permutation;
  p.seed = seed;
  p.threads = config.worker_count();
  out.permutation = permutation_test(a, b, p);
  BootstrapOptions bo = config.bootstrap;
  bo.seed = seed;
  bo.threads = config.worker_count();
  out.interval = bootstrap_diff_ci(a, b, bo);
  return out;
}

RetrievalOutcome run_retrieval(const RunConfig& config) {
  if (!config.retrieval) throw ConfigError("config has no 'retrieval' section");
  RetrievalOptions options = config.retrieval->options;
  options.seed = config.require_seed("retrieve");
  options.threads = config.worker_count();

  RetrievalOutcome out;
  for (const auto& ds : config.retrieval->datasets) {
    const EmbeddingFile emb = read_embeddings(ds.embeddings);
    if (!emb.records.empty() && emb.kind != EmbeddingKind::report) {
      throw Error(ds.embeddings.string() + ": retrieval needs report embeddings");
    }
    const std::vector<LabelVector> labels = read_labels(ds.labels, ds.schema);
    const auto index = index_by_key(labels);
    std::vector<RetrievalItem> items;
    json excluded = json::array();
    for (const auto& r : emb.records) {
      auto it = index.find(r.key);
      if (it == index.end()) {
        excluded.push_back(r.key.str() + ": no label record");
        continue;
      }
      RetrievalItem item;
      item.key = r.key;
      item.embedding = r.matrix.values;
      for (const auto& [name, state] : it->second->labels) {
        if (state == LabelState::positive) item.labels.insert(name);
      }
      if (item.labels.empty()) {
        excluded.push_back(r.key.str() + ": no positive label");
        continue;
      }
      if (r.matrix.rows() != 1 ||
          std::all_of(item.embedding.begin(), item.embedding.end(), [](float v) { return v == 0.0f; })) {
        excluded.push_back(r.key.str() + ": degenerate embedding");
        continue;
      }
      items.push_back(std::move(item));
    }
    if (!excluded.empty()) {
      out.audit.warn(ds.name + ": " + std::to_string(excluded.size()) + " item(s) left out of the corpus");
    }
    out.audit.details["excluded_items"][ds.name] = excluded;
    out.datasets.emplace_back(ds.name, run_protocol(items, options));
  }
  return out;
}

int cmd_score(const RunConfig& config) {
  if (config.corpora.empty()) throw ConfigError("score needs at least one corpus");
  const auto corpora = load_corpora(config);
  const ScoreOutcome outcome = score_corpora(corpora, config);
  print_warnings(outcome.audit);
  ensure_dir(config.output_dir);
  write_score_matrix(outcome.matrix, config.output_dir / "scores.jsonl", MatrixFormat::json);
  write_results(config, "score", {{"scores", score_matrix_to_json(outcome.matrix)}}, outcome.audit);

  std::ostringstream md;
  md << "# Scores\n\n";
  write_score_matrix(aggregate_view(outcome.matrix), md, MatrixFormat::markdown);
  md << warnings_md(outcome.audit);
  write_text(config.output_dir / "report.md", md.str());
  std::cout << "scored " << outcome.matrix.row_count() << " rows x " << outcome.matrix.metric_count()
            << " metrics -> " << config.output_dir.string() << "\n";
  return 0;
}

int cmd_compare(const RunConfig& config) {
  if (!config.compare) throw ConfigError("compare needs system_a, system_b and metric");
  config.require_seed("compare");
  Audit audit;
  const ScoreMatrix matrix = obtain_matrix(config, audit);
  CompareOutcome outcome = compare_systems(matrix, *config.compare, config);
  for (auto& w : outcome.audit.warnings) audit.warn(std::move(w));
  audit.details["unpaired"] = outcome.audit.details["unpaired"];
  print_warnings(audit);

  json results = {{"system_a", config.compare->system_a},
                  {"system_b", config.compare->system_b},
                  {"metric", config.compare->metric},
                  {"n_pairs", outcome.n_pairs},
                  {"mean_diff", outcome.interval.mean_diff},
                  {"ci", {outcome.interval.ci_low, outcome.interval.ci_high}},
                  {"p_value", outcome.permutation.p_value},
                  {"iterations", outcome.permutation.iterations}};
  ensure_dir(config.output_dir);
  write_results(config, "compare", results, audit);

  char level[16];
  std::snprintf(level, sizeof level, "%g", config.bootstrap.level * 100.0);
  std::ostringstream md;
  md << "# Comparison\n\n"
     << "| Metric | System A | System B | Pairs | Mean diff | " << level << "% CI | p |\n"
     << "|---|---|---|---:|---:|---|---:|\n"
     << "| " << config.compare->metric << " | " << config.compare->system_a << " | "
     << config.compare->system_b << " | " << outcome.n_pairs << " | " << fixed3(outcome.interval.mean_diff)
     << " | [" << fixed3(outcome.interval.ci_low) << ", " << fixed3(outcome.interval.ci_high) << "] | ";
  char p[32];
  std::snprintf(p, sizeof p, "%.4f", outcome.permutation.p_value);
  md << p << " |\n" << warnings_md(audit);
  write_text(config.output_dir / "report.md", md.str());
  std::cout << "p = " << p << ", mean diff = " << fixed3(outcome.interval.mean_diff) << "\n";
  return 0;
}

int cmd_agree(const RunConfig& config) {
  const std::uint64_t seed = config.require_seed("agree");
  if (!config.annotations) throw ConfigError("agree needs 'annotations'");
  Audit audit;
  const ScoreMatrix matrix = obtain_matrix(config, audit);
  const std::vector<ErrorAnnotation> annotations = read_annotations(*config.annotations);
  ValidationReport check = validate_annotations(annotations);
  if (!check.ok()) throw ValidationFailed(std::move(check));

  std::vector<std::string> metrics;
  if (config.metrics.empty()) {
    metrics = matrix.metrics();
  } else {
    for (const auto& m : config.metrics) {
      if (matrix.find_metric(m)) {
        metrics.push_back(m);
      } else {
        audit.warn("metric '" + m + "' is not in the score matrix; left out of the agreement table");
      }
    }
  }

  BootstrapOptions bo = config.bootstrap;
  bo.seed = seed;
  bo.threads = config.worker_count();
  const auto table = agreement_table(matrix, metrics, annotations, config.endpoints, bo, config.agree_dataset);

  json rows = json::array();
  json dropped = json::object();
  json missing = json::object();
  for (const auto& row : table) {
    rows.push_back(agreement_row_json(row));
    const std::string id = row.metric + " " + row.endpoint.str() + " " + std::string(to_string(row.statistic));
    if (row.result && !row.result->dropped.empty()) {
      json d = json::array();
      for (const auto& b : row.result->dropped) d.push_back({{"block", b.block_id}, {"reason", b.reason}});
      dropped[id] = d;
    }
    if (row.statistic == AgreementStatistic::pooled && !row.audit.missing_scores.empty()) {
      missing[row.metric + " " + row.endpoint.str()] = row.audit.missing_scores;
    }
    if (!row.result) audit.warn(id + ": " + row.error);
  }
  audit.details["dropped_blocks"] = dropped;
  audit.details["missing_scores"] = missing;
  print_warnings(audit);
  ensure_dir(config.output_dir);
  write_results(config, "agree", {{"rows", rows}}, audit);

  char level[16];
  std::snprintf(level, sizeof level, "%g", config.bootstrap.level * 100.0);
  std::ostringstream md;
  md << "# Agreement with expert error counts\n\n"
     << "Kendall tau-b, more negative is better (higher metric, fewer errors).\n\n"
     << "| Endpoint | Statistic | Metric | tau_b | " << level << "% CI | Result | Scope |\n"
     << "|---|---|---|---:|---|---|---|\n";
  for (const auto& row : table) {
    md << "| " << row.endpoint.str() << " | " << to_string(row.statistic) << " | " << row.metric << " | ";
    if (row.result) {
      const auto& r = *row.result;
      md << fixed3(r.tau_b) << " | [" << fixed3(r.ci_low) << ", " << fixed3(r.ci_high) << "] | "
         << to_string(r.classification) << " | " << scope_string(r) << " |\n";
    } else {
      md << "undefined | - | - | " << row.error << " |\n";
    }
  }
  md << warnings_md(audit);
  write_text(config.output_dir / "report.md", md.str());
  std::cout << "agreement: " << table.size() << " rows -> " << config.output_dir.string() << "\n";
  return 0;
}

int cmd_retrieve(const RunConfig& config) {
  const RetrievalOutcome outcome = run_retrieval(config);
  Audit audit = outcome.audit;
  json results = json::array();
  json excluded = json::array();
  for (const auto& [name, result] : outcome.datasets) {
    json metrics = json::array();
    for (const auto& m : result.metrics) {
      metrics.push_back({{"name", m.name}, {"mean", m.mean}, {"std", m.std}, {"per_seed", m.per_seed}});
    }
    json runs = json::array();
    for (const auto& run : result.runs) {
      json q = json::array();
      json p = json::array();
      json rk = json::array();
      for (const auto& k : run.queries) q.push_back(k.str());
      for (const auto& k : run.pool) p.push_back(k.str());
      for (const auto& ranking : run.rankings) {
        json one = json::array();
        for (const auto& k : ranking) one.push_back(k.str());
        rk.push_back(one);
      }
      runs.push_back({{"seed", run.seed}, {"queries", q}, {"pool", p}, {"rankings", rk}});
    }
    for (const auto& e : result.excluded) {
      excluded.push_back({{"dataset", name}, {"seed", e.seed}, {"query", e.key.str()}, {"metric", e.metric},
                          {"reason", e.reason}});
    }
    results.push_back({{"dataset", name}, {"metrics", metrics}, {"runs", runs}});
  }
  audit.details["excluded_queries"] = excluded;
  print_warnings(audit);
  ensure_dir(config.output_dir);
  write_results(config, "retrieve", {{"datasets", results}}, audit);

  std::ostringstream md;
  md << "# Retrieval\n\nMean ± standard deviation over seeds, ×100.\n\n";
  if (!outcome.datasets.empty()) {
    const auto& first = outcome.datasets.front().second.metrics;
    md << "| Dataset |";
    for (const auto& m : first) md << " " << m.name << " |";
    md << "\n|---|";
    for (std::size_t i = 0; i < first.size(); ++i) md << "---:|";
    md << "\n";
    for (const auto& [name, result] : outcome.datasets) {
      md << "| " << name << " |";
      for (const auto& m : result.metrics) {
        if (m.per_seed.empty()) {
          md << " - |";
        } else {
          md << " " << format_percent(m.mean) << " ± " << format_percent(m.std) << " |";
        }
      }
      md << "\n";
    }
  }
  md << warnings_md(audit);
  write_text(config.output_dir / "report.md", md.str());
  std::cout << "retrieval: " << outcome.datasets.size() << " dataset(s) -> " << config.output_dir.string() << "\n";
  return 0;
}

namespace {

template <typename Fn>
void guarded(ValidationReport& report, const std::string& source, Fn fn) {
  try {
    fn();
  } catch (const ParseError& e) {
    report.add("parse error", e.what());
  } catch (const SchemaError& e) {
    report.add("schema mismatch", source + ": " + e.what());
  } catch (const DuplicateError& e) {
    report.add("duplicate key", source + ": " + e.what());
  } catch (const Error& e) {
    report.add("unreadable", source + ": " + e.what());
  }
}

}  // namespace

ValidationReport validate_inputs(const RunConfig* config, std::span<const StandaloneSidecar> sidecars) {
  ValidationReport report;
  if (config) {
    std::vector<Corpus> corpora;
    std::vector<ErrorAnnotation> annotations;
    bool parsed = true;
    guarded(report, "corpora", [&] { corpora = load_corpora(*config); });
    if (!report.ok()) parsed = false;
    if (config->annotations) {
      const std::size_t before = report.issues.size();
      guarded(report, config->annotations->string(), [&] { annotations = read_annotations(*config->annotations); });
      if (report.issues.size() != before) parsed = false;
    }
    if (parsed) {
      if (config->corpora.empty()) {
        report.merge(validate_annotations(annotations));
      } else {
        report.merge(validate_corpora(corpora, annotations));
      }
    }
    if (config->scores) {
      guarded(report, config->scores->string(), [&] { read_scores(*config->scores); });
    }
  }
  static const std::set<std::string> kinds = {
      "embeddings",  "token_embeddings", "radeval_token_embeddings", "report_embeddings",
      "chexpert_labels", "chexpert5_labels", "srr_labels", "custom_labels",
      "graphs", "annotations", "judge_scores", "scores"};
  for (const auto& s : sidecars) {
    if (!kinds.count(s.kind)) throw ConfigError("unknown sidecar kind '" + s.kind + "'");
  }
  for (const auto& s : sidecars) {
    const std::string src = s.path.string();
    guarded(report, src, [&] {
      if (s.kind == "embeddings" || s.kind.ends_with("_embeddings")) {
        const EmbeddingFile f = read_embeddings(s.path);
        const bool want_report = s.kind == "report_embeddings";
        const bool want_token = s.kind == "token_embeddings" || s.kind == "radeval_token_embeddings";
        if (!f.records.empty() && ((want_report && f.kind != EmbeddingKind::report) ||
                                   (want_token && f.kind != EmbeddingKind::token))) {
          report.add("kind mismatch", src + ": file holds " + std::string(to_string(f.kind)) + " embeddings");
        }
        report.merge(validate_embeddings(f));
      } else if (s.kind == "chexpert_labels") {
        report.merge(validate_labels(read_labels(s.path, LabelSchema::chexpert14)));
      } else if (s.kind == "chexpert5_labels") {
        report.merge(validate_labels(read_labels(s.path, LabelSchema::chexpert5)));
      } else if (s.kind == "srr_labels") {
        report.merge(validate_labels(read_labels(s.path, LabelSchema::srr55)));
      } else if (s.kind == "custom_labels") {
        report.merge(validate_labels(read_labels(s.path, LabelSchema::custom)));
      } else if (s.kind == "graphs") {
        report.merge(validate_graphs(read_graphs(s.path)));
      } else if (s.kind == "annotations") {
        report.merge(validate_annotations(read_annotations(s.path)));
      } else if (s.kind == "judge_scores") {
        for (const auto& j : read_judge_scores(s.path)) {
          for (const auto& [name, v] : j.scores) {
            if (!std::isfinite(v)) report.add("non-finite score", j.key.str() + " " + name);
          }
        }
      } else {
        read_scores(s.path);
      }
    });
  }
  return report;
}

int cmd_validate(const RunConfig* config, std::span<const StandaloneSidecar> sidecars) {
  if (!config && sidecars.empty()) throw ConfigError("validate needs a config or at least one --sidecar");
  const ValidationReport report = validate_inputs(config, sidecars);
  for (const auto& issue : report.issues) std::cout << issue.code << ": " << issue.detail << "\n";
  if (report.ok()) {
    std::cout << "ok\n";
    return 0;
  }
  std::cout << report.issues.size() << " issue(s)\n";
  return 1;
}

int exit_code(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return 2;
  return 1;
}

}  // namespace radeval
