#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "radeval/runner.hpp"

using namespace radeval;
namespace fs = std::filesystem;

namespace {

const fs::path kToy = fs::path(RADEVAL_SOURCE_DIR) / "tests" / "fixtures" / "toy";

nlohmann::json toy_json() {
  std::ifstream in(kToy / "config.json");
  return nlohmann::json::parse(in);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("radeval_test_" + name);
  fs::remove_all(dir);
  return dir;
}

using Command = int (*)(const RunConfig&);

std::map<std::string, std::string> run_into(Command cmd, RunConfig config, const fs::path& dir) {
  config.output_dir = dir;
  EXPECT_EQ(cmd(config), 0);
  std::map<std::string, std::string> files;
  for (const auto& entry : fs::directory_iterator(dir)) files[entry.path().filename().string()] = slurp(entry.path());
  return files;
}

}  // namespace

TEST(Config, LoadsToyConfig) {
  const RunConfig c = load_config(kToy / "config.json");
  EXPECT_EQ(*c.seed, 20240611u);
  EXPECT_EQ(c.corpora.size(), 2u);
  EXPECT_EQ(c.endpoints.size(), 3u);
  EXPECT_EQ(c.bootstrap.resamples, 200u);
  ASSERT_TRUE(c.retrieval.has_value());
  EXPECT_TRUE(c.corpora[0].studies.is_absolute());
}

TEST(Config, Errors) {
  auto unknown = toy_json();
  unknown["sed"] = 1;
  EXPECT_THROW(config_from_json(unknown, kToy), ConfigError);

  auto bad_option = toy_json();
  bad_option["options"]["bleu"]["smooth"] = "none";
  EXPECT_THROW(config_from_json(bad_option, kToy), ConfigError);

  auto missing_file = toy_json();
  missing_file["corpora"][0]["studies"] = "does_not_exist.jsonl";
  EXPECT_THROW(config_from_json(missing_file, kToy), ConfigError);

  auto bad_endpoint = toy_json();
  bad_endpoint["endpoints"] = {"severity@all"};
  EXPECT_THROW(config_from_json(bad_endpoint, kToy), ConfigError);

  auto bad_seed = toy_json();
  bad_seed["seed"] = -4;
  EXPECT_THROW(config_from_json(bad_seed, kToy), ConfigError);

  auto no_seed = toy_json();
  no_seed.erase("seed");
  EXPECT_THROW(config_from_json(no_seed, kToy).require_seed("agree"), ConfigError);
}

TEST(Config, EchoLeavesOutParallelism) {
  RunConfig c = load_config(kToy / "config.json");
  c.threads = 3;
  c.output_dir = "/tmp/a";
  const auto a = config_to_json(c);
  c.threads = 16;
  c.output_dir = "/tmp/b";
  EXPECT_EQ(a, config_to_json(c));
  EXPECT_FALSE(a.contains("threads"));
}

TEST(Score, SelectedMetricsOnly) {
  RunConfig c = load_config(kToy / "config.json");
  c.metrics = {"bleu", "rougeL"};
  const auto corpora = load_corpora(c);
  const auto out = score_corpora(corpora, c);
  EXPECT_EQ(out.matrix.metrics(), (std::vector<std::string>{"bleu", "rougeL"}));
  EXPECT_TRUE(out.audit.warnings.empty());
  for (std::size_t r = 0; r < out.matrix.row_count(); ++r) {
    EXPECT_TRUE(out.matrix.get(r, 0).has_value());
    EXPECT_TRUE(out.matrix.get(r, 1).has_value());
  }
}

TEST(Score, MissingSidecarSkipsMetricWithWarning) {
  RunConfig c = load_config(kToy / "config.json");
  c.metrics = {"bleu", "bertscore"};
  for (auto& corpus : c.corpora) corpus.sidecars.erase("token_embeddings");
  const auto corpora = load_corpora(c);
  const auto out = score_corpora(corpora, c);
  EXPECT_EQ(out.matrix.metrics(), (std::vector<std::string>{"bleu"}));
  ASSERT_FALSE(out.audit.warnings.empty());
  EXPECT_NE(out.audit.warnings.front().find("bertscore"), std::string::npos);
}

TEST(Score, AllMetricsAndAggregates) {
  const RunConfig c = load_config(kToy / "config.json");
  const auto corpora = load_corpora(c);
  const auto out = score_corpora(corpora, c);
  EXPECT_EQ(out.matrix.metric_count(), c.metrics.size());
  const auto col = out.matrix.find_metric("radcliq");
  ASSERT_TRUE(col.has_value());
  EXPECT_EQ(out.matrix.direction(*col), Direction::lower_better);
  std::size_t aggregates = 0;
  for (const auto& k : out.matrix.rows()) aggregates += k.study_id == kAggregateStudy ? 1 : 0;
  EXPECT_EQ(aggregates, 6u);
}

TEST(Score, InvalidCorpusFailsValidation) {
  RunConfig c = load_config(kToy / "config.json");
  auto corpora = load_corpora(c);
  corpora[0].candidates.push_back({"no_such_study", "sysA", "text"});
  try {
    score_corpora(corpora, c);
    FAIL();
  } catch (const ValidationFailed& e) {
    EXPECT_EQ(e.report().count("dangling study_id"), 1u);
    EXPECT_EQ(exit_code(e), 1);
  }
}

TEST(Compare, IdenticalSystems) {
  RunConfig c = load_config(kToy / "config.json");
  c.metrics = {"rougeL"};
  const auto corpora = load_corpora(c);
  const auto out = score_corpora(corpora, c);
  const auto same = compare_systems(out.matrix, {"sysA", "sysA", "rougeL"}, c);
  EXPECT_EQ(same.permutation.p_value, 1.0);
  EXPECT_EQ(same.interval.ci_low, 0.0);
  EXPECT_EQ(same.interval.ci_high, 0.0);
  EXPECT_EQ(same.n_pairs, 6u);
}

TEST(Commands, ByteIdenticalAcrossThreadsAndRuns) {
  const RunConfig base = load_config(kToy / "config.json");
  const std::vector<std::pair<std::string, Command>> commands = {
      {"score", cmd_score}, {"compare", cmd_compare}, {"agree", cmd_agree}, {"retrieve", cmd_retrieve}};
  for (const auto& [name, cmd] : commands) {
    RunConfig c = base;
    c.threads = 1;
    const auto reference = run_into(cmd, c, scratch(name + "_1"));
    ASSERT_TRUE(reference.count("results.json")) << name;
    ASSERT_TRUE(reference.count("report.md")) << name;
    for (std::size_t t : {4u, 16u, 1u}) {
      c.threads = t;
      const auto again = run_into(cmd, c, scratch(name + "_" + std::to_string(t) + "b"));
      EXPECT_EQ(again, reference) << name << " threads " << t;
    }
  }
}

TEST(Commands, ResultsShape) {
  RunConfig c = load_config(kToy / "config.json");
  const auto files = run_into(cmd_agree, c, scratch("shape"));
  const auto j = nlohmann::json::parse(files.at("results.json"));
  EXPECT_EQ(j.at("command"), "agree");
  EXPECT_TRUE(j.contains("config"));
  EXPECT_TRUE(j.contains("results"));
  EXPECT_TRUE(j.contains("audit"));
  EXPECT_NE(files.at("report.md").find("tau_b"), std::string::npos);
}

TEST(Validate, ConfigAndSidecars) {
  const RunConfig c = load_config(kToy / "config.json");
  EXPECT_TRUE(validate_inputs(&c, {}).ok());

  const fs::path dir = scratch("validate");
  fs::create_directories(dir);
  {
    std::ofstream broken(dir / "broken.jsonl");
    broken << "{\"format_version\": 1, \"kind\": \"token\", \"dim\": 4, \"record_count\": 2}\n{oops\n";
  }
  const std::vector<StandaloneSidecar> bad = {{"embeddings", dir / "broken.jsonl"}};
  const auto report = validate_inputs(nullptr, bad);
  EXPECT_FALSE(report.ok());
  EXPECT_EQ(report.count("parse error"), 1u);

  const std::vector<StandaloneSidecar> unknown = {{"pictures", dir / "broken.jsonl"}};
  EXPECT_THROW(validate_inputs(nullptr, unknown), ConfigError);

  const std::vector<StandaloneSidecar> good = {
      {"report_embeddings", kToy / "findings_report_embeddings.jsonl"},
      {"token_embeddings", kToy / "findings_token_embeddings.jsonl"},
      {"graphs", kToy / "findings_graphs.jsonl"},
      {"annotations", kToy / "annotations.jsonl"}};
  EXPECT_TRUE(validate_inputs(nullptr, good).ok());

  const std::vector<StandaloneSidecar> wrong_kind = {{"report_embeddings", kToy / "findings_token_embeddings.jsonl"}};
  EXPECT_EQ(validate_inputs(nullptr, wrong_kind).count("kind mismatch"), 1u);
}

TEST(ExitCodes, Mapping) {
  EXPECT_EQ(exit_code(ConfigError("x")), 2);
  EXPECT_EQ(exit_code(Error("x")), 1);
  EXPECT_EQ(exit_code(std::invalid_argument("x")), 1);
  EXPECT_EQ(exit_code(ValidationFailed(ValidationReport{})), 1);
}
