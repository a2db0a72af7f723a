// radeval command-line tool: score, compare, agree, retrieve, validate.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "radeval/error.hpp"
#include "radeval/runner.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> threads;
  std::optional<std::string> output_dir;
  std::optional<std::string> scores;
  std::optional<std::string> annotations;
  std::vector<std::string> metrics;
  std::optional<std::size_t> resamples;
  std::optional<double> level;
  std::optional<std::size_t> iterations;
  std::vector<std::string> endpoints;
  std::optional<std::string> system_a;
  std::optional<std::string> system_b;
  std::optional<std::string> metric;
  std::optional<std::size_t> n_queries;
  std::optional<std::size_t> n_seeds;
  std::vector<std::string> sidecars;
};

std::string absolute(const std::string& p) { return fs::absolute(p).lexically_normal().string(); }

radeval::RunConfig build_config(const Common& c) {
  json doc = json::object();
  fs::path base = fs::current_path();
  if (!c.config.empty()) {
    std::ifstream in(c.config);
    if (!in) throw radeval::ConfigError("cannot read config " + c.config);
    try {
      doc = json::parse(in);
    } catch (const json::exception& e) {
      throw radeval::ConfigError("config " + c.config + " is not valid JSON: " + e.what());
    }
    if (!doc.is_object()) throw radeval::ConfigError("config must be a JSON object");
    base = fs::absolute(c.config).parent_path();
  }
  if (c.seed) doc["seed"] = *c.seed;
  if (c.threads) doc["threads"] = *c.threads;
  if (c.output_dir) doc["output_dir"] = absolute(*c.output_dir);
  if (c.scores) doc["scores"] = absolute(*c.scores);
  if (c.annotations) doc["annotations"] = absolute(*c.annotations);
  if (!c.metrics.empty()) doc["metrics"] = c.metrics;
  if (c.resamples) doc["bootstrap"]["resamples"] = *c.resamples;
  if (c.level) doc["bootstrap"]["level"] = *c.level;
  if (c.iterations) doc["permutation"]["iterations"] = *c.iterations;
  if (!c.endpoints.empty()) doc["endpoints"] = c.endpoints;
  if (c.system_a) doc["compare"]["system_a"] = *c.system_a;
  if (c.system_b) doc["compare"]["system_b"] = *c.system_b;
  if (c.metric) doc["compare"]["metric"] = *c.metric;
  if (c.n_queries || c.n_seeds) {
    if (!doc.contains("retrieval")) throw radeval::ConfigError("retrieval overrides need a retrieval section");
    if (c.n_queries) doc["retrieval"]["n_queries"] = *c.n_queries;
    if (c.n_seeds) doc["retrieval"]["n_seeds"] = *c.n_seeds;
  }
  return radeval::config_from_json(doc, base);
}

void add_common(CLI::App* cmd, Common& c, bool stochastic) {
  cmd->add_option("-c,--config", c.config, "JSON run configuration");
  cmd->add_option("--threads", c.threads, "worker threads (0 = all cores; capped by RADEVAL_THREADS)");
  cmd->add_option("-o,--output-dir", c.output_dir, "directory for results.json and report.md");
  cmd->add_option("--metrics", c.metrics, "metric names")->delimiter(',');
  if (stochastic) cmd->add_option("--seed", c.seed, "random seed");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"radeval: evaluation engine for radiology report generation"};
  app.require_subcommand(1);

  Common c;
  auto* score = app.add_subcommand("score", "score candidates against references");
  add_common(score, c, false);

  auto* compare = app.add_subcommand("compare", "paired significance test between two systems");
  add_common(compare, c, true);
  compare->add_option("--scores", c.scores, "precomputed score matrix (JSONL)");
  compare->add_option("--system-a", c.system_a);
  compare->add_option("--system-b", c.system_b);
  compare->add_option("--metric", c.metric);
  compare->add_option("--iterations", c.iterations, "permutation iterations");
  compare->add_option("--resamples", c.resamples, "bootstrap resamples");
  compare->add_option("--level", c.level, "confidence level");

  auto* agree = app.add_subcommand("agree", "Kendall tau-b agreement with expert error counts");
  add_common(agree, c, true);
  agree->add_option("--scores", c.scores, "precomputed score matrix (JSONL)");
  agree->add_option("--annotations", c.annotations, "expert error annotations (JSONL)");
  agree->add_option("--endpoint", c.endpoints, "e.g. significant@all, omission@findings");
  agree->add_option("--resamples", c.resamples, "bootstrap resamples");
  agree->add_option("--level", c.level, "confidence level");

  auto* retrieve = app.add_subcommand("retrieve", "report-to-report retrieval protocol");
  add_common(retrieve, c, true);
  retrieve->add_option("--n-queries", c.n_queries);
  retrieve->add_option("--n-seeds", c.n_seeds);

  auto* validate = app.add_subcommand("validate", "check corpora and sidecar files");
  validate->add_option("-c,--config", c.config, "JSON run configuration");
  validate->add_option("--sidecar", c.sidecars, "standalone file as kind=path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (validate->parsed()) {
      std::vector<radeval::StandaloneSidecar> sidecars;
      for (const auto& s : c.sidecars) {
        const auto eq = s.find('=');
        if (eq == std::string::npos) throw radeval::ConfigError("--sidecar expects kind=path, got '" + s + "'");
        sidecars.push_back({s.substr(0, eq), s.substr(eq + 1)});
      }
      std::optional<radeval::RunConfig> config;
      if (!c.config.empty()) config = build_config(c);
      return radeval::cmd_validate(config ? &*config : nullptr, sidecars);
    }
    const radeval::RunConfig config = build_config(c);
    if (score->parsed()) return radeval::cmd_score(config);
    if (compare->parsed()) return radeval::cmd_compare(config);
    if (agree->parsed()) return radeval::cmd_agree(config);
    return radeval::cmd_retrieve(config);
  } catch (const radeval::ValidationFailed& e) {
    for (const auto& issue : e.report().issues) std::cerr << issue.code << ": " << issue.detail << "\n";
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return radeval::exit_code(e);
  }
}
