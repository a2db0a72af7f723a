#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "radeval/error.hpp"
#include "radeval/io.hpp"
#include "radeval/lexical.hpp"
#include "radeval/retrieval.hpp"
#include "radeval/runner.hpp"
#include "radeval/semantic.hpp"
#include "radeval/stats.hpp"

namespace py = pybind11;
using namespace radeval;

namespace {

EmbeddingMatrix to_matrix(const std::vector<std::vector<float>>& rows) {
  EmbeddingMatrix m;
  m.dim = rows.empty() ? 0 : rows.front().size();
  for (const auto& r : rows) {
    if (r.size() != m.dim) throw std::invalid_argument("ragged embedding rows");
    m.values.insert(m.values.end(), r.begin(), r.end());
  }
  return m;
}

PairedSample make_sample(std::vector<double> x, std::vector<double> y, std::vector<std::string> blocks,
                         const std::vector<std::string>& strata) {
  PairedSample s{std::move(x), std::move(y), std::move(blocks), {}};
  for (const auto& st : strata) s.stratum.push_back(parse_section(st));
  return s;
}

py::dict agreement_dict(const AgreementResult& r) {
  py::dict d;
  d["statistic"] = std::string(to_string(r.statistic));
  d["tau_b"] = r.tau_b;
  d["ci_low"] = r.ci_low;
  d["ci_high"] = r.ci_high;
  d["n"] = r.n;
  d["n_pairs"] = r.n_pairs;
  d["n_blocks"] = r.n_blocks ? py::cast(*r.n_blocks) : py::none();
  d["classification"] = std::string(to_string(r.classification));
  d["undefined_resamples"] = r.undefined_resamples;
  py::list dropped;
  for (const auto& b : r.dropped) dropped.append(py::make_tuple(b.block_id, b.reason));
  d["dropped"] = dropped;
  return d;
}

int run_command(const std::string& command, const std::filesystem::path& config_path,
                const std::optional<std::filesystem::path>& output_dir) {
  RunConfig config = load_config(config_path);
  if (output_dir) config.output_dir = *output_dir;
  if (command == "score") return cmd_score(config);
  if (command == "compare") return cmd_compare(config);
  if (command == "agree") return cmd_agree(config);
  if (command == "retrieve") return cmd_retrieve(config);
  throw ConfigError("unknown command '" + command + "'");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Radiology report generation evaluation engine";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ParseError>(m, "ParseError", base.ptr());
  py::register_exception<SchemaError>(m, "SchemaError", base.ptr());
  py::register_exception<DuplicateError>(m, "DuplicateError", base.ptr());
  py::register_exception<UndefinedError>(m, "UndefinedError", base.ptr());
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());

  m.def("tokenize", &tokenize, py::arg("text"));
  m.def(
      "bleu",
      [](const std::vector<TokenSequence>& c, const std::vector<TokenSequence>& r, int max_n, bool smoothing) {
        BleuOptions o;
        o.max_n = max_n;
        o.smoothing = smoothing ? BleuSmoothing::add_epsilon : BleuSmoothing::none;
        return bleu(c, r, o);
      },
      py::arg("candidates"), py::arg("references"), py::arg("max_n") = 4, py::arg("smoothing") = false);
  m.def(
      "rouge_l",
      [](const TokenSequence& c, const TokenSequence& r) {
        const auto s = rouge_l(c, r);
        return py::make_tuple(s.precision, s.recall, s.f1);
      },
      py::arg("candidate"), py::arg("reference"));
  m.def(
      "bertscore",
      [](const std::vector<std::vector<float>>& c, const std::vector<std::vector<float>>& r,
         std::optional<double> baseline, bool clamp_negative) {
        SimilarityConfig cfg;
        cfg.rescale_baseline = baseline;
        cfg.clamp_negative = clamp_negative;
        const auto s = bertscore(to_matrix(c), to_matrix(r), cfg);
        return py::make_tuple(s.precision, s.recall, s.f1);
      },
      py::arg("candidate"), py::arg("reference"), py::arg("rescale_baseline") = py::none(),
      py::arg("clamp_negative") = false);
  m.def("report_cosine", [](const std::vector<float>& a, const std::vector<float>& b) { return report_cosine(a, b); });

  m.def(
      "kendall_tau_b",
      [](const std::vector<double>& x, const std::vector<double>& y) {
        const auto r = kendall_tau_b(x, y);
        return py::make_tuple(r.tau_b, r.concordant, r.discordant, r.n_pairs);
      },
      py::arg("x"), py::arg("y"));
  m.def(
      "blocked_tau",
      [](std::vector<double> x, std::vector<double> y, std::vector<std::string> blocks) {
        const auto r = blocked_tau(make_sample(std::move(x), std::move(y), std::move(blocks), {}));
        return py::make_tuple(r.tau_b, r.n_blocks, r.n_pairs);
      },
      py::arg("x"), py::arg("y"), py::arg("blocks"));
  m.def(
      "block_bootstrap_ci",
      [](std::vector<double> x, std::vector<double> y, std::vector<std::string> blocks,
         const std::vector<std::string>& strata, const std::string& statistic, std::size_t resamples,
         double level, std::uint64_t seed) {
        BootstrapOptions o{resamples, level, seed, 1};
        const auto stat = statistic == "pooled" ? AgreementStatistic::pooled : AgreementStatistic::blocked;
        return agreement_dict(
            block_bootstrap_ci(make_sample(std::move(x), std::move(y), std::move(blocks), strata), stat, o));
      },
      py::arg("x"), py::arg("y"), py::arg("blocks"), py::arg("strata") = std::vector<std::string>{},
      py::arg("statistic") = "blocked", py::arg("resamples") = 1000, py::arg("level") = 0.95,
      py::arg("seed") = 0);
  m.def("classify", [](double lo, double hi) { return std::string(to_string(classify(lo, hi))); });
  m.def(
      "permutation_test",
      [](const std::vector<double>& a, const std::vector<double>& b, std::size_t iterations, std::uint64_t seed) {
        const auto r = permutation_test(a, b, {iterations, seed, 1});
        return py::make_tuple(r.p_value, r.observed);
      },
      py::arg("a"), py::arg("b"), py::arg("iterations") = 10000, py::arg("seed") = 0);
  m.def(
      "bootstrap_diff_ci",
      [](const std::vector<double>& a, const std::vector<double>& b, std::size_t resamples, double level,
         std::uint64_t seed) {
        const auto r = bootstrap_diff_ci(a, b, {resamples, level, seed, 1});
        return py::make_tuple(r.mean_diff, r.ci_low, r.ci_high);
      },
      py::arg("a"), py::arg("b"), py::arg("resamples") = 1000, py::arg("level") = 0.95, py::arg("seed") = 0);

  m.def("precision_at_k", [](const std::vector<int>& rel, std::size_t k) { return precision_at_k(rel, k); });
  m.def("average_precision", [](const std::vector<int>& rel) { return average_precision(rel); });
  m.def("ndcg_at_k", [](const std::vector<double>& gains, std::size_t k) { return ndcg_at_k(gains, k); });

  m.def("format_percent", &format_percent);
  m.def(
      "validate",
      [](std::optional<std::filesystem::path> config,
         const std::vector<std::pair<std::string, std::filesystem::path>>& sidecars) {
        std::optional<RunConfig> cfg;
        if (config) cfg = load_config(*config);
        std::vector<StandaloneSidecar> s;
        for (const auto& [kind, path] : sidecars) s.push_back({kind, path});
        const auto report = validate_inputs(cfg ? &*cfg : nullptr, s);
        py::list issues;
        for (const auto& i : report.issues) issues.append(py::make_tuple(i.code, i.detail));
        return issues;
      },
      py::arg("config") = py::none(), py::arg("sidecars") = std::vector<std::pair<std::string, std::filesystem::path>>{});
  m.def("run", &run_command, py::arg("command"), py::arg("config"), py::arg("output_dir") = py::none(),
        "Runs score, compare, agree or retrieve from a config file; returns the exit code.");
}
