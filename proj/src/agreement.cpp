#include "radeval/agreement.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <tuple>

#include "radeval/error.hpp"

namespace radeval {

std::int64_t Endpoint::value(const ErrorAnnotation& a) const {
  switch (target) {
    case Target::total_significant:
      return a.total(Significance::significant);
    case Target::total_insignificant:
      return a.total(Significance::insignificant);
    case Target::category:
      return a.count(category, Significance::significant);
  }
  return 0;
}

std::string Endpoint::str() const {
  std::string s;
  switch (target) {
    case Target::total_significant:
      s = "significant";
      break;
    case Target::total_insignificant:
      s = "insignificant";
      break;
    case Target::category:
      s = std::string(to_string(category));
      break;
  }
  s += "@";
  s += section ? std::string(to_string(*section)) : "all";
  return s;
}

Endpoint parse_endpoint(std::string_view text) {
  Endpoint e;
  std::string_view head = text;
  if (const auto at = text.find('@'); at != std::string_view::npos) {
    head = text.substr(0, at);
    const std::string_view scope = text.substr(at + 1);
    if (scope != "all") {
      try {
        e.section = parse_section(scope);
      } catch (const Error&) {
        throw Error("unknown endpoint section '" + std::string(scope) + "'");
      }
    }
  }
  if (head == "significant") {
    e.target = Endpoint::Target::total_significant;
  } else if (head == "insignificant") {
    e.target = Endpoint::Target::total_insignificant;
  } else {
    try {
      e.category = parse_error_category(head);
    } catch (const Error&) {
      throw Error("unknown endpoint '" + std::string(text) + "'");
    }
    e.target = Endpoint::Target::category;
  }
  return e;
}

PairedSample make_paired_sample(const ScoreMatrix& matrix, std::string_view metric,
                                std::span<const ErrorAnnotation> annotations,
                                const Endpoint& endpoint, SampleAudit* audit,
                                const std::optional<std::string>& dataset) {
  const auto col = matrix.find_metric(metric);
  if (!col) throw Error("metric '" + std::string(metric) + "' is not in the score matrix");
  const bool flip = matrix.direction(*col) == Direction::lower_better;

  using Key = std::tuple<Section, std::string, std::string>;
  std::map<Key, std::vector<std::size_t>> rows;
  for (std::size_t r = 0; r < matrix.row_count(); ++r) {
    const RowKey& k = matrix.rows()[r];
    if (k.study_id == kAggregateStudy) continue;
    if (dataset && k.dataset != *dataset) continue;
    rows[{k.section, k.study_id, k.system_id}].push_back(r);
  }

  PairedSample s;
  SampleAudit local;
  for (const ErrorAnnotation& a : annotations) {
    if (endpoint.section && a.section != *endpoint.section) continue;
    ++local.annotations;
    const std::string sec(to_string(a.section));
    double x = std::numeric_limits<double>::quiet_NaN();
    auto it = rows.find({a.section, a.study_id, a.system_id});
    if (it != rows.end()) {
      if (it->second.size() > 1) {
        throw Error("candidate " + a.study_id + "/" + a.system_id + "/" + sec +
                    " appears in several datasets; select one");
      }
      if (auto v = matrix.get(it->second.front(), *col)) x = flip ? -*v : *v;
    }
    if (std::isnan(x)) local.missing_scores.push_back(a.study_id + "/" + a.system_id + "/" + sec);
    s.x.push_back(x);
    s.y.push_back(static_cast<double>(endpoint.value(a)));
    s.block_id.push_back(a.study_id + "/" + sec);
    s.stratum.push_back(a.section);
  }
  if (audit) *audit = std::move(local);
  return s;
}

AgreementResult agree(const ScoreMatrix& matrix, std::string_view metric,
                      std::span<const ErrorAnnotation> annotations, const Endpoint& endpoint,
                      AgreementStatistic statistic, const BootstrapOptions& options) {
  const PairedSample s = make_paired_sample(matrix, metric, annotations, endpoint);
  return block_bootstrap_ci(s, statistic, options);
}

std::vector<AgreementRow> agreement_table(const ScoreMatrix& matrix,
                                          std::span<const std::string> metrics,
                                          std::span<const ErrorAnnotation> annotations,
                                          std::span<const Endpoint> endpoints,
                                          const BootstrapOptions& options,
                                          const std::optional<std::string>& dataset) {
  std::vector<AgreementRow> table;
  for (const Endpoint& endpoint : endpoints) {
    for (AgreementStatistic statistic : {AgreementStatistic::pooled, AgreementStatistic::blocked}) {
      std::vector<AgreementRow> group;
      for (const std::string& metric : metrics) {
        AgreementRow row;
        row.metric = metric;
        row.endpoint = endpoint;
        row.statistic = statistic;
        const PairedSample s =
            make_paired_sample(matrix, metric, annotations, endpoint, &row.audit, dataset);
        try {
          row.result = block_bootstrap_ci(s, statistic, options);
        } catch (const UndefinedError& e) {
          row.error = e.what();
        }
        group.push_back(std::move(row));
      }
      std::stable_sort(group.begin(), group.end(), [](const AgreementRow& a, const AgreementRow& b) {
        if (a.result.has_value() != b.result.has_value()) return a.result.has_value();
        return a.result && a.result->tau_b < b.result->tau_b;
      });
      std::move(group.begin(), group.end(), std::back_inserter(table));
    }
  }
  return table;
}

namespace {

std::string grouped(std::int64_t v) {
  std::string digits = std::to_string(v < 0 ? -v : v);
  for (int i = static_cast<int>(digits.size()) - 3; i > 0; i -= 3) digits.insert(static_cast<std::size_t>(i), ",");
  return v < 0 ? "-" + digits : digits;
}

}  // namespace

std::string scope_string(const AgreementResult& result) {
  if (result.statistic == AgreementStatistic::blocked) {
    return "(blocks " + grouped(result.n_blocks.value_or(0)) + ", pairs " + grouped(result.n_pairs) + ")";
  }
  return "(pairs " + grouped(result.n_pairs) + ", n " + grouped(result.n) + ")";
}

}  // namespace radeval
