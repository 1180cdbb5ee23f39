#include "langsim/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <tuple>

#include "langsim/error.hpp"
#include "langsim/text.hpp"

namespace langsim::analysis {

namespace {

std::string fmt(std::optional<double> v, int decimals) {
  return v ? text::format_fixed(*v, decimals) : std::string("NA");
}

}  // namespace

// ---------------------------------------------------------------------------
// Within / across
// ---------------------------------------------------------------------------

std::string_view to_string(SummaryLevel level) {
  return level == SummaryLevel::Dataset ? "dataset" : "language";
}

WithinAcross within_across_summary(const TransferResultMatrix& results, SummaryLevel level) {
  if (results.scores.empty()) throw ContractViolation("within_across_summary: empty matrix");
  WithinAcross out;
  out.experiment = results.label();
  out.level = level;

  std::map<std::pair<std::string, std::string>, double> cells;
  if (level == SummaryLevel::Dataset) {
    cells = results.scores;
  } else {
    std::map<std::pair<std::string, std::string>, std::pair<double, std::size_t>> acc;
    for (const auto& [key, v] : results.scores) {
      auto& slot = acc[{base_language(key.first), base_language(key.second)}];
      slot.first += v;
      ++slot.second;
    }
    for (const auto& [key, s] : acc) cells[key] = s.first / static_cast<double>(s.second);
  }

  std::vector<double> within;
  std::vector<double> across;
  for (const auto& [key, v] : cells) (key.first == key.second ? within : across).push_back(v);
  out.n_within = within.size();
  out.n_across = across.size();
  if (!within.empty()) out.within = stats::mean_std(within);
  if (!across.empty()) out.across = stats::mean_std(across);
  return out;
}

std::string emit_summary(const std::vector<WithinAcross>& rows) {
  std::string out = "experiment\tlevel\tgroup\tmean\tstd\tn\n";
  for (const auto& r : rows) {
    const auto line = [&](std::string_view group, const std::optional<stats::MeanStd>& s,
                          std::size_t n) {
      out += r.experiment + '\t' + std::string(to_string(r.level)) + '\t' + std::string(group) +
             '\t' + fmt(s ? std::optional(s->mean) : std::nullopt, 2) + '\t' +
             fmt(s ? std::optional(s->std) : std::nullopt, 2) + '\t' + std::to_string(n) + '\n';
    };
    line("within", r.within, r.n_within);
    line("across", r.across, r.n_across);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Selectors
// ---------------------------------------------------------------------------

Selector make_selector(const SimilarityTable& table) {
  return {std::string(to_string(table.measure())),
          [&table](const std::string& s, const std::string& t) { return table.value_for_tags(s, t); }};
}

Selector make_selector(const SourceAttribute& attribute) {
  return {attribute.measure, [&attribute](const std::string& s, const std::string&) {
            return attribute.value_for_tag(s);
          }};
}

Selector make_selector(const TransferResultMatrix& results) {
  return {results.label(),
          [&results](const std::string& s, const std::string& t) { return results.score(s, t); }};
}

// ---------------------------------------------------------------------------
// Correlations
// ---------------------------------------------------------------------------

CorrelationTable per_target_correlations(const TransferResultMatrix& results,
                                         const std::vector<Selector>& selectors, double alpha,
                                         std::size_t n_min) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ContractViolation("alpha must lie in (0,1]");
  if (n_min < 3) throw ContractViolation("n_min must be at least 3");
  CorrelationTable table;
  table.experiment = results.label();
  table.alpha = alpha;
  table.n_min = n_min;
  const auto sources = results.train_languages();
  for (const auto& target : results.test_languages()) {
    for (const auto& sel : selectors) {
      CorrelationRow row;
      row.test_lang = target;
      row.measure = sel.name;
      std::vector<double> x;
      std::vector<double> y;
      for (const auto& source : sources) {
        if (source == target) continue;
        const auto score = results.score(source, target);
        const auto sim = sel.value(source, target);
        if (!score || !sim) continue;
        x.push_back(*sim);
        y.push_back(*score);
      }
      row.n = x.size();
      if (row.n >= n_min) {
        try {
          const auto c = stats::pearson(x, y);
          row.r = c.r;
          row.p = c.p;
          row.zeroed = c.p >= alpha;
          row.status = row.zeroed ? CorrelationStatus::NotSignificant : CorrelationStatus::Value;
        } catch (const UndefinedStatistic&) {
          row.status = CorrelationStatus::MissingData;
        }
      }
      table.rows.push_back(std::move(row));
    }
  }
  std::sort(table.rows.begin(), table.rows.end(), [](const auto& a, const auto& b) {
    return std::tie(a.test_lang, a.measure) < std::tie(b.test_lang, b.measure);
  });
  return table;
}

std::vector<AggregateRow> aggregate_correlations(const CorrelationTable& table,
                                                 std::optional<LanguageFilter> filter,
                                                 double level) {
  if (filter && !filter->registry) throw ContractViolation("language filter needs a registry");
  std::map<std::string, std::vector<double>> by_measure;
  for (const auto& row : table.rows) {
    if (row.status == CorrelationStatus::MissingData) continue;
    if (filter) {
      const auto flag = filter->registry->in_pretraining(row.test_lang);
      if (!flag || *flag != filter->in_pretraining) continue;
    }
    by_measure[row.measure].push_back(row.zeroed ? 0.0 : *row.r);
  }
  std::vector<AggregateRow> out;
  for (const auto& [measure, values] : by_measure) {
    AggregateRow a;
    a.measure = measure;
    a.n = values.size();
    if (values.size() < 2) {
      a.mean = a.ci_low = a.ci_high = values.front();
      a.degenerate = true;
    } else {
      const auto ci = stats::mean_ci(values, level);
      a.mean = ci.mean;
      a.ci_low = ci.lo;
      a.ci_high = ci.hi;
    }
    out.push_back(std::move(a));
  }
  return out;
}

std::string emit_correlations(const std::vector<CorrelationTable>& tables) {
  std::string out = "experiment\ttest_lang\tmeasure\tr\tp\tn\tzeroed\n";
  for (const auto& t : tables) {
    for (const auto& r : t.rows) {
      const bool missing = r.status == CorrelationStatus::MissingData;
      out += t.experiment + '\t' + r.test_lang + '\t' + r.measure + '\t' + fmt(r.r, 6) + '\t' +
             fmt(r.p, 6) + '\t' + std::to_string(r.n) + '\t' +
             (missing ? "NA" : (r.zeroed ? "1" : "0")) + '\n';
    }
  }
  return out;
}

std::string emit_aggregates(const std::string& experiment, const std::string& subset,
                            const std::vector<AggregateRow>& rows, bool with_header) {
  std::string out =
      with_header ? "experiment\tsubset\tmeasure\tmean\tci_low\tci_high\tn\tdegenerate\n" : "";
  for (const auto& r : rows) {
    out += experiment + '\t' + subset + '\t' + r.measure + '\t' + text::format_fixed(r.mean, 6) +
           '\t' + text::format_fixed(r.ci_low, 6) + '\t' + text::format_fixed(r.ci_high, 6) + '\t' +
           std::to_string(r.n) + '\t' + (r.degenerate ? "1" : "0") + '\n';
  }
  return out;
}

Intercorrelation measure_intercorrelations(const std::vector<SimilarityTable>& tables,
                                           double alpha) {
  if (tables.size() < 2) throw ContractViolation("measure_intercorrelations needs >= 2 tables");
  Intercorrelation m;
  m.alpha = alpha;
  for (const auto& t : tables) m.measures.emplace_back(to_string(t.measure()));
  for (std::size_t i = 0; i < tables.size(); ++i) {
    for (std::size_t j = i; j < tables.size(); ++j) {
      std::vector<double> x;
      std::vector<double> y;
      for (const auto& [key, v] : tables[i].values()) {
        if (const auto w = tables[j].value(key.first, key.second)) {
          x.push_back(v);
          y.push_back(*w);
        }
      }
      try {
        const auto c = stats::pearson(x, y);
        m.cells[{i, j}] = c;
        m.cells[{j, i}] = c;
      } catch (const UndefinedStatistic&) {
      }
    }
  }
  return m;
}

std::string emit_intercorrelations(const Intercorrelation& m) {
  std::string out = "measure";
  for (const auto& name : m.measures) out += '\t' + name;
  out += '\n';
  for (std::size_t i = 0; i < m.measures.size(); ++i) {
    out += m.measures[i];
    for (std::size_t j = 0; j < m.measures.size(); ++j) {
      const auto it = m.cells.find({i, j});
      out += '\t';
      if (it == m.cells.end()) {
        out += "NA";
      } else if (it->second.p >= m.alpha) {
        out += "---";
      } else {
        out += text::format_fixed(it->second.r, 2);
      }
    }
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// Source selection
// ---------------------------------------------------------------------------

LossTable selection_loss(const TransferResultMatrix& results, const Selector& selector,
                         std::size_t k) {
  if (k == 0) throw ContractViolation("selection_loss: k must be positive");
  LossTable table;
  table.selector = selector.name;
  table.k = k;
  const auto sources = results.train_languages();
  std::vector<double> losses;
  for (const auto& target : results.test_languages()) {
    struct Candidate {
      std::string lang;
      double selector;
      double score;
    };
    std::vector<Candidate> candidates;
    for (const auto& source : sources) {
      if (source == target) continue;
      const auto score = results.score(source, target);
      const auto sel = selector.value(source, target);
      if (score && sel) candidates.push_back({source, *sel, *score});
    }
    if (candidates.empty()) {
      table.skipped.push_back(target);
      continue;
    }
    // Sources arrive in sorted order, so a stable sort keeps ties by id.
    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const auto& a, const auto& b) { return a.selector > b.selector; });
    double best = -INFINITY;
    for (const auto& c : candidates) best = std::max(best, c.score);
    double picked = -INFINITY;
    for (std::size_t i = 0; i < std::min(k, candidates.size()); ++i) {
      picked = std::max(picked, candidates[i].score);
    }
    table.rows.push_back({target, best - picked});
    losses.push_back(best - picked);
  }
  if (!losses.empty()) table.aggregate = stats::mean_std(losses);
  return table;
}

LossTable cross_experiment_loss(const TransferResultMatrix& target_results,
                                const TransferResultMatrix& selector_results, std::size_t k) {
  const bool shared = std::any_of(
      target_results.scores.begin(), target_results.scores.end(), [&](const auto& kv) {
        return kv.first.first != kv.first.second && selector_results.scores.count(kv.first) > 0;
      });
  if (!shared) {
    throw ContractViolation(target_results.label() + " and " + selector_results.label() +
                            " share no transfer cells");
  }
  return selection_loss(target_results, make_selector(selector_results), k);
}

std::string emit_losses(const std::vector<LossTable>& tables) {
  std::string out = "selector\tk\ttarget\tloss_pp\n";
  for (const auto& t : tables) {
    const auto k = std::to_string(t.k);
    for (const auto& r : t.rows) {
      out += t.selector + '\t' + k + '\t' + r.target + '\t' + text::format_fixed(r.loss, 2) + '\n';
    }
    const auto& a = t.aggregate;
    out += "# mean\t" + fmt(a ? std::optional(a->mean) : std::nullopt, 2) + "\tstd\t" +
           fmt(a ? std::optional(a->std) : std::nullopt, 2) + "\tskipped\t" +
           std::to_string(t.skipped.size()) + '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// Script partition
// ---------------------------------------------------------------------------

ScriptPartition script_partition_test(const TransferResultMatrix& results,
                                      const Registry& registry) {
  std::vector<double> same;
  std::vector<double> different;
  for (const auto& [key, v] : results.scores) {
    if (base_language(key.first) == base_language(key.second)) continue;
    const auto sa = registry.script_of(key.first);
    const auto sb = registry.script_of(key.second);
    if (!sa || !sb) {
      throw ValidationError("no script known for " + (sa ? key.second : key.first));
    }
    (*sa == *sb ? same : different).push_back(v);
  }
  if (same.empty()) throw UndefinedStatistic("empty same-script sample");
  if (different.empty()) throw UndefinedStatistic("empty different-script sample");
  return {stats::ks_two_sample(same, different), same.size(), different.size()};
}

// ---------------------------------------------------------------------------
// Heatmap
// ---------------------------------------------------------------------------

Heatmap heatmap_order(const TransferResultMatrix& results) {
  const auto tests = results.test_languages();
  const auto trains = results.train_languages();
  const std::size_t m = tests.size();
  std::vector<std::vector<std::optional<double>>> rows(m);
  std::vector<double> means(m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& s : trains) {
      rows[i].push_back(results.score(s, tests[i]));
      if (rows[i].back()) {
        sum += *rows[i].back();
        ++n;
      }
    }
    if (n > 0) means[i] = sum / static_cast<double>(n);
  }

  stats::SquareMatrix dist(m, std::vector<double>(m, 0.0));
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) {
      double ss = 0.0;
      for (std::size_t c = 0; c < trains.size(); ++c) {
        if (!rows[i][c] && !rows[j][c]) continue;
        const double d = rows[i][c].value_or(means[i]) - rows[j][c].value_or(means[j]);
        ss += d * d;
      }
      dist[i][j] = dist[j][i] = std::sqrt(ss);
    }
  }

  Heatmap h;
  const auto order = m > 0 ? stats::ward_order(dist) : std::vector<std::size_t>{};
  for (auto i : order) h.rows.push_back(tests[i]);
  std::set<std::string> remaining(trains.begin(), trains.end());
  for (const auto& lang : h.rows) {
    if (remaining.erase(lang)) h.columns.push_back(lang);
  }
  for (const auto& lang : remaining) h.columns.push_back(lang);
  for (const auto& t : h.rows) {
    std::vector<std::optional<double>> line;
    for (const auto& s : h.columns) line.push_back(results.score(s, t));
    h.cells.push_back(std::move(line));
  }
  return h;
}

std::string emit_heatmap(const Heatmap& h) {
  std::string out = "test\\train";
  for (const auto& c : h.columns) out += '\t' + c;
  out += '\n';
  for (std::size_t i = 0; i < h.rows.size(); ++i) {
    out += h.rows[i];
    for (const auto& v : h.cells[i]) out += '\t' + fmt(v, 2);
    out += '\n';
  }
  return out;
}

std::string emit_order(const Heatmap& h) {
  std::string out;
  for (const auto& r : h.rows) out += r + '\n';
  return out;
}

// ---------------------------------------------------------------------------
// Multi-predictor fit
// ---------------------------------------------------------------------------

FitReport multi_predictor_fit(const TransferResultMatrix& results,
                              const std::vector<Selector>& selectors, const FitOptions& options) {
  if ((options.same_script || options.in_pretraining) && !options.registry) {
    throw ContractViolation("script and pretraining flags need a registry");
  }
  FitReport report;
  report.experiment = results.label();
  report.predictors.push_back("intercept");
  for (const auto& s : selectors) report.predictors.push_back(s.name);
  if (options.same_script) report.predictors.push_back("same_script");
  if (options.in_pretraining) report.predictors.push_back("in_pretraining");
  const std::size_t p = report.predictors.size();
  if (p < 2) throw ContractViolation("multi_predictor_fit needs at least one predictor");
  for (std::size_t j = 1; j < p; ++j) report.excluded_by[report.predictors[j]] = 0;

  std::vector<std::vector<double>> raw;
  std::vector<double> y;
  for (const auto& [key, score] : results.scores) {
    const auto& [source, target] = key;
    if (source == target) continue;
    ++report.n_candidates;
    std::vector<std::optional<double>> values;
    for (const auto& s : selectors) values.push_back(s.value(source, target));
    if (options.same_script) {
      const auto a = options.registry->script_of(source);
      const auto b = options.registry->script_of(target);
      values.push_back(a && b ? std::optional(*a == *b ? 1.0 : 0.0) : std::nullopt);
    }
    if (options.in_pretraining) {
      const auto f = options.registry->in_pretraining(target);
      values.push_back(f ? std::optional(*f ? 1.0 : 0.0) : std::nullopt);
    }
    bool complete = true;
    for (std::size_t j = 0; j < values.size(); ++j) {
      if (!values[j]) {
        ++report.excluded_by[report.predictors[j + 1]];
        complete = false;
      }
    }
    if (!complete) continue;
    std::vector<double> row{1.0};
    for (const auto& v : values) row.push_back(*v);
    raw.push_back(std::move(row));
    y.push_back(score);
  }
  report.n_complete = raw.size();
  if (raw.empty()) {
    std::string why;
    for (const auto& [name, n] : report.excluded_by) {
      if (n > 0) why += (why.empty() ? "" : ", ") + name + " missing for " + std::to_string(n);
    }
    throw UndefinedStatistic(report.experiment + ": no complete cases (" +
                             (why.empty() ? std::string("no transfer cells") : why) + ")");
  }

  const auto fit = stats::ols_fit(raw, y);
  report.coefficients = fit.coefficients;
  report.std_errors = fit.std_errors;

  // Same column space, so the z-scored design is full rank whenever the raw one is.
  std::vector<std::vector<double>> z = raw;
  for (std::size_t j = 1; j < p; ++j) {
    std::vector<double> col;
    for (const auto& r : raw) col.push_back(r[j]);
    const auto ms = stats::mean_std(col);
    for (auto& r : z) r[j] = (r[j] - ms.mean) / ms.std;
  }
  report.standardized = stats::ols_fit(z, y).coefficients;
  return report;
}

std::string emit_fit(const std::vector<FitReport>& reports) {
  std::string out = "experiment\tpredictor\tcoefficient\tstd_error\tstandardized\tn\n";
  for (const auto& r : reports) {
    for (std::size_t j = 0; j < r.predictors.size(); ++j) {
      out += r.experiment + '\t' + r.predictors[j] + '\t' + text::format_fixed(r.coefficients[j], 6) +
             '\t' + text::format_fixed(r.std_errors[j], 6) + '\t' +
             text::format_fixed(r.standardized[j], 6) + '\t' + std::to_string(r.n_complete) + '\n';
    }
  }
  return out;
}

}  // namespace langsim::analysis
