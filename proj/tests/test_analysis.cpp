#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "langsim/analysis.hpp"
#include "langsim/error.hpp"
#include "langsim/rng.hpp"

using namespace langsim;
using namespace langsim::analysis;

namespace {

TransferResultMatrix matrix(std::vector<std::tuple<std::string, std::string, double>> cells,
                            std::string exp = "exp", std::string metric = "acc") {
  TransferResultMatrix m;
  m.experiment = std::move(exp);
  m.metric = std::move(metric);
  for (auto& [s, t, v] : cells) m.scores[{s, t}] = v;
  return m;
}

Selector lambda_selector(std::string name, std::function<std::optional<double>(const std::string&, const std::string&)> f) {
  return Selector{std::move(name), std::move(f)};
}

std::string lang(std::size_t i) { return std::string("l") + static_cast<char>('a' + i); }

TransferResultMatrix random_square(Rng& rng, std::size_t m) {
  TransferResultMatrix r;
  r.experiment = "rand";
  r.metric = "acc";
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) r.scores[{lang(i), lang(j)}] = std::round(rng.uniform(0, 100) * 4) / 4;
  }
  return r;
}

CorrelationRow corr_row(std::string target, double r, double p, bool zeroed) {
  CorrelationRow row;
  row.test_lang = std::move(target);
  row.measure = "gen";
  row.r = r;
  row.p = p;
  row.n = 5;
  row.zeroed = zeroed;
  row.status = zeroed ? CorrelationStatus::NotSignificant : CorrelationStatus::Value;
  return row;
}

}  // namespace

// --- within / across --------------------------------------------------------

TEST(WithinAcross, TwoDatasets) {
  const auto m = matrix({{"eng", "eng", 90}, {"deu", "deu", 80}, {"eng", "deu", 40}, {"deu", "eng", 30}});
  const auto s = within_across_summary(m, SummaryLevel::Dataset);
  EXPECT_EQ(s.within->mean, 85.0);
  EXPECT_EQ(s.within->std, 5.0);
  EXPECT_EQ(s.across->mean, 35.0);
  EXPECT_EQ(s.across->std, 5.0);
  EXPECT_EQ(s.n_within, 2u);
  EXPECT_EQ(s.n_across, 2u);
  EXPECT_EQ(emit_summary({s}), "experiment\tlevel\tgroup\tmean\tstd\tn\n"
                               "exp/acc\tdataset\twithin\t85.00\t5.00\t2\n"
                               "exp/acc\tdataset\tacross\t35.00\t5.00\t2\n");
}

TEST(WithinAcross, DiagonalOnlyHasNoAcrossGroup) {
  const auto s = within_across_summary(matrix({{"eng", "eng", 90}}), SummaryLevel::Dataset);
  EXPECT_TRUE(s.within.has_value());
  EXPECT_FALSE(s.across.has_value());
  EXPECT_NE(emit_summary({s}).find("across\tNA\tNA\t0"), std::string::npos);
}

TEST(WithinAcross, LanguageLevelMergesDatasets) {
  // two English treebanks with identical rows behave like one at language level
  const auto one = matrix({{"eng", "eng", 90}, {"eng", "deu", 40}, {"deu", "eng", 30}, {"deu", "deu", 80}});
  const auto two = matrix({{"eng", "eng", 90}, {"eng", "deu", 40}, {"deu", "eng", 30}, {"deu", "deu", 80},
                           {"eng_b", "eng_b", 90}, {"eng_b", "eng", 90}, {"eng", "eng_b", 90},
                           {"eng_b", "deu", 40}, {"deu", "eng_b", 30}});
  const auto a = within_across_summary(one, SummaryLevel::Language);
  const auto b = within_across_summary(two, SummaryLevel::Language);
  EXPECT_EQ(a.within->mean, b.within->mean);
  EXPECT_EQ(a.across->mean, b.across->mean);
  EXPECT_EQ(b.n_within, 2u);
  EXPECT_THROW(within_across_summary(TransferResultMatrix{}, SummaryLevel::Dataset), ContractViolation);
}

// --- correlations -----------------------------------------------------------

TEST(Correlations, PerfectLinearSelector) {
  SimilarityTable gen(Measure::Gen);
  TransferResultMatrix m;
  m.experiment = "pos";
  m.metric = "acc";
  m.scores[{"t", "t"}] = 99;
  for (int i = 0; i < 5; ++i) {
    const std::string s = "s" + std::to_string(i);
    gen.set(s, "t", 0.1 + 0.2 * i);
    m.scores[{s, "t"}] = 20 + 50 * (0.1 + 0.2 * i);
  }
  const auto table = per_target_correlations(m, {make_selector(gen)});
  ASSERT_EQ(table.rows.size(), 1u);
  const auto it = table.rows.begin();
  EXPECT_EQ(it->status, CorrelationStatus::Value);
  EXPECT_NEAR(*it->r, 1.0, 1e-12);
  EXPECT_EQ(it->n, 5u);  // the within-language cell is left out
  EXPECT_FALSE(it->zeroed);
}

TEST(Correlations, TooFewSourcesIsMissingData) {
  SimilarityTable gen(Measure::Gen);
  gen.set("a", "t", 0.2);
  gen.set("b", "t", 0.4);
  const auto m = matrix({{"a", "t", 10}, {"b", "t", 20}});
  const auto table = per_target_correlations(m, {make_selector(gen)});
  ASSERT_EQ(table.rows.size(), 1u);
  EXPECT_EQ(table.rows[0].status, CorrelationStatus::MissingData);
  EXPECT_FALSE(table.rows[0].r.has_value());
  EXPECT_NE(emit_correlations({table}).find("\tNA\tNA\t2\tNA\n"), std::string::npos);
  EXPECT_THROW(per_target_correlations(m, {make_selector(gen)}, 0.0), ContractViolation);
}

TEST(Correlations, AlphaOnlyChangesZeroing) {
  Rng rng(5);
  TransferResultMatrix m = random_square(rng, 8);
  SimilarityTable gen(Measure::Gen);
  for (std::size_t i = 0; i < 8; ++i) {
    for (std::size_t j = i + 1; j < 8; ++j) gen.set(lang(i), lang(j), rng.uniform());
  }
  const auto strict = per_target_correlations(m, {make_selector(gen)}, 0.05);
  const auto loose = per_target_correlations(m, {make_selector(gen)}, 1.0);
  ASSERT_EQ(strict.rows.size(), loose.rows.size());
  for (std::size_t i = 0; i < strict.rows.size(); ++i) {
    EXPECT_EQ(strict.rows[i].r, loose.rows[i].r);
    EXPECT_EQ(strict.rows[i].p, loose.rows[i].p);
    EXPECT_FALSE(loose.rows[i].zeroed);
    EXPECT_EQ(strict.rows[i].zeroed, *strict.rows[i].p >= 0.05);
  }
}

TEST(Aggregate, ZeroedEntriesCountAsZero) {
  CorrelationTable t;
  t.rows = {corr_row("a", 0.9, 0.01, false), corr_row("b", 0.4, 0.2, true), corr_row("c", -0.15, 0.01, false)};
  CorrelationRow missing;
  missing.test_lang = "d";
  missing.measure = "gen";
  t.rows.push_back(missing);
  const auto agg = aggregate_correlations(t);
  ASSERT_EQ(agg.size(), 1u);
  EXPECT_NEAR(agg[0].mean, 0.25, 1e-12);
  EXPECT_EQ(agg[0].n, 3u);
  EXPECT_FALSE(agg[0].degenerate);
  EXPECT_LT(agg[0].ci_low, agg[0].mean);
  EXPECT_GT(agg[0].ci_high, agg[0].mean);
}

TEST(Aggregate, SingleEntryIsDegenerate) {
  CorrelationTable t;
  t.rows = {corr_row("a", 0.7, 0.01, false)};
  const auto agg = aggregate_correlations(t);
  ASSERT_EQ(agg.size(), 1u);
  EXPECT_TRUE(agg[0].degenerate);
  EXPECT_EQ(agg[0].mean, 0.7);
  EXPECT_EQ(agg[0].ci_low, 0.7);
  EXPECT_NE(emit_aggregates("exp/acc", "all", agg).find("\t1\t1\n"), std::string::npos);
}

TEST(Aggregate, PretrainingFilter) {
  const Registry reg({{"aaa", "Latn", std::nullopt, true}, {"bbb", "Latn", std::nullopt, false}});
  CorrelationTable t;
  t.rows = {corr_row("aaa", 0.6, 0.01, false), corr_row("bbb", 0.2, 0.01, false)};
  const auto seen = aggregate_correlations(t, LanguageFilter{&reg, true});
  const auto unseen = aggregate_correlations(t, LanguageFilter{&reg, false});
  EXPECT_EQ(seen.at(0).mean, 0.6);
  EXPECT_EQ(unseen.at(0).mean, 0.2);
  EXPECT_THROW(aggregate_correlations(t, LanguageFilter{nullptr, true}), ContractViolation);
}

TEST(Intercorrelations, IdenticalAndUnrelatedTables) {
  SimilarityTable gen(Measure::Gen);
  SimilarityTable geo(Measure::Geo);
  SimilarityTable lex(Measure::Lex);
  const double g[] = {0.1, 0.5, 0.3, 0.9, 0.7, 0.2};
  const double h[] = {0.5, 0.5, 0.1, 0.6, 0.2, 0.9};
  int n = 0;
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = i + 1; j < 4; ++j, ++n) {
      gen.set(lang(i), lang(j), g[n]);
      geo.set(lang(i), lang(j), g[n] * 0.5 + 0.1);
    }
  }
  lex.set(lang(0), lang(1), 0.3);
  const auto m = measure_intercorrelations({gen, geo, lex});
  EXPECT_NEAR(m.cells.at({0, 1}).r, 1.0, 1e-12);
  EXPECT_EQ(m.cells.at({0, 1}).r, m.cells.at({1, 0}).r);
  EXPECT_EQ(m.cells.count({0, 2}), 0u);
  const auto out = emit_intercorrelations(m);
  EXPECT_EQ(out.substr(0, out.find('\n')), "measure\tgen\tgeo\tlex");
  EXPECT_NE(out.find("gen\t1.00\t1.00\tNA"), std::string::npos);
  EXPECT_THROW(measure_intercorrelations({gen}), ContractViolation);

  SimilarityTable other(Measure::Lex);
  n = 0;
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = i + 1; j < 4; ++j, ++n) other.set(lang(i), lang(j), h[n]);
  }
  const auto weak = measure_intercorrelations({gen, other});
  EXPECT_GE(weak.cells.at({0, 1}).p, 0.05);
  EXPECT_NE(emit_intercorrelations(weak).find("---"), std::string::npos);
}

// --- selection loss ---------------------------------------------------------

TEST(SelectionLoss, SimilarButWorseSource) {
  SimilarityTable gen(Measure::Gen);
  gen.set("s1", "t", 0.9);
  gen.set("s2", "t", 0.5);
  const auto m = matrix({{"s1", "t", 60}, {"s2", "t", 70}});
  const auto sel = make_selector(gen);
  const auto k1 = selection_loss(m, sel, 1);
  ASSERT_EQ(k1.rows.size(), 1u);
  EXPECT_EQ(k1.rows[0].loss, 10.0);
  EXPECT_EQ(selection_loss(m, sel, 2).rows[0].loss, 0.0);
  EXPECT_EQ(emit_losses({k1}), "selector\tk\ttarget\tloss_pp\ngen\t1\tt\t10.00\n# mean\t10.00\tstd\t0.00\tskipped\t0\n");
  EXPECT_THROW(selection_loss(m, sel, 0), ContractViolation);
}

TEST(SelectionLoss, TiesGoToLowerId) {
  const auto m = matrix({{"a", "t", 50}, {"b", "t", 80}});
  const auto flat = lambda_selector("flat", [](const auto&, const auto&) { return 1.0; });
  EXPECT_EQ(selection_loss(m, flat, 1).rows[0].loss, 30.0);
}

TEST(SelectionLoss, TargetsWithoutCandidatesAreSkipped) {
  const auto m = matrix({{"t", "t", 90}, {"a", "u", 10}});
  const auto any = lambda_selector("any", [](const auto&, const auto&) { return 1.0; });
  const auto t = selection_loss(m, any, 1);
  EXPECT_EQ(t.skipped, (std::vector<std::string>{"t"}));
  EXPECT_EQ(t.rows.size(), 1u);
}

TEST(SelectionLoss, Properties) {
  Rng rng(77);
  for (int trial = 0; trial < 100; ++trial) {
    const auto m = random_square(rng, 10);
    std::map<std::pair<std::string, std::string>, double> sims;
    for (const auto& [key, v] : m.scores) sims[key] = rng.uniform();
    const auto sel = lambda_selector("r", [&](const std::string& s, const std::string& t) {
      return std::optional(sims.at({s, t}));
    });
    const auto affine = lambda_selector("a", [&](const std::string& s, const std::string& t) {
      return std::optional(3.0 * sims.at({s, t}) - 7.0);
    });
    const auto oracle = selection_loss(m, make_selector(m), 1);
    for (const auto& r : oracle.rows) EXPECT_EQ(r.loss, 0.0);
    double prev = INFINITY;
    for (std::size_t k = 1; k <= 9; ++k) {
      const auto t = selection_loss(m, sel, k);
      const auto u = selection_loss(m, affine, k);
      ASSERT_EQ(t.rows.size(), 10u);
      double total = 0;
      for (std::size_t i = 0; i < t.rows.size(); ++i) {
        EXPECT_GE(t.rows[i].loss, 0.0);
        EXPECT_EQ(t.rows[i].loss, u.rows[i].loss);
        total += t.rows[i].loss;
      }
      EXPECT_LE(total, prev);
      prev = total;
      if (k == 9) {
        EXPECT_EQ(total, 0.0);
      }
    }
  }
}

TEST(SelectionLoss, CrossExperiment) {
  const auto pos = matrix({{"a", "t", 50}, {"b", "t", 80}}, "pos");
  const auto dep = matrix({{"a", "t", 10}, {"b", "t", 5}}, "dep");
  const auto t = cross_experiment_loss(pos, dep, 1);
  EXPECT_EQ(t.selector, "dep/acc");
  EXPECT_EQ(t.rows[0].loss, 30.0);
  const auto unrelated = matrix({{"x", "y", 1}, {"t", "t", 2}}, "ner");
  EXPECT_THROW(cross_experiment_loss(pos, unrelated, 1), ContractViolation);
}

// --- script partition -------------------------------------------------------

TEST(ScriptPartition, SeparatesScripts) {
  const Registry reg({{"eng", "Latn", std::nullopt, true},
                      {"deu", "Latn", std::nullopt, true},
                      {"rus", "Cyrl", std::nullopt, true},
                      {"bul", "Cyrl", std::nullopt, true}});
  const auto m = matrix({{"eng", "deu", 70}, {"deu", "eng", 72}, {"rus", "bul", 68}, {"bul", "rus", 75},
                         {"eng", "rus", 20}, {"rus", "eng", 25}, {"deu", "bul", 30}, {"eng", "eng", 99}});
  const auto r = script_partition_test(m, reg);
  EXPECT_EQ(r.ks.statistic, 1.0);
  EXPECT_EQ(r.n_same, 4u);
  EXPECT_EQ(r.n_different, 3u);
}

TEST(ScriptPartition, DegenerateInputs) {
  const Registry latin({{"eng", "Latn", std::nullopt, true}, {"deu", "Latn", std::nullopt, true}});
  const auto m = matrix({{"eng", "deu", 70}, {"deu", "eng", 72}});
  EXPECT_THROW(script_partition_test(m, latin), UndefinedStatistic);
  const auto unknown = matrix({{"eng", "xyz", 70}});
  EXPECT_THROW(script_partition_test(unknown, latin), ValidationError);
}

// --- heatmap ----------------------------------------------------------------

TEST(Heatmap, ClustersStayTogether) {
  // a,c behave alike and b,d behave alike
  TransferResultMatrix m;
  const std::map<std::string, double> level{{"a", 90}, {"b", 10}, {"c", 88}, {"d", 12}};
  for (const auto& [t, v] : level) {
    for (const auto& s : {"a", "b", "c", "d"}) m.scores[{s, t}] = v;
  }
  const auto h = heatmap_order(m);
  ASSERT_EQ(h.rows.size(), 4u);
  EXPECT_EQ(h.rows, h.columns);
  const auto pos = [&](const std::string& x) { return std::find(h.rows.begin(), h.rows.end(), x) - h.rows.begin(); };
  EXPECT_EQ(std::abs(pos("a") - pos("c")), 1);
  EXPECT_EQ(std::abs(pos("b") - pos("d")), 1);
  EXPECT_EQ(h.rows.front(), "a");
}

TEST(Heatmap, TiesKeepSortedOrderAndMissingCellsPrintNa) {
  const auto m = matrix({{"x", "p", 50}, {"x", "q", 50}, {"y", "p", 50}, {"x", "r", 50}});
  const auto h = heatmap_order(m);
  EXPECT_EQ(h.rows, (std::vector<std::string>{"p", "q", "r"}));
  EXPECT_EQ(h.columns, (std::vector<std::string>{"x", "y"}));
  EXPECT_EQ(emit_heatmap(h), "test\\train\tx\ty\np\t50.00\t50.00\nq\t50.00\tNA\nr\t50.00\tNA\n");
  EXPECT_EQ(emit_order(h), "p\nq\nr\n");
}

TEST(Heatmap, SingleRow) {
  const auto h = heatmap_order(matrix({{"b", "a", 1}, {"a", "a", 2}}));
  EXPECT_EQ(h.rows, (std::vector<std::string>{"a"}));
  EXPECT_EQ(h.columns, (std::vector<std::string>{"a", "b"}));
}

// --- multi-predictor fit ----------------------------------------------------

TEST(Fit, RecoversLinearRelation) {
  Rng rng(9);
  TransferResultMatrix m;
  m.experiment = "pos";
  m.metric = "acc";
  std::map<std::pair<std::string, std::string>, double> syn;
  std::map<std::pair<std::string, std::string>, double> noise;
  for (std::size_t i = 0; i < 6; ++i) {
    for (std::size_t j = 0; j < 6; ++j) {
      const auto key = std::make_pair(lang(i), lang(j));
      syn[key] = rng.uniform();
      noise[key] = rng.uniform();
      m.scores[key] = 2.0 * syn[key] + 5.0;
    }
  }
  const auto s1 = lambda_selector("syn", [&](const auto& s, const auto& t) { return std::optional(syn.at({s, t})); });
  const auto s2 = lambda_selector("noise", [&](const auto& s, const auto& t) { return std::optional(noise.at({s, t})); });
  const auto r = multi_predictor_fit(m, {s1, s2});
  EXPECT_EQ(r.predictors, (std::vector<std::string>{"intercept", "syn", "noise"}));
  EXPECT_NEAR(r.coefficients[0], 5.0, 1e-9);
  EXPECT_NEAR(r.coefficients[1], 2.0, 1e-9);
  EXPECT_NEAR(r.coefficients[2], 0.0, 1e-9);
  EXPECT_EQ(r.n_complete, 30u);
  EXPECT_EQ(r.n_candidates, 30u);
  const auto out = emit_fit({r});
  EXPECT_NE(out.find("pos/acc\tsyn\t2.000000\t"), std::string::npos);
}

TEST(Fit, ConstantPredictorIsSingular) {
  const auto m = matrix({{"a", "b", 1}, {"b", "a", 2}, {"a", "c", 3}, {"c", "a", 5}});
  const auto flat = lambda_selector("flat", [](const auto&, const auto&) { return 0.5; });
  EXPECT_THROW(multi_predictor_fit(m, {flat}), SingularMatrix);
}

TEST(Fit, NoCompleteCasesExplainsWhy) {
  const auto m = matrix({{"a", "b", 1}, {"b", "a", 2}});
  const auto none = lambda_selector("gen", [](const auto&, const auto&) { return std::optional<double>{}; });
  try {
    multi_predictor_fit(m, {none});
    FAIL() << "expected UndefinedStatistic";
  } catch (const UndefinedStatistic& e) {
    EXPECT_NE(std::string(e.what()).find("gen missing for 2"), std::string::npos);
  }
  EXPECT_THROW(multi_predictor_fit(m, {none}, FitOptions{true, false, nullptr}), ContractViolation);
}
