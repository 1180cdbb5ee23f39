// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <sys/wait.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "langsim/analysis.hpp"
#include "langsim/error.hpp"
#include "langsim/ngram_classifier.hpp"
#include "langsim/rng.hpp"
#include "langsim/similarity.hpp"
#include "langsim/stats.hpp"
#include "langsim/taskmetrics.hpp"
#include "langsim/text.hpp"
#include "oracles.hpp"

using namespace langsim;
namespace fs = std::filesystem;

namespace {

struct Check {
  bool ok = true;
  std::ostringstream why;

  void expect(bool cond, const std::string& msg) {
    if (!cond && ok) why << msg;
    ok = ok && cond;
  }
};

std::string tag(std::size_t i) { return std::string("l") + static_cast<char>('a' + i); }

// 1 ---------------------------------------------------------------------------

Check baselines() {
  Check c;
  c.expect(std::fabs(random_baseline(17) - 5.88) <= 0.01, "baseline(17)");
  c.expect(std::fabs(random_baseline(7) - 14.29) <= 0.01, "baseline(7)");
  for (std::size_t k : {17u, 7u}) {
    Rng rng(derive_seed(2024, std::to_string(k)));
    std::size_t hits = 0;
    for (int i = 0; i < 10000; ++i) {
      const auto gold = rng.below(k);
      hits += rng.below(k) == gold ? 1 : 0;
    }
    const double acc = 100.0 * static_cast<double>(hits) / 10000.0;
    std::ostringstream m;
    m << "uniform classifier over " << k << " classes scored " << acc;
    c.expect(std::fabs(acc - random_baseline(k)) <= 1.0, m.str());
  }
  return c;
}

// 2 ---------------------------------------------------------------------------

Check gower_equivalence() {
  Check c;
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t langs = 2 + rng.below(5);
    const std::size_t feats = 1 + rng.below(10);
    FeatureMatrix fm;
    for (std::size_t f = 0; f < feats; ++f) fm.features.push_back("F" + std::to_string(f));
    std::vector<std::string> names;
    for (std::size_t l = 0; l < langs; ++l) {
      FeatureVector row;
      for (std::size_t f = 0; f < feats; ++f) {
        if (rng.uniform() < 0.3) {
          row.push_back(std::nullopt);
        } else {
          row.push_back(std::to_string(rng.below(3)));
        }
      }
      fm.rows[tag(l)] = row;
      names.push_back(tag(l));
    }
    const auto table = build_gower_table(Measure::Gb, fm, names, 0.5);
    for (std::size_t i = 0; i < langs; ++i) {
      for (std::size_t j = i + 1; j < langs; ++j) {
        const auto& a = fm.rows[tag(i)];
        const auto& b = fm.rows[tag(j)];
        const auto want = oracle::gower(a, b, 0.5);
        const auto got = gower_similarity(a, b, 0.5);
        const auto cell = table.value(tag(i), tag(j));
        c.expect(want.has_value() == got.has_value(), "filtering differs from oracle");
        c.expect(want.has_value() == cell.has_value(), "table filtering differs from oracle");
        if (want && got && cell) {
          c.expect(want->similarity == got->similarity && want->similarity == *cell,
                   "similarity differs from oracle");
          c.expect(want->coverage == got->coverage, "coverage differs from oracle");
        }
      }
    }
  }
  return c;
}

// 3 ---------------------------------------------------------------------------

Check metric_laws() {
  Check c;
  Rng rng(13);
  const std::vector<std::string> rels{"obj", "obl", "obl:tmod", "nsubj", "nmod:poss", "det"};
  for (int trial = 0; trial < 500; ++trial) {
    TokenCorpus gold{"x", {}};
    TokenCorpus pred{"x", {}};
    const std::size_t sents = 1 + rng.below(4);
    for (std::size_t s = 0; s < sents; ++s) {
      const int n = 1 + static_cast<int>(rng.below(8));
      Sentence g;
      Sentence p;
      for (int i = 1; i <= n; ++i) {
        const std::string form = "w" + std::to_string(i);
        g.tokens.push_back({form, "NOUN", static_cast<int>(rng.below(static_cast<std::size_t>(n + 1))),
                            rels[rng.below(rels.size())]});
        p.tokens.push_back({form, rng.below(2) ? "NOUN" : "VERB",
                            static_cast<int>(rng.below(static_cast<std::size_t>(n + 1))),
                            rels[rng.below(rels.size())]});
      }
      gold.sentences.push_back(g);
      pred.sentences.push_back(p);
    }
    const auto s = attachment_scores(gold, pred);
    c.expect(s.las.value <= s.uas.value && s.uas.value <= 100.0, "LAS <= UAS <= 100 violated");
    const auto self = attachment_scores(gold, gold);
    c.expect(self.uas.value == 100.0 && self.las.value == 100.0 &&
                 pos_accuracy(gold, gold).value == 100.0,
             "pred = gold is not 100/100/100");
  }
  const TokenCorpus g{"x", {Sentence{{{"a", "X", 0, "root"}, {"b", "X", 1, "obl:tmod"}}}}};
  const TokenCorpus p{"x", {Sentence{{{"a", "X", 0, "root"}, {"b", "X", 1, "obl"}}}}};
  c.expect(attachment_scores(g, p).las.value == 100.0, "obl:tmod vs obl not LAS-correct");
  return c;
}

// 4 ---------------------------------------------------------------------------

Check stats_kernels() {
  Check c;
  Rng rng(17);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 3 + rng.below(30);
    std::vector<double> x(n);
    std::vector<double> y(n);
    const bool ties = trial % 2 == 1;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = ties ? static_cast<double>(rng.below(5)) : rng.normal();
      y[i] = ties ? static_cast<double>(rng.below(5)) : rng.normal() + 0.3 * x[i];
    }
    try {
      const double p = stats::pearson(x, y).r;
      const double s = stats::spearman(x, y).r;
      c.expect(std::fabs(p - oracle::pearson(x, y)) <= 1e-10, "pearson differs from oracle");
      c.expect(std::fabs(s - oracle::spearman(x, y)) <= 1e-10, "spearman differs from oracle");
    } catch (const UndefinedStatistic&) {
      // constant draw; the oracle is undefined too
      const auto constant = [](const std::vector<double>& v) {
        return std::all_of(v.begin(), v.end(), [&](double e) { return e == v.front(); });
      };
      c.expect(constant(x) || constant(y), "pearson undefined on non-constant input");
    }
  }
  const double p = stats::correlation_p_value(0.9, 5);
  c.expect(std::fabs(p - 0.0374) <= 0.0005, "p(n=5, r=0.9) = " + std::to_string(p));
  c.expect(std::fabs(p - oracle::correlation_p(0.9, 5)) <= 1e-6, "p differs from numeric t oracle");
  const std::vector<double> a{1, 2, 3, 4};
  const std::vector<double> b{2, 3, 4, 5};
  c.expect(stats::ks_two_sample(a, b).statistic == 0.25, "KS D != 0.25");
  return c;
}

// 5 ---------------------------------------------------------------------------

Check ward() {
  Check c;
  Rng rng(19);
  for (std::size_t m = 1; m <= 7; ++m) {
    for (int trial = 0; trial < 100; ++trial) {
      std::vector<std::vector<double>> pts(m, std::vector<double>(2));
      for (auto& p : pts) {
        // a coarse grid makes equal merge costs common
        for (auto& v : p) v = trial % 2 ? static_cast<double>(rng.below(4)) : rng.uniform();
      }
      stats::SquareMatrix d(m, std::vector<double>(m, 0.0));
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < m; ++j) d[i][j] = std::hypot(pts[i][0] - pts[j][0], pts[i][1] - pts[j][1]);
      }
      const auto got = stats::ward_order(d);
      auto sorted = got;
      std::sort(sorted.begin(), sorted.end());
      bool perm = sorted.size() == m;
      for (std::size_t i = 0; perm && i < m; ++i) perm = sorted[i] == i;
      c.expect(perm, "ward order is not a permutation");
      c.expect(got == oracle::ward_order(d), "ward order differs from oracle at m=" + std::to_string(m));
    }
  }
  return c;
}

// 6 ---------------------------------------------------------------------------

Check selection_laws() {
  Check c;
  Rng rng(23);
  for (int trial = 0; trial < 100; ++trial) {
    TransferResultMatrix m;
    m.experiment = "synthetic";
    m.metric = "acc";
    SimilarityTable sim(Measure::Tri);
    SimilarityTable scaled(Measure::Tri);
    for (std::size_t i = 0; i < 10; ++i) {
      for (std::size_t j = 0; j < 10; ++j) m.scores[{tag(i), tag(j)}] = rng.uniform(0, 100);
    }
    for (std::size_t i = 0; i < 10; ++i) {
      for (std::size_t j = i + 1; j < 10; ++j) {
        const double v = rng.uniform();
        sim.set(tag(i), tag(j), v);
        scaled.set(tag(i), tag(j), 0.5 * v + 0.25);
      }
    }
    const auto sel = analysis::make_selector(sim);
    const auto sel_scaled = analysis::make_selector(scaled);
    const auto k1 = analysis::selection_loss(m, sel, 1);
    const auto k3 = analysis::selection_loss(m, sel, 3);
    for (const auto& r : k1.rows) c.expect(r.loss >= 0.0, "negative loss");
    for (const auto& r : k3.rows) c.expect(r.loss >= 0.0, "negative loss");
    c.expect(k3.aggregate->mean <= k1.aggregate->mean, "mean loss at k=3 exceeds k=1");
    for (const auto& r : analysis::selection_loss(m, analysis::make_selector(m), 1).rows) {
      c.expect(r.loss == 0.0, "oracle selector has nonzero loss");
    }
    for (std::size_t k : {1u, 3u}) {
      const auto a = analysis::selection_loss(m, sel, k);
      const auto b = analysis::selection_loss(m, sel_scaled, k);
      for (std::size_t i = 0; i < a.rows.size(); ++i) {
        c.expect(a.rows[i].loss == b.rows[i].loss, "affine rescaling changed a loss");
      }
    }
  }
  return c;
}

// 7 ---------------------------------------------------------------------------

struct CipherLanguage {
  std::string name;
  std::set<std::size_t> kept;  // letters shared with the seed alphabet
  std::size_t private_block = 0;
};

std::string encipher(const std::string& s, const CipherLanguage& lang) {
  std::string out;
  for (char ch : s) {
    if (ch < 'a' || ch > 'z') {
      out += ch;
      continue;
    }
    const auto idx = static_cast<std::size_t>(ch - 'a');
    if (lang.kept.count(idx)) {
      out += ch;
    } else {
      text::append_utf8(out, static_cast<char32_t>(0x0100 + 32 * lang.private_block + idx));
    }
  }
  return out;
}

Check cipher_overlap() {
  Check c;
  Rng rng(29);
  const std::size_t n_topics = 7;
  const auto pseudo_word = [&] {
    std::string w;
    const std::size_t len = 4 + rng.below(4);
    for (std::size_t i = 0; i < len; ++i) w += static_cast<char>('a' + rng.below(26));
    return w;
  };
  std::vector<std::vector<std::string>> keywords(n_topics);
  for (auto& k : keywords) {
    for (int i = 0; i < 12; ++i) k.push_back(pseudo_word());
  }
  std::vector<std::string> filler;
  for (int i = 0; i < 40; ++i) filler.push_back(pseudo_word());
  std::vector<std::string> topics;
  for (std::size_t t = 0; t < n_topics; ++t) topics.push_back("topic" + std::to_string(t));

  const auto sentence = [&](std::size_t t) {
    std::vector<std::string> words;
    for (int i = 0; i < 4; ++i) words.push_back(keywords[t][rng.below(12)]);
    for (int i = 0; i < 4; ++i) words.push_back(filler[rng.below(filler.size())]);
    rng.shuffle(words);
    return text::join(words, " ");
  };
  const auto seed_split = [&](std::size_t per_topic) {
    std::vector<LabeledItem> items;
    for (std::size_t i = 0; i < per_topic; ++i) {
      for (std::size_t t = 0; t < n_topics; ++t) items.push_back({topics[t], sentence(t)});
    }
    return items;
  };
  const auto seed_train = seed_split(100);
  const auto seed_test = seed_split(30);

  // shared-letter order; a language with overlap f keeps the first f * 26
  std::vector<std::size_t> order(26);
  for (std::size_t i = 0; i < 26; ++i) order[i] = i;
  rng.shuffle(order);
  const double overlaps[] = {1.0, 1.0, 0.75, 0.75, 0.5, 0.5, 0.25, 0.0};
  std::vector<CipherLanguage> langs;
  for (std::size_t i = 0; i < 8; ++i) {
    CipherLanguage l;
    l.name = tag(i);
    l.private_block = i;
    const auto n_keep = static_cast<std::size_t>(std::lround(overlaps[i] * 26));
    // the two full-overlap languages differ only in name; shift the others' window
    const std::size_t offset = (i % 2) * (26 - n_keep) / 2;
    for (std::size_t k = 0; k < n_keep; ++k) l.kept.insert(order[(offset + k) % 26]);
    langs.push_back(l);
  }

  std::vector<LanguageSplits> splits;
  for (const auto& l : langs) {
    LanguageSplits s;
    s.lang = l.name;
    s.train = LabeledTextCorpus{l.name, Split::Train, topics, {}};
    s.test = LabeledTextCorpus{l.name, Split::Test, topics, {}};
    for (const auto& it : seed_train) s.train.items.push_back({it.label, encipher(it.text, l)});
    for (const auto& it : seed_test) s.test.items.push_back({it.label, encipher(it.text, l)});
    splits.push_back(std::move(s));
  }

  TrainConfig tcfg;
  tcfg.seed = 31;
  const auto results = build_transfer_matrix(splits, FeaturizerConfig{}, tcfg);

  std::map<std::string, UnitSet> tri;
  for (const auto& s : splits) tri[s.lang] = extract_units(s.train, UnitLevel::Trigram);
  const auto tri_table = build_overlap_table(Measure::Tri, tri);

  const double chance = random_baseline(n_topics);
  std::vector<double> sims;
  std::vector<double> accs;
  std::ostringstream detail;
  for (const auto& [key, acc] : results.scores) {
    const auto& [train, test] = key;
    if (train == test) {
      detail << train << " within " << acc << "; ";
      c.expect(acc >= 90.0, "within-language accuracy " + std::to_string(acc) + " for " + train);
      continue;
    }
    const auto& a = langs[static_cast<std::size_t>(train[1] - 'a')];
    const auto& b = langs[static_cast<std::size_t>(test[1] - 'a')];
    bool disjoint = true;
    for (auto k : a.kept) disjoint = disjoint && !b.kept.count(k);
    if (disjoint) {
      c.expect(std::fabs(acc - chance) <= 5.0,
               "zero-overlap transfer " + train + "->" + test + " scored " + std::to_string(acc));
    }
    sims.push_back(*tri_table.value(train, test));
    accs.push_back(acc);
  }
  const double r = stats::pearson(sims, accs).r;
  c.expect(r > 0.5, "tri/accuracy correlation r = " + std::to_string(r));
  if (c.ok) std::cerr << "  cipher languages: r(tri, accuracy) = " << r << '\n';
  return c;
}

// 8 ---------------------------------------------------------------------------

// Scores whose Pearson correlation with `x` is exactly `r`.
std::vector<double> correlated(const std::vector<double>& x, double r, Rng& rng) {
  const auto standardize = [](std::vector<double> v) {
    const auto ms = stats::mean_std(v);
    for (auto& e : v) e = (e - ms.mean) / ms.std;
    return v;
  };
  const auto zx = standardize(x);
  std::vector<double> u(x.size());
  for (auto& e : u) e = rng.normal();
  double dot = 0;
  for (std::size_t i = 0; i < u.size(); ++i) dot += u[i] * zx[i];
  for (std::size_t i = 0; i < u.size(); ++i) u[i] -= dot / static_cast<double>(u.size()) * zx[i];
  const auto zu = standardize(u);
  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = 50 + 10 * (r * zx[i] + std::sqrt(1 - r * r) * zu[i]);
  return y;
}

Check zeroing_rule() {
  Check c;
  Rng rng(37);
  TransferResultMatrix m;
  m.experiment = "fixture";
  m.metric = "acc";
  SimilarityTable sim(Measure::Gen);
  // target "big" sees 30 sources, target "small" five
  for (const auto& [target, n] : {std::pair<std::string, std::size_t>{"big", 30}, {"small", 5}}) {
    std::vector<double> x(n);
    for (auto& v : x) v = rng.uniform(0.05, 0.95);
    const auto y = correlated(x, 0.5, rng);
    for (std::size_t i = 0; i < n; ++i) {
      const std::string src = target + "_src" + std::to_string(i);
      sim.set(src, target, x[i]);
      m.scores[{src, target}] = y[i];
    }
  }
  const auto table = analysis::per_target_correlations(m, {analysis::make_selector(sim)});
  c.expect(table.rows.size() == 2, "expected two correlation rows");
  for (const auto& row : table.rows) {
    c.expect(row.r && std::fabs(*row.r - 0.5) < 1e-9, "fixture r is not 0.5");
    c.expect(row.zeroed == (row.test_lang == "small"), "unexpected zeroing for " + row.test_lang);
  }
  const auto agg = analysis::aggregate_correlations(table);
  c.expect(agg.size() == 1 && std::fabs(agg[0].mean - 0.25) < 1e-9, "aggregate mean is not 0.25");
  return c;
}

// 9 ---------------------------------------------------------------------------

Check determinism() {
  Check c;
  const std::string conf = std::string(LANGSIM_FIXTURES) + "/pipeline.conf";
  const auto base = fs::temp_directory_path() / "langsim_acceptance";
  fs::remove_all(base);
  for (const char* run : {"a", "b"}) {
    const auto cmd = std::string(LANGSIM_BIN) + " -c '" + conf + "' -o '" + (base / run).string() +
                     "' pipeline >/dev/null";
    const int status = std::system(cmd.c_str());
    c.expect(WIFEXITED(status) && WEXITSTATUS(status) == 0, std::string("pipeline run ") + run + " failed");
  }
  if (!c.ok) return c;
  std::set<std::string> names_a;
  std::set<std::string> names_b;
  for (const auto& e : fs::directory_iterator(base / "a")) names_a.insert(e.path().filename().string());
  for (const auto& e : fs::directory_iterator(base / "b")) names_b.insert(e.path().filename().string());
  c.expect(names_a == names_b, "output trees list different files");
  c.expect(!names_a.empty(), "pipeline wrote nothing");
  for (const auto& n : names_a) {
    if (names_b.count(n)) {
      c.expect(text::read_file(base / "a" / n) == text::read_file(base / "b" / n), n + " differs");
    }
  }
  fs::remove_all(base);
  return c;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Check()>>> criteria{
      {"1 random baseline", baselines},
      {"2 gower oracle equivalence", gower_equivalence},
      {"3 attachment metric laws", metric_laws},
      {"4 statistics kernels", stats_kernels},
      {"5 ward ordering oracle", ward},
      {"6 selection-loss laws", selection_laws},
      {"7 cipher overlap effect", cipher_overlap},
      {"8 zeroing rule", zeroing_rule},
      {"9 end-to-end determinism", determinism},
  };
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    Check c;
    try {
      c = fn();
    } catch (const std::exception& e) {
      c.ok = false;
      c.why << "threw: " << e.what();
    }
    std::cout << (c.ok ? "PASS " : "FAIL ") << name;
    if (!c.ok) std::cout << ": " << c.why.str();
    std::cout << std::endl;
    failed += c.ok ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}
