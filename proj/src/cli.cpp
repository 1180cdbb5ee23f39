#include "langsim/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <functional>
#include <memory>
#include <ostream>

#include "langsim/analysis.hpp"
#include "langsim/error.hpp"
#include "langsim/taskmetrics.hpp"
#include "langsim/text.hpp"

namespace fs = std::filesystem;

namespace langsim::cli {

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

namespace {

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  for (const auto& part : text::split(value, ',')) {
    const auto t = text::trim(part);
    if (!t.empty()) out.emplace_back(t);
  }
  return out;
}

fs::path resolve(const fs::path& base, const std::string& value) {
  const fs::path p(value);
  return p.is_absolute() || base.empty() ? p : base / p;
}

double require_double(const std::string& key, const std::string& value) {
  const auto v = text::parse_double(value);
  if (!v) throw ValidationError("config: " + key + " expects a number, got '" + value + "'");
  return *v;
}

long long require_int(const std::string& key, const std::string& value, long long min) {
  const auto v = text::parse_int(value);
  if (!v || *v < min) {
    throw ValidationError("config: " + key + " expects an integer >= " + std::to_string(min) +
                          ", got '" + value + "'");
  }
  return *v;
}

bool require_bool(const std::string& key, const std::string& value) {
  if (value == "1" || value == "true") return true;
  if (value == "0" || value == "false") return false;
  throw ValidationError("config: " + key + " expects true/false, got '" + value + "'");
}

std::vector<std::size_t> require_sizes(const std::string& key, const std::string& value) {
  std::vector<std::size_t> out;
  for (const auto& part : split_list(value)) {
    out.push_back(static_cast<std::size_t>(require_int(key, part, 1)));
  }
  if (out.empty()) throw ValidationError("config: " + key + " is empty");
  return out;
}

void require_exists(const fs::path& p, const std::string& what) {
  if (!p.empty() && !fs::exists(p)) throw IoError(what + " not found: " + p.string());
}

}  // namespace

std::vector<std::pair<std::string, std::string>> parse_config_text(std::string_view contents,
                                                                   const std::string& source) {
  std::vector<std::pair<std::string, std::string>> out;
  const auto lines = text::split_lines(std::string(contents));
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::string_view line = lines[i];
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = text::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError(source, i + 1, "expected 'key = value'");
    const auto key = text::trim(line.substr(0, eq));
    if (key.empty()) throw ParseError(source, i + 1, "empty key");
    out.emplace_back(std::string(key), std::string(text::trim(line.substr(eq + 1))));
  }
  return out;
}

void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value,
                   const fs::path& base) {
  if (key == "registry") {
    cfg.registry = resolve(base, value);
  } else if (key.rfind("features.", 0) == 0) {
    const auto kind = feature_kind_from_string(key.substr(9));
    if (!kind) throw ValidationError("config: unknown feature kind in '" + key + "'");
    cfg.features[*kind] = resolve(base, value);
  } else if (key == "phylo") {
    cfg.phylo = resolve(base, value);
  } else if (key == "phylo_drop_roots") {
    const auto roots = split_list(value);
    cfg.phylo_drop_roots = {roots.begin(), roots.end()};
  } else if (key == "locations") {
    cfg.locations = resolve(base, value);
  } else if (key == "lexical_entries") {
    cfg.lexical_entries = resolve(base, value);
  } else if (key == "lexical_dissim") {
    cfg.lexical_dissim = resolve(base, value);
  } else if (key == "corpora") {
    cfg.corpora = resolve(base, value);
  } else if (key == "vocabulary") {
    cfg.vocabulary = resolve(base, value);
  } else if (key == "results") {
    cfg.results.clear();
    for (const auto& p : split_list(value)) cfg.results.push_back(resolve(base, p));
  } else if (key == "similarity_dir") {
    cfg.similarity_dir = resolve(base, value);
  } else if (key == "out_dir") {
    cfg.out_dir = resolve(base, value);
  } else if (key == "languages") {
    cfg.languages = split_list(value);
  } else if (key == "alpha") {
    cfg.alpha = require_double(key, value);
  } else if (key == "min_coverage") {
    cfg.min_coverage = require_double(key, value);
  } else if (key == "n_min") {
    cfg.n_min = static_cast<std::size_t>(require_int(key, value, 3));
  } else if (key == "top_k") {
    cfg.top_k = require_sizes(key, value);
  } else if (key == "seed") {
    const auto v = text::parse_int(value);
    if (!v || *v < 0) throw ValidationError("config: seed must be a non-negative integer");
    cfg.seed = static_cast<std::uint64_t>(*v);
  } else if (key == "experiment") {
    if (value.empty() || value.find_first_of("\t/") != std::string::npos) {
      throw ValidationError("config: experiment name must be non-empty without tabs or '/'");
    }
    cfg.experiment = value;
  } else if (key == "analyzer") {
    const auto a = analyzer_from_string(value);
    if (!a) throw ValidationError("config: analyzer must be char or char_wb");
    cfg.featurizer.analyzer = *a;
  } else if (key == "ngram_min") {
    cfg.featurizer.n_min = static_cast<int>(require_int(key, value, 1));
  } else if (key == "ngram_max") {
    cfg.featurizer.n_max = static_cast<int>(require_int(key, value, 1));
  } else if (key == "max_features") {
    if (value == "none") {
      cfg.featurizer.max_features.reset();
    } else {
      cfg.featurizer.max_features = static_cast<std::size_t>(require_int(key, value, 1));
    }
  } else if (key == "epochs") {
    cfg.training.epochs = static_cast<int>(require_int(key, value, 1));
  } else if (key == "hidden_layers") {
    cfg.training.hidden_layers = require_sizes(key, value);
  } else if (key == "batch_size") {
    cfg.training.batch_size = static_cast<std::size_t>(require_int(key, value, 1));
  } else if (key == "learning_rate") {
    cfg.training.learning_rate = require_double(key, value);
  } else if (key == "l2_penalty") {
    cfg.training.l2_penalty = require_double(key, value);
  } else if (key == "fit_predictors") {
    cfg.fit_predictors = split_list(value);
  } else if (key == "fit_same_script") {
    cfg.fit_same_script = require_bool(key, value);
  } else if (key == "fit_in_pretraining") {
    cfg.fit_in_pretraining = require_bool(key, value);
  } else if (key == "script_test") {
    cfg.script_test = require_bool(key, value);
  } else {
    throw ValidationError("config: unknown key '" + key + "'");
  }
}

RunConfig load_config(const fs::path& path) {
  RunConfig cfg;
  const auto base = path.parent_path();
  for (const auto& [k, v] : parse_config_text(text::read_file(path), path.string())) {
    apply_setting(cfg, k, v, base);
  }
  return cfg;
}

void RunConfig::validate() const {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ValidationError("config: alpha must lie in (0,1]");
  if (!(min_coverage >= 0.0 && min_coverage <= 1.0)) {
    throw ValidationError("config: min_coverage must lie in [0,1]");
  }
  if (n_min < 3) throw ValidationError("config: n_min must be at least 3");
  try {
    featurizer.validate();
    training.validate();
  } catch (const ContractViolation& e) {
    throw ValidationError(std::string("config: ") + e.what());
  }
  require_exists(registry, "registry");
  for (const auto& [kind, p] : features) require_exists(p, std::string(to_string(kind)) + " features");
  require_exists(phylo, "phylo paths");
  require_exists(locations, "locations");
  require_exists(lexical_entries, "lexical entries");
  require_exists(lexical_dissim, "lexical dissimilarities");
  if (lexical_entries.empty() != lexical_dissim.empty()) {
    throw ValidationError("config: lexical_entries and lexical_dissim go together");
  }
  require_exists(corpora, "corpora directory");
  require_exists(vocabulary, "vocabulary");
  for (const auto& p : results) require_exists(p, "results");
  require_exists(similarity_dir, "similarity directory");
}

// ---------------------------------------------------------------------------
// Shared loading helpers
// ---------------------------------------------------------------------------

namespace {

struct CorpusFiles {
  std::map<std::string, std::map<Split, fs::path>> labeled;
  std::map<std::string, std::map<Split, fs::path>> token;
};

CorpusFiles discover_corpora(const fs::path& dir) {
  CorpusFiles out;
  if (dir.empty()) return out;
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file()) files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    const auto parts = text::split(f.filename().string(), '.');
    if (parts.size() != 3) continue;
    const auto split = split_from_string(parts[1]);
    if (!split) continue;
    if (parts[2] == "tsv") out.labeled[parts[0]][*split] = f;
    if (parts[2] == "conllu") out.token[parts[0]][*split] = f;
  }
  return out;
}

bool selected(const RunConfig& cfg, const std::string& lang) {
  return cfg.languages.empty() ||
         std::find(cfg.languages.begin(), cfg.languages.end(), lang) != cfg.languages.end();
}

std::string file_key(const std::string& label) {
  std::string s = label;
  std::replace(s.begin(), s.end(), '/', '.');
  return s;
}

class Writer {
 public:
  explicit Writer(fs::path dir) : dir_(std::move(dir)) { fs::create_directories(dir_); }

  void write(const std::string& name, const std::string& contents) {
    text::write_file_atomic(dir_ / name, contents);
    written_.push_back((dir_ / name).string());
  }

  std::vector<std::string> done() { return std::move(written_); }

 private:
  fs::path dir_;
  std::vector<std::string> written_;
};

std::optional<Registry> maybe_registry(const RunConfig& cfg) {
  if (cfg.registry.empty()) return std::nullopt;
  return load_registry(cfg.registry);
}

std::vector<TransferResultMatrix> load_all_results(const RunConfig& cfg) {
  auto paths = cfg.results;
  if (paths.empty()) {
    const auto fallback = cfg.out_dir / "results.tsv";
    if (!fs::exists(fallback)) throw IoError("no results configured and " + fallback.string() + " missing");
    paths.push_back(fallback);
  }
  std::vector<TransferResultMatrix> all;
  std::set<std::string> labels;
  for (const auto& p : paths) {
    for (auto& m : load_results(p)) {
      if (!labels.insert(m.label()).second) {
        throw ValidationError("results: " + m.label() + " appears in more than one file");
      }
      all.push_back(std::move(m));
    }
  }
  return all;
}

// Similarity tables and the size attribute found in the similarity directory.
struct SelectorSet {
  std::vector<std::unique_ptr<SimilarityTable>> tables;
  std::unique_ptr<SourceAttribute> size;
  std::vector<analysis::Selector> selectors;

  const analysis::Selector* find(const std::string& name) const {
    for (const auto& s : selectors) {
      if (s.name == name) return &s;
    }
    return nullptr;
  }
};

SelectorSet load_selectors(const RunConfig& cfg) {
  SelectorSet set;
  const auto dir = cfg.similarity_dir.empty() ? cfg.out_dir : cfg.similarity_dir;
  if (!fs::exists(dir)) return set;
  for (Measure m : all_measures()) {
    const auto p = dir / ("similarity." + std::string(to_string(m)) + ".tsv");
    if (!fs::exists(p)) continue;
    set.tables.push_back(std::make_unique<SimilarityTable>(load_similarity_table(p)));
    if (set.tables.back()->measure() != m) {
      throw ValidationError(p.string() + ": holds measure " +
                            std::string(to_string(set.tables.back()->measure())));
    }
    set.selectors.push_back(analysis::make_selector(*set.tables.back()));
  }
  if (const auto p = dir / "size.tsv"; fs::exists(p)) {
    set.size = std::make_unique<SourceAttribute>(load_source_attribute(p));
    set.selectors.push_back(analysis::make_selector(*set.size));
  }
  return set;
}

std::vector<std::string> default_languages(const RunConfig& cfg, const Registry* registry,
                                           const std::vector<std::string>& from_data) {
  if (!cfg.languages.empty()) return cfg.languages;
  if (registry) return registry->ids();
  return from_data;
}

template <typename Map>
std::vector<std::string> keys_of(const Map& m) {
  std::vector<std::string> out;
  for (const auto& [k, v] : m) out.push_back(k);
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

std::vector<std::string> cmd_similarity(const RunConfig& cfg, const std::vector<std::string>& names) {
  const auto registry = maybe_registry(cfg);
  const Registry* reg = registry ? &*registry : nullptr;
  const auto corpora = discover_corpora(cfg.corpora);

  std::set<std::string> corpus_langs;
  for (const auto* group : {&corpora.labeled, &corpora.token}) {
    for (const auto& [lang, splits] : *group) {
      if (splits.count(Split::Train) && selected(cfg, lang)) corpus_langs.insert(lang);
    }
  }
  const bool all_tokenized = !corpus_langs.empty() && std::all_of(
      corpus_langs.begin(), corpus_langs.end(), [&](const auto& l) {
        return corpora.token.count(l) && corpora.token.at(l).count(Split::Train);
      });

  std::vector<std::string> wanted = names;
  if (wanted.empty()) {
    for (const auto& [kind, p] : cfg.features) wanted.emplace_back(to_string(measure_for(kind)));
    if (!cfg.phylo.empty()) wanted.emplace_back("gen");
    if (!cfg.locations.empty()) wanted.emplace_back("geo");
    if (!cfg.lexical_entries.empty()) wanted.emplace_back("lex");
    if (!corpus_langs.empty()) {
      wanted.insert(wanted.end(), {"chr", "tri", "size"});
      if (all_tokenized) wanted.emplace_back("wor");
      if (!cfg.vocabulary.empty()) wanted.emplace_back("swt");
    }
    if (wanted.empty()) throw ValidationError("similarity: no measure inputs configured");
  }

  // Unit sets are shared by the overlap measures, so corpora load once.
  std::map<std::string, TokenCorpus> token_train;
  std::map<std::string, LabeledTextCorpus> labeled_train;
  const auto load_corpora = [&]() {
    if (!token_train.empty() || !labeled_train.empty()) return;
    if (corpus_langs.empty()) throw ValidationError("similarity: no training corpora found");
    for (const auto& lang : corpus_langs) {
      if (corpora.token.count(lang) && corpora.token.at(lang).count(Split::Train)) {
        token_train.emplace(lang, load_token_corpus(corpora.token.at(lang).at(Split::Train), lang));
      } else {
        labeled_train.emplace(
            lang, load_labeled_corpus(corpora.labeled.at(lang).at(Split::Train), lang, Split::Train));
      }
    }
  };
  std::optional<std::set<std::string>> vocab;

  Writer w(cfg.out_dir);
  for (const auto& name : wanted) {
    if (name == "size") {
      load_corpora();
      SourceAttribute attr;
      for (const auto& [lang, c] : token_train) attr.values[lang] = static_cast<double>(training_size(c));
      for (const auto& [lang, c] : labeled_train) {
        attr.values[lang] = static_cast<double>(training_size(c));
      }
      w.write("size.tsv", emit_source_attribute(attr));
      continue;
    }
    const auto measure = measure_from_string(name);
    if (!measure) throw ValidationError("similarity: unknown measure '" + name + "'");
    SimilarityTable table;
    switch (*measure) {
      case Measure::Gb:
      case Measure::Syn:
      case Measure::Pho:
      case Measure::Inv: {
        const auto kind = static_cast<FeatureKind>(static_cast<int>(*measure));
        const auto it = cfg.features.find(kind);
        if (it == cfg.features.end()) throw ValidationError("similarity: no features." + name + " configured");
        const auto matrix = load_feature_matrix(it->second, kind, reg);
        table = build_gower_table(*measure, matrix, default_languages(cfg, reg, keys_of(matrix.rows)),
                                  cfg.min_coverage, reg);
        break;
      }
      case Measure::Gen: {
        if (cfg.phylo.empty()) throw ValidationError("similarity: no phylo configured");
        const auto index = load_phylo_paths(cfg.phylo, cfg.phylo_drop_roots);
        table = build_phylo_table(index, default_languages(cfg, reg, keys_of(index.paths)), reg);
        break;
      }
      case Measure::Geo: {
        if (cfg.locations.empty()) throw ValidationError("similarity: no locations configured");
        const auto locs = load_locations(cfg.locations);
        table = build_geo_table(locs, default_languages(cfg, reg, keys_of(locs.vectors)), reg);
        break;
      }
      case Measure::Lex: {
        if (cfg.lexical_entries.empty()) throw ValidationError("similarity: no lexical tables configured");
        const auto lex = load_lexical_table(cfg.lexical_entries, cfg.lexical_dissim);
        std::set<std::string> langs;
        for (const auto& [e, l] : lex.entry_lang) langs.insert(l);
        table = build_lexical_table(lex, default_languages(cfg, reg, {langs.begin(), langs.end()}), reg);
        break;
      }
      case Measure::Chr:
      case Measure::Wor:
      case Measure::Tri:
      case Measure::Swt: {
        load_corpora();
        const UnitLevel level = *measure == Measure::Chr   ? UnitLevel::Char
                                : *measure == Measure::Wor ? UnitLevel::Word
                                : *measure == Measure::Tri ? UnitLevel::Trigram
                                                           : UnitLevel::Subword;
        if (level == UnitLevel::Subword && !vocab) {
          if (cfg.vocabulary.empty()) throw ValidationError("similarity: swt needs a vocabulary");
          vocab = load_vocabulary(cfg.vocabulary);
        }
        const auto* v = vocab ? &*vocab : nullptr;
        std::map<std::string, UnitSet> units;
        for (const auto& [lang, c] : token_train) units[lang] = extract_units(c, level, v);
        for (const auto& [lang, c] : labeled_train) units[lang] = extract_units(c, level, v);
        table = build_overlap_table(*measure, units);
        break;
      }
    }
    w.write("similarity." + name + ".tsv", emit_similarity_table(table));
  }
  return w.done();
}

std::vector<std::string> cmd_train_matrix(const RunConfig& cfg) {
  const auto corpora = discover_corpora(cfg.corpora);
  std::vector<LanguageSplits> splits;
  for (const auto& [lang, files] : corpora.labeled) {
    if (!selected(cfg, lang)) continue;
    if (!files.count(Split::Train) || !files.count(Split::Test)) {
      throw ValidationError("train-matrix: " + lang + " needs both train and test splits");
    }
    splits.push_back({lang, load_labeled_corpus(files.at(Split::Train), lang, Split::Train),
                      load_labeled_corpus(files.at(Split::Test), lang, Split::Test)});
  }
  if (splits.empty()) throw ValidationError("train-matrix: no labeled corpora found");
  TrainConfig tcfg = cfg.training;
  tcfg.seed = cfg.seed;
  const auto matrix = build_transfer_matrix(splits, cfg.featurizer, tcfg, cfg.experiment);
  Writer w(cfg.out_dir);
  w.write("results.tsv", emit_results({matrix}));
  return w.done();
}

std::vector<std::string> cmd_correlate(const RunConfig& cfg) {
  const auto results = load_all_results(cfg);
  const auto selectors = load_selectors(cfg);
  if (selectors.selectors.empty()) throw ValidationError("correlate: no similarity tables found");
  const auto registry = maybe_registry(cfg);

  std::vector<analysis::CorrelationTable> tables;
  std::string aggregates;
  bool header = true;
  for (const auto& m : results) {
    tables.push_back(analysis::per_target_correlations(m, selectors.selectors, cfg.alpha, cfg.n_min));
    aggregates += analysis::emit_aggregates(m.label(), "all",
                                            analysis::aggregate_correlations(tables.back()), header);
    header = false;
    if (registry) {
      for (bool flag : {true, false}) {
        aggregates += analysis::emit_aggregates(
            m.label(), flag ? "pretrained" : "unseen",
            analysis::aggregate_correlations(tables.back(), analysis::LanguageFilter{&*registry, flag}),
            false);
      }
    }
  }
  Writer w(cfg.out_dir);
  w.write("correlations.tsv", analysis::emit_correlations(tables));
  w.write("aggregates.tsv", aggregates);
  if (selectors.tables.size() >= 2) {
    std::vector<SimilarityTable> plain;
    for (const auto& t : selectors.tables) plain.push_back(*t);
    w.write("intercorrelations.tsv",
            analysis::emit_intercorrelations(analysis::measure_intercorrelations(plain, cfg.alpha)));
  }
  return w.done();
}

std::vector<std::string> cmd_select(const RunConfig& cfg) {
  const auto results = load_all_results(cfg);
  const auto selectors = load_selectors(cfg);
  Writer w(cfg.out_dir);
  for (const auto& m : results) {
    std::vector<analysis::LossTable> by_measure;
    for (const auto& sel : selectors.selectors) {
      for (auto k : cfg.top_k) by_measure.push_back(analysis::selection_loss(m, sel, k));
    }
    if (!by_measure.empty()) {
      w.write("losses." + file_key(m.label()) + ".tsv", analysis::emit_losses(by_measure));
    }
    std::vector<analysis::LossTable> cross;
    for (const auto& other : results) {
      if (other.label() == m.label()) continue;
      for (auto k : cfg.top_k) {
        try {
          cross.push_back(analysis::cross_experiment_loss(m, other, k));
        } catch (const ContractViolation&) {
          break;  // no shared cells with this experiment
        }
      }
    }
    if (!cross.empty()) {
      w.write("losses.cross." + file_key(m.label()) + ".tsv", analysis::emit_losses(cross));
    }
  }
  if (selectors.selectors.empty() && results.size() < 2) {
    throw ValidationError("select: no similarity tables and no second experiment to select by");
  }
  return w.done();
}

std::vector<std::string> cmd_evaluate(const RunConfig& cfg, const std::string& task,
                                      const fs::path& gold, const fs::path& pred,
                                      const std::string& train_lang, const std::string& test_lang) {
  require_exists(gold, "gold file");
  require_exists(pred, "prediction file");
  std::vector<MetricRow> rows;
  if (task == "pos" || task == "dep") {
    const auto g = load_token_corpus(gold, test_lang);
    const auto p = load_token_corpus(pred, test_lang);
    if (task == "pos") {
      rows.push_back({pos_accuracy(g, p), train_lang, test_lang});
    } else {
      const auto a = attachment_scores(g, p);
      rows.push_back({a.uas, train_lang, test_lang});
      rows.push_back({a.las, train_lang, test_lang});
    }
  } else if (task == "topic") {
    const auto g = load_labeled_corpus(gold, test_lang, Split::Test);
    rows.push_back({topic_accuracy(g, load_label_lines(pred)), train_lang, test_lang});
  } else {
    throw ContractViolation("evaluate: unknown task '" + task + "'");
  }
  Writer w(cfg.out_dir);
  w.write("metrics." + task + "." + train_lang + "." + test_lang + ".tsv", emit_metric_report(rows));
  return w.done();
}

std::vector<std::string> cmd_report(const RunConfig& cfg) {
  const auto results = load_all_results(cfg);
  const auto registry = maybe_registry(cfg);
  Writer w(cfg.out_dir);
  std::vector<analysis::WithinAcross> summary;
  for (const auto& m : results) {
    const auto h = analysis::heatmap_order(m);
    w.write("heatmap." + file_key(m.label()) + ".tsv", analysis::emit_heatmap(h));
    w.write("order." + file_key(m.label()) + ".txt", analysis::emit_order(h));
    summary.push_back(analysis::within_across_summary(m, analysis::SummaryLevel::Dataset));
    summary.push_back(analysis::within_across_summary(m, analysis::SummaryLevel::Language));
  }
  w.write("summary.tsv", analysis::emit_summary(summary));

  if (cfg.script_test) {
    if (!registry) throw ValidationError("report: script_test needs a registry");
    std::string out = "experiment\tD\tp\tn_same\tn_different\n";
    for (const auto& m : results) {
      const auto s = analysis::script_partition_test(m, *registry);
      out += m.label() + '\t' + text::format_fixed(s.ks.statistic, 6) + '\t' +
             text::format_fixed(s.ks.p_value, 6) + '\t' + std::to_string(s.n_same) + '\t' +
             std::to_string(s.n_different) + '\n';
    }
    w.write("script_ks.tsv", out);
  }

  if (!cfg.fit_predictors.empty() || cfg.fit_same_script || cfg.fit_in_pretraining) {
    const auto selectors = load_selectors(cfg);
    std::vector<analysis::Selector> chosen;
    for (const auto& name : cfg.fit_predictors) {
      const auto* s = selectors.find(name);
      if (!s) throw ValidationError("report: no similarity table for predictor '" + name + "'");
      chosen.push_back(*s);
    }
    analysis::FitOptions opts{cfg.fit_same_script, cfg.fit_in_pretraining,
                              registry ? &*registry : nullptr};
    std::vector<analysis::FitReport> fits;
    for (const auto& m : results) fits.push_back(analysis::multi_predictor_fit(m, chosen, opts));
    w.write("fit.tsv", analysis::emit_fit(fits));
  }
  return w.done();
}

// ---------------------------------------------------------------------------
// Entry point
// ---------------------------------------------------------------------------

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"langsim: language similarity measures versus cross-lingual transfer results"};
  app.name("langsim");
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::vector<std::pair<std::string, std::string>> overrides;
  const auto flag = [&](const std::string& name, const std::string& key, const std::string& help) {
    app.add_option_function<std::string>(
        name, [&overrides, key](const std::string& v) { overrides.emplace_back(key, v); }, help);
  };
  app.add_option("-c,--config", config_path, "Config file of `key = value` lines")
      ->check(CLI::ExistingFile);
  flag("--registry", "registry", "Language registry TSV");
  flag("--results", "results", "Comma-separated results TSVs");
  flag("--corpora", "corpora", "Directory of <lang>.<split>.tsv|conllu corpora");
  flag("-o,--out", "out_dir", "Output directory");
  flag("--alpha", "alpha", "Significance level; p >= alpha counts as 0 (default 0.05)");
  flag("--min-coverage", "min_coverage", "Minimum Gower feature coverage (default 0.5)");
  flag("--n-min", "n_min", "Minimum source languages per correlation (default 3)");
  flag("--top-k", "top_k", "Comma-separated k values for source selection (default 1,3)");
  flag("--seed", "seed", "Seed for every random stream (default 0)");
  flag("--languages", "languages", "Comma-separated language subset");
  std::vector<std::string> sets;
  app.add_option("--set", sets, "Any config key as key=value; repeatable");

  auto* sim = app.add_subcommand("similarity", "Write similarity tables");
  std::vector<std::string> measures;
  std::vector<std::string> measure_names{"size"};
  for (Measure m : all_measures()) measure_names.emplace_back(to_string(m));
  sim->add_option("-m,--measure", measures, "Measure(s) to compute; default all configured")
      ->check(CLI::IsMember(measure_names));

  auto* train = app.add_subcommand("train-matrix", "Train topic classifiers, write results.tsv");
  auto* corr = app.add_subcommand("correlate", "Per-target correlations and aggregates");
  auto* sel = app.add_subcommand("select", "Source-selection losses");
  auto* rep = app.add_subcommand("report", "Heatmaps, orders and within/across summaries");
  auto* pipe = app.add_subcommand("pipeline", "similarity, train-matrix, correlate, select, report");

  auto* eval = app.add_subcommand("evaluate", "Score predictions against gold data");
  std::string task;
  std::string gold;
  std::string pred;
  std::string train_lang;
  std::string test_lang;
  eval->add_option("--task", task, "pos, dep or topic")
      ->required()
      ->check(CLI::IsMember({"pos", "dep", "topic"}));
  eval->add_option("--gold", gold, "Gold corpus")->required();
  eval->add_option("--pred", pred, "Predicted corpus (topic: one label per line)")->required();
  eval->add_option("--train-lang", train_lang, "Training language tag")->required();
  eval->add_option("--test-lang", test_lang, "Test language tag")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return 2;
  }

  try {
    RunConfig cfg = config_path.empty() ? RunConfig{} : load_config(config_path);
    for (const auto& [k, v] : overrides) apply_setting(cfg, k, v, {});
    for (const auto& s : sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos) {
        err << "error: usage: --set expects key=value, got '" << s << "'\n";
        return 2;
      }
      apply_setting(cfg, std::string(text::trim(s.substr(0, eq))),
                    std::string(text::trim(s.substr(eq + 1))), {});
    }
    cfg.validate();

    std::vector<std::string> written;
    const auto append = [&](std::vector<std::string> more) {
      written.insert(written.end(), more.begin(), more.end());
    };
    if (*sim) {
      append(cmd_similarity(cfg, measures));
    } else if (*train) {
      append(cmd_train_matrix(cfg));
    } else if (*corr) {
      append(cmd_correlate(cfg));
    } else if (*sel) {
      append(cmd_select(cfg));
    } else if (*rep) {
      append(cmd_report(cfg));
    } else if (*eval) {
      append(cmd_evaluate(cfg, task, gold, pred, train_lang, test_lang));
    } else if (*pipe) {
      append(cmd_similarity(cfg, {}));
      if (cfg.results.empty()) {
        append(cmd_train_matrix(cfg));
      }
      append(cmd_correlate(cfg));
      append(cmd_select(cfg));
      append(cmd_report(cfg));
    }
    for (const auto& f : written) out << f << '\n';
    return 0;
  } catch (const Error& e) {
    std::string msg = e.what();
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    err << "error: " << e.kind() << ": " << msg << '\n';
    return 1;
  } catch (const fs::filesystem_error& e) {
    err << "error: io: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: internal: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace langsim::cli
