#pragma once

// Batch command-line front end. Every command reads one RunConfig and writes
// its outputs atomically under `out_dir`.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "langsim/lingdata.hpp"
#include "langsim/ngram_classifier.hpp"
#include "langsim/similarity.hpp"

namespace langsim::cli {

struct RunConfig {
  std::filesystem::path registry;
  std::map<FeatureKind, std::filesystem::path> features;
  std::filesystem::path phylo;
  std::set<std::string> phylo_drop_roots;
  std::filesystem::path locations;
  std::filesystem::path lexical_entries;
  std::filesystem::path lexical_dissim;
  /// Directory of `<lang>.<split>.tsv` labeled corpora and/or
  /// `<lang>.<split>.conllu` token corpora.
  std::filesystem::path corpora;
  std::filesystem::path vocabulary;
  std::vector<std::filesystem::path> results;
  /// Where `correlate`/`select` look for similarity tables; defaults to out_dir.
  std::filesystem::path similarity_dir;
  std::filesystem::path out_dir = "out";
  std::vector<std::string> languages;

  double alpha = 0.05;
  double min_coverage = kDefaultMinCoverage;
  std::size_t n_min = 3;
  std::vector<std::size_t> top_k{1, 3};
  std::uint64_t seed = 0;

  std::string experiment = "topics-base";
  FeaturizerConfig featurizer;
  TrainConfig training;

  std::vector<std::string> fit_predictors;
  bool fit_same_script = false;
  bool fit_in_pretraining = false;
  bool script_test = false;

  /// Every configured path exists; numeric settings are in range.
  void validate() const;
};

/// `key = value` lines; `#` starts a comment. Returns the raw pairs in file
/// order. Throws ParseError on malformed lines.
std::vector<std::pair<std::string, std::string>> parse_config_text(std::string_view contents,
                                                                   const std::string& source);

/// Applies one setting; relative paths are resolved against `base`. Throws
/// ValidationError for unknown keys or bad values.
void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value,
                   const std::filesystem::path& base);

RunConfig load_config(const std::filesystem::path& path);

std::vector<std::string> cmd_similarity(const RunConfig& cfg, const std::vector<std::string>& measures);
std::vector<std::string> cmd_train_matrix(const RunConfig& cfg);
std::vector<std::string> cmd_correlate(const RunConfig& cfg);
std::vector<std::string> cmd_select(const RunConfig& cfg);
/// `task` is `pos`, `dep` or `topic`.
std::vector<std::string> cmd_evaluate(const RunConfig& cfg, const std::string& task,
                                      const std::filesystem::path& gold,
                                      const std::filesystem::path& pred,
                                      const std::string& train_lang, const std::string& test_lang);
std::vector<std::string> cmd_report(const RunConfig& cfg);

/// Entry point: 0 success, 1 domain error (one `error: <kind>: <message>`
/// line on `err`), 2 usage error.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace langsim::cli
