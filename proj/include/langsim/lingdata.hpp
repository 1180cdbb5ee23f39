#pragma once

// Core data model and canonical file formats.
//
// Every loader comes in two flavours: parse_* works on in-memory contents
// (the `source` string is only used in error messages) and load_* reads a
// file first. Emitters write the canonical form: sorted keys, '\n' line
// endings, so that emit(load(f)) == f for canonical inputs.

#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace langsim {

// ---------------------------------------------------------------------------
// Language identity
// ---------------------------------------------------------------------------

/// Language tags name a language (`deu`) or a dataset of one (`zho_Hans`,
/// `deu-gsd`). The language is always the leading ISO-639-3 code.
std::string base_language(std::string_view tag);

/// Script subtag of a dataset tag such as `zho_Hans`, if present.
std::optional<std::string> tag_script(std::string_view tag);

bool is_language_code(std::string_view s);
bool is_script_code(std::string_view s);

struct LanguageRecord {
  std::string id;
  std::optional<std::string> script;
  std::optional<std::string> macro_id;
  std::optional<bool> in_pretraining;

  bool operator==(const LanguageRecord&) const = default;
};

class Registry {
 public:
  Registry() = default;

  /// Validates the records; throws ValidationError on duplicates, dangling
  /// macro_id or fallback chains longer than one step.
  explicit Registry(std::vector<LanguageRecord> records);

  const std::vector<LanguageRecord>& records() const noexcept { return records_; }
  bool empty() const noexcept { return records_.empty(); }

  bool contains(std::string_view id) const;

  /// First record with this id (and script, when given).
  const LanguageRecord* find(std::string_view id,
                             std::optional<std::string_view> script = std::nullopt) const;

  /// Macrolanguage of `id`, if declared.
  std::optional<std::string> fallback(std::string_view id) const;

  /// Returns `id` if `has(id)`, otherwise its macrolanguage if `has(macro)`.
  /// Fallback is consulted only after the exact lookup fails.
  std::optional<std::string> resolve(std::string_view id,
                                     const std::function<bool(const std::string&)>& has) const;

  /// Script of a dataset tag: its explicit subtag, else the registered script
  /// of its base language.
  std::optional<std::string> script_of(std::string_view tag) const;

  std::optional<bool> in_pretraining(std::string_view tag) const;

  /// Sorted unique language ids.
  std::vector<std::string> ids() const;

 private:
  std::vector<LanguageRecord> records_;
};

Registry parse_registry(std::string_view contents, const std::string& source = "<registry>");
Registry load_registry(const std::filesystem::path& path);
std::string emit_registry(const Registry& registry);

// ---------------------------------------------------------------------------
// Typological features
// ---------------------------------------------------------------------------

enum class FeatureKind { Gb, Syn, Pho, Inv };

std::string_view to_string(FeatureKind kind);
std::optional<FeatureKind> feature_kind_from_string(std::string_view s);

using FeatureVector = std::vector<std::optional<std::string>>;

struct FeatureMatrix {
  FeatureKind kind = FeatureKind::Gb;
  std::vector<std::string> features;
  std::map<std::string, FeatureVector> rows;

  const FeatureVector* row(std::string_view lang) const;
  std::size_t missing_count() const;
};

/// When `registry` is non-null, every row language must be registered.
FeatureMatrix parse_feature_matrix(std::string_view contents, FeatureKind kind,
                                   const Registry* registry = nullptr,
                                   const std::string& source = "<features>");
FeatureMatrix load_feature_matrix(const std::filesystem::path& path, FeatureKind kind,
                                  const Registry* registry = nullptr);
std::string emit_feature_matrix(const FeatureMatrix& matrix);

// ---------------------------------------------------------------------------
// Phylogeny, geography, lexicon
// ---------------------------------------------------------------------------

struct PhyloIndex {
  /// Root-first node paths; the last node is the language itself.
  std::map<std::string, std::vector<std::string>> paths;

  const std::vector<std::string>* path(std::string_view lang) const;
};

/// Paths whose first node is in `drop_roots` lose that node (constructed
/// languages hang below an umbrella root that carries no relatedness).
PhyloIndex parse_phylo_paths(std::string_view contents,
                             const std::set<std::string>& drop_roots = {},
                             const std::string& source = "<phylo>");
PhyloIndex load_phylo_paths(const std::filesystem::path& path,
                            const std::set<std::string>& drop_roots = {});
std::string emit_phylo_paths(const PhyloIndex& index);

struct LocationVector {
  std::string lang;
  std::vector<double> coords;
};

struct LocationTable {
  std::size_t dimension = 0;
  std::vector<std::string> columns;  // header names after `language`
  std::map<std::string, LocationVector> vectors;

  const LocationVector* find(std::string_view lang) const;
};

LocationTable parse_locations(std::string_view contents, const std::string& source = "<locations>");
LocationTable load_locations(const std::filesystem::path& path);
std::string emit_locations(const LocationTable& table);

struct LexicalEntryTable {
  std::map<std::string, std::string> entry_lang;
  /// Keyed by (smaller id, larger id).
  std::map<std::pair<std::string, std::string>, double> dissim;

  std::vector<std::string> entries_of(std::string_view lang) const;
  std::optional<double> dissimilarity(const std::string& a, const std::string& b) const;
};

LexicalEntryTable parse_lexical_table(std::string_view entries, std::string_view dissim,
                                      const std::string& source = "<lexical>");
LexicalEntryTable load_lexical_table(const std::filesystem::path& entries_path,
                                     const std::filesystem::path& dissim_path);
std::string emit_lexical_entries(const LexicalEntryTable& table);
std::string emit_lexical_dissim(const LexicalEntryTable& table);

// ---------------------------------------------------------------------------
// Corpora
// ---------------------------------------------------------------------------

struct Token {
  std::string form;
  std::optional<std::string> upos;
  std::optional<int> head;  // 0 = root
  std::optional<std::string> deprel;

  bool operator==(const Token&) const = default;
};

struct Sentence {
  std::vector<Token> tokens;

  bool annotated() const { return !tokens.empty() && tokens.front().head.has_value(); }
  /// Forms joined by single spaces.
  std::string text() const;
};

struct TokenCorpus {
  std::string lang;
  std::vector<Sentence> sentences;

  std::size_t token_count() const;
};

/// CoNLL-U subset: ID, FORM, UPOS, HEAD and DEPREL are read; multiword ranges
/// and empty nodes are skipped.
TokenCorpus parse_token_corpus(std::string_view contents, std::string lang,
                               const std::string& source = "<conllu>");
TokenCorpus load_token_corpus(const std::filesystem::path& path, std::string lang);
std::string emit_token_corpus(const TokenCorpus& corpus);

enum class Split { Train, Dev, Test };

std::string_view to_string(Split split);
std::optional<Split> split_from_string(std::string_view s);

struct LabeledItem {
  std::string label;
  std::string text;

  bool operator==(const LabeledItem&) const = default;
};

struct LabeledTextCorpus {
  std::string lang;
  Split split = Split::Train;
  std::vector<std::string> labels;  // declared order
  std::vector<LabeledItem> items;

  std::vector<std::string> texts() const;
  std::vector<std::string> gold_labels() const;
};

LabeledTextCorpus parse_labeled_corpus(std::string_view contents, std::string lang, Split split,
                                       const std::string& source = "<labeled>");
LabeledTextCorpus load_labeled_corpus(const std::filesystem::path& path, std::string lang,
                                      Split split);
std::string emit_labeled_corpus(const LabeledTextCorpus& corpus);

/// One predicted label per line.
std::vector<std::string> load_label_lines(const std::filesystem::path& path);

/// Subword vocabulary: one token per line.
std::set<std::string> load_vocabulary(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Transfer results
// ---------------------------------------------------------------------------

struct TransferResultMatrix {
  std::string experiment;
  std::string metric;
  /// (train language, test language) -> score in percent.
  std::map<std::pair<std::string, std::string>, double> scores;

  std::optional<double> score(const std::string& train, const std::string& test) const;
  std::vector<std::string> train_languages() const;
  std::vector<std::string> test_languages() const;
  /// `experiment/metric`, used as a key in reports.
  std::string label() const;
};

/// Groups rows by (experiment, metric), returned in sorted order. Rows may
/// omit the metric column, in which case the metric is `score`. A header row
/// starting with `experiment` is optional.
std::vector<TransferResultMatrix> parse_results(std::string_view contents,
                                                const std::string& source = "<results>");
std::vector<TransferResultMatrix> load_results(const std::filesystem::path& path);
std::string emit_results(const std::vector<TransferResultMatrix>& matrices);

}  // namespace langsim
