#pragma once

// Pairwise language similarity measures and the tables that hold them.

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "langsim/lingdata.hpp"

namespace langsim {

enum class Measure { Gb, Syn, Pho, Inv, Lex, Gen, Geo, Chr, Wor, Tri, Swt };

std::string_view to_string(Measure m);
std::optional<Measure> measure_from_string(std::string_view s);
const std::vector<Measure>& all_measures();

/// gb/syn/pho/inv are Gower coefficients over categorical features.
bool is_gower(Measure m);
Measure measure_for(FeatureKind kind);

// ---------------------------------------------------------------------------
// Measures
// ---------------------------------------------------------------------------

inline constexpr double kDefaultMinCoverage = 0.5;

struct GowerResult {
  double similarity;
  double coverage;  // attested features / all features
};

/// Mean exact-match agreement over the features present in both vectors.
/// Absent when fewer than `min_coverage` of all features are attested in
/// both (or none are). Tokens are compared as trimmed strings; numeric-looking
/// values get no tolerance.
std::optional<GowerResult> gower_similarity(std::span<const std::optional<std::string>> a,
                                            std::span<const std::optional<std::string>> b,
                                            double min_coverage = kDefaultMinCoverage);

/// Shared root-first prefix length over the longer path length. Absent when
/// either language has no path.
std::optional<double> phylo_relatedness(std::string_view a, std::string_view b,
                                        const PhyloIndex& index);

/// 1 - euclidean / sqrt(d), clamped to [0,1].
double geo_proximity(const LocationVector& a, const LocationVector& b);

/// Mean of (1 - dissimilarity) over all recorded entry pairs of the two languages.
std::optional<double> lexical_similarity(std::string_view a, std::string_view b,
                                         const LexicalEntryTable& table);

enum class UnitLevel { Char, Word, Trigram, Subword };

using UnitSet = std::set<std::string>;

/// Greedy longest-match segmentation; characters not covered by any
/// vocabulary entry become `<unk>`.
std::vector<std::string> segment_subwords(std::string_view word, const std::set<std::string>& vocab);

/// Unit inventories. Char units exclude whitespace; trigram units are taken
/// per text line (a sentence's space-joined forms for token corpora).
UnitSet extract_units(const TokenCorpus& corpus, UnitLevel level,
                      const std::set<std::string>* vocab = nullptr);
/// Word level needs gold tokenization and is rejected here.
UnitSet extract_units(const LabeledTextCorpus& corpus, UnitLevel level,
                      const std::set<std::string>* vocab = nullptr);

/// |a ∩ b| / |a ∪ b|; two empty sets give 0.
double jaccard(const UnitSet& a, const UnitSet& b);

std::size_t training_size(const TokenCorpus& corpus);
std::size_t training_size(const LabeledTextCorpus& corpus);

// ---------------------------------------------------------------------------
// Tables
// ---------------------------------------------------------------------------

/// Symmetric partial map over unordered pairs of distinct languages.
class SimilarityTable {
 public:
  using Key = std::pair<std::string, std::string>;  // first < second

  SimilarityTable() = default;
  explicit SimilarityTable(Measure measure) : measure_(measure) {}

  Measure measure() const noexcept { return measure_; }

  /// Value must lie in [0,1]; a == b is rejected.
  void set(const std::string& a, const std::string& b, double value,
           std::optional<double> coverage = std::nullopt);

  std::optional<double> value(const std::string& a, const std::string& b) const;
  std::optional<double> coverage(const std::string& a, const std::string& b) const;

  /// Lookup by dataset tags: exact tags first, then their base languages.
  std::optional<double> value_for_tags(const std::string& a, const std::string& b) const;

  const std::map<Key, double>& values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }

  std::optional<double> mean_coverage() const;

  static Key key(const std::string& a, const std::string& b);

 private:
  Measure measure_ = Measure::Gb;
  std::map<Key, double> values_;
  std::map<Key, double> coverage_;
};

/// Per-source attribute (`size`: number of training sentences).
struct SourceAttribute {
  std::string measure = "size";
  std::map<std::string, double> values;

  std::optional<double> value_for_tag(const std::string& tag) const;
};

/// `languages` lists the languages to pair up. With a registry, a language
/// missing from the input data borrows its macrolanguage's entry.
SimilarityTable build_gower_table(Measure measure, const FeatureMatrix& matrix,
                                  const std::vector<std::string>& languages,
                                  double min_coverage = kDefaultMinCoverage,
                                  const Registry* registry = nullptr);
SimilarityTable build_phylo_table(const PhyloIndex& index, const std::vector<std::string>& languages,
                                  const Registry* registry = nullptr);
SimilarityTable build_geo_table(const LocationTable& locations,
                                const std::vector<std::string>& languages,
                                const Registry* registry = nullptr);
SimilarityTable build_lexical_table(const LexicalEntryTable& lexicon,
                                    const std::vector<std::string>& languages,
                                    const Registry* registry = nullptr);
/// chr/wor/tri/swt from per-language unit sets.
SimilarityTable build_overlap_table(Measure measure, const std::map<std::string, UnitSet>& units);

/// Everything a table might need; unused members stay null.
struct SimilarityInputs {
  const FeatureMatrix* features = nullptr;
  const PhyloIndex* phylo = nullptr;
  const LocationTable* locations = nullptr;
  const LexicalEntryTable* lexicon = nullptr;
  const std::map<std::string, UnitSet>* units = nullptr;
};

/// Dispatches on `measure`; throws ContractViolation when the required input
/// is missing or of the wrong kind.
SimilarityTable build_similarity_table(Measure measure, const SimilarityInputs& inputs,
                                       const std::vector<std::string>& languages,
                                       double min_coverage = kDefaultMinCoverage,
                                       const Registry* registry = nullptr);

/// TSV `measure\tlang_a\tlang_b\tvalue\tcoverage`, sorted, 6 decimals,
/// coverage `NA` for non-Gower measures.
std::string emit_similarity_table(const SimilarityTable& table);
SimilarityTable parse_similarity_table(std::string_view contents,
                                       const std::string& source = "<similarity>");
SimilarityTable load_similarity_table(const std::filesystem::path& path);

/// TSV `size\tlang\tcount`.
std::string emit_source_attribute(const SourceAttribute& attr);
SourceAttribute parse_source_attribute(std::string_view contents,
                                       const std::string& source = "<size>");
SourceAttribute load_source_attribute(const std::filesystem::path& path);

}  // namespace langsim
