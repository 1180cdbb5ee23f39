#include "langsim/similarity.hpp"

#include <algorithm>
#include <cmath>

#include "langsim/error.hpp"
#include "langsim/text.hpp"

namespace langsim {

std::string_view to_string(Measure m) {
  switch (m) {
    case Measure::Gb: return "gb";
    case Measure::Syn: return "syn";
    case Measure::Pho: return "pho";
    case Measure::Inv: return "inv";
    case Measure::Lex: return "lex";
    case Measure::Gen: return "gen";
    case Measure::Geo: return "geo";
    case Measure::Chr: return "chr";
    case Measure::Wor: return "wor";
    case Measure::Tri: return "tri";
    case Measure::Swt: return "swt";
  }
  return "?";
}

const std::vector<Measure>& all_measures() {
  static const std::vector<Measure> kAll = {Measure::Gb,  Measure::Syn, Measure::Pho, Measure::Inv,
                                            Measure::Lex, Measure::Gen, Measure::Geo, Measure::Chr,
                                            Measure::Wor, Measure::Tri, Measure::Swt};
  return kAll;
}

std::optional<Measure> measure_from_string(std::string_view s) {
  for (auto m : all_measures()) {
    if (to_string(m) == s) return m;
  }
  return std::nullopt;
}

bool is_gower(Measure m) {
  return m == Measure::Gb || m == Measure::Syn || m == Measure::Pho || m == Measure::Inv;
}

Measure measure_for(FeatureKind kind) {
  switch (kind) {
    case FeatureKind::Gb: return Measure::Gb;
    case FeatureKind::Syn: return Measure::Syn;
    case FeatureKind::Pho: return Measure::Pho;
    case FeatureKind::Inv: return Measure::Inv;
  }
  return Measure::Gb;
}

// ---------------------------------------------------------------------------
// Measures
// ---------------------------------------------------------------------------

std::optional<GowerResult> gower_similarity(std::span<const std::optional<std::string>> a,
                                            std::span<const std::optional<std::string>> b,
                                            double min_coverage) {
  if (a.size() != b.size()) {
    throw ContractViolation("gower_similarity: vectors of length " + std::to_string(a.size()) +
                            " and " + std::to_string(b.size()));
  }
  if (min_coverage < 0.0 || min_coverage > 1.0) {
    throw ContractViolation("gower_similarity: min_coverage outside [0,1]");
  }
  std::size_t attested = 0;
  std::size_t matches = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!a[i] || !b[i]) continue;
    ++attested;
    if (text::trim(*a[i]) == text::trim(*b[i])) ++matches;
  }
  if (attested == 0) return std::nullopt;
  const double coverage = static_cast<double>(attested) / static_cast<double>(a.size());
  if (coverage < min_coverage) return std::nullopt;
  return GowerResult{static_cast<double>(matches) / static_cast<double>(attested), coverage};
}

std::optional<double> phylo_relatedness(std::string_view a, std::string_view b,
                                        const PhyloIndex& index) {
  const auto* pa = index.path(a);
  const auto* pb = index.path(b);
  if (!pa || !pb || pa->empty() || pb->empty()) return std::nullopt;
  const auto [ia, ib] = std::mismatch(pa->begin(), pa->end(), pb->begin(), pb->end());
  const auto shared = static_cast<double>(ia - pa->begin());
  return shared / static_cast<double>(std::max(pa->size(), pb->size()));
}

double geo_proximity(const LocationVector& a, const LocationVector& b) {
  if (a.coords.size() != b.coords.size() || a.coords.empty()) {
    throw ContractViolation("geo_proximity: dimension mismatch for " + a.lang + "/" + b.lang);
  }
  double sq = 0.0;
  for (std::size_t i = 0; i < a.coords.size(); ++i) {
    const double d = a.coords[i] - b.coords[i];
    sq += d * d;
  }
  const double normalized = std::sqrt(sq) / std::sqrt(static_cast<double>(a.coords.size()));
  return std::clamp(1.0 - normalized, 0.0, 1.0);
}

std::optional<double> lexical_similarity(std::string_view a, std::string_view b,
                                         const LexicalEntryTable& table) {
  const auto ea = table.entries_of(a);
  const auto eb = table.entries_of(b);
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& e : ea) {
    for (const auto& f : eb) {
      if (e == f) continue;
      if (auto d = table.dissimilarity(e, f)) {
        sum += 1.0 - *d;
        ++n;
      }
    }
  }
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

std::vector<std::string> segment_subwords(std::string_view word,
                                          const std::set<std::string>& vocab) {
  const auto chars = text::utf8_chars(word);
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < chars.size()) {
    std::string best;
    std::size_t best_len = 0;
    std::string candidate;
    for (std::size_t j = i; j < chars.size(); ++j) {
      candidate += chars[j];
      if (vocab.count(candidate)) {
        best = candidate;
        best_len = j - i + 1;
      }
    }
    if (best_len == 0) {
      out.emplace_back("<unk>");
      ++i;
    } else {
      out.push_back(std::move(best));
      i += best_len;
    }
  }
  return out;
}

namespace {

bool is_whitespace(const std::string& ch) {
  return ch == " " || ch == "\t" || ch == "\n" || ch == "\r" || ch == "\v" || ch == "\f" ||
         ch == "\xC2\xA0";
}

void add_units_from_line(UnitSet& units, std::string_view line, UnitLevel level,
                         const std::set<std::string>* vocab) {
  switch (level) {
    case UnitLevel::Char:
      for (auto& ch : text::utf8_chars(line)) {
        if (!is_whitespace(ch)) units.insert(std::move(ch));
      }
      break;
    case UnitLevel::Trigram: {
      const auto chars = text::utf8_chars(line);
      for (std::size_t i = 0; i + 3 <= chars.size(); ++i) {
        units.insert(chars[i] + chars[i + 1] + chars[i + 2]);
      }
      break;
    }
    case UnitLevel::Subword:
      for (const auto& word : text::split(line, ' ')) {
        if (word.empty()) continue;
        for (auto& piece : segment_subwords(word, *vocab)) units.insert(std::move(piece));
      }
      break;
    case UnitLevel::Word:
      break;
  }
}

void require_vocab(UnitLevel level, const std::set<std::string>* vocab) {
  if (level == UnitLevel::Subword && !vocab) {
    throw ContractViolation("subword units need a vocabulary");
  }
}

}  // namespace

UnitSet extract_units(const TokenCorpus& corpus, UnitLevel level,
                      const std::set<std::string>* vocab) {
  require_vocab(level, vocab);
  UnitSet units;
  for (const auto& s : corpus.sentences) {
    if (level == UnitLevel::Word) {
      for (const auto& t : s.tokens) units.insert(t.form);
    } else {
      add_units_from_line(units, s.text(), level, vocab);
    }
  }
  return units;
}

UnitSet extract_units(const LabeledTextCorpus& corpus, UnitLevel level,
                      const std::set<std::string>* vocab) {
  if (level == UnitLevel::Word) {
    throw ContractViolation("word units need a gold-tokenized corpus");
  }
  require_vocab(level, vocab);
  UnitSet units;
  for (const auto& item : corpus.items) add_units_from_line(units, item.text, level, vocab);
  return units;
}

double jaccard(const UnitSet& a, const UnitSet& b) {
  if (a.empty() && b.empty()) return 0.0;
  std::size_t inter = 0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (*ia < *ib) {
      ++ia;
    } else if (*ib < *ia) {
      ++ib;
    } else {
      ++inter;
      ++ia;
      ++ib;
    }
  }
  const std::size_t uni = a.size() + b.size() - inter;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

std::size_t training_size(const TokenCorpus& corpus) { return corpus.sentences.size(); }
std::size_t training_size(const LabeledTextCorpus& corpus) { return corpus.items.size(); }

// ---------------------------------------------------------------------------
// SimilarityTable
// ---------------------------------------------------------------------------

SimilarityTable::Key SimilarityTable::key(const std::string& a, const std::string& b) {
  return a < b ? Key{a, b} : Key{b, a};
}

void SimilarityTable::set(const std::string& a, const std::string& b, double value,
                          std::optional<double> coverage) {
  if (a == b) throw ContractViolation("similarity tables hold distinct pairs only: " + a);
  if (!(value >= 0.0 && value <= 1.0)) {
    throw ContractViolation("similarity " + std::to_string(value) + " outside [0,1]");
  }
  const auto k = key(a, b);
  values_[k] = value;
  if (coverage) {
    if (!(*coverage >= 0.0 && *coverage <= 1.0)) {
      throw ContractViolation("coverage outside [0,1]");
    }
    coverage_[k] = *coverage;
  }
}

std::optional<double> SimilarityTable::value(const std::string& a, const std::string& b) const {
  if (a == b) return std::nullopt;
  const auto it = values_.find(key(a, b));
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

std::optional<double> SimilarityTable::coverage(const std::string& a, const std::string& b) const {
  if (a == b) return std::nullopt;
  const auto it = coverage_.find(key(a, b));
  if (it == coverage_.end()) return std::nullopt;
  return it->second;
}

std::optional<double> SimilarityTable::value_for_tags(const std::string& a,
                                                      const std::string& b) const {
  if (auto v = value(a, b)) return v;
  const auto ba = base_language(a);
  const auto bb = base_language(b);
  if (ba == a && bb == b) return std::nullopt;
  return value(ba, bb);
}

std::optional<double> SimilarityTable::mean_coverage() const {
  if (coverage_.empty()) return std::nullopt;
  double sum = 0.0;
  for (const auto& [k, c] : coverage_) sum += c;
  return sum / static_cast<double>(coverage_.size());
}

std::optional<double> SourceAttribute::value_for_tag(const std::string& tag) const {
  if (auto it = values.find(tag); it != values.end()) return it->second;
  if (auto it = values.find(base_language(tag)); it != values.end()) return it->second;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Builders
// ---------------------------------------------------------------------------

namespace {

std::vector<std::string> sorted_unique(std::vector<std::string> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

// Maps each language to the key its data is stored under (exact, then macro).
template <typename Has>
std::map<std::string, std::string> resolve_keys(const std::vector<std::string>& languages,
                                                const Registry* registry, Has has) {
  std::map<std::string, std::string> keys;
  for (const auto& lang : languages) {
    if (registry) {
      if (auto k = registry->resolve(lang, has)) keys.emplace(lang, *k);
    } else if (has(lang)) {
      keys.emplace(lang, lang);
    }
  }
  return keys;
}

template <typename PairFn>
SimilarityTable fill_pairs(Measure measure, const std::vector<std::string>& languages,
                           PairFn fn) {
  SimilarityTable table(measure);
  const auto langs = sorted_unique(languages);
  for (std::size_t i = 0; i < langs.size(); ++i) {
    for (std::size_t j = i + 1; j < langs.size(); ++j) fn(table, langs[i], langs[j]);
  }
  return table;
}

}  // namespace

SimilarityTable build_gower_table(Measure measure, const FeatureMatrix& matrix,
                                  const std::vector<std::string>& languages, double min_coverage,
                                  const Registry* registry) {
  if (!is_gower(measure) || measure_for(matrix.kind) != measure) {
    throw ContractViolation("feature matrix of kind " + std::string(to_string(matrix.kind)) +
                            " cannot produce measure " + std::string(to_string(measure)));
  }
  const auto keys = resolve_keys(languages, registry,
                                 [&](const std::string& l) { return matrix.row(l) != nullptr; });
  return fill_pairs(measure, languages, [&](SimilarityTable& t, const auto& a, const auto& b) {
    const auto ka = keys.find(a);
    const auto kb = keys.find(b);
    if (ka == keys.end() || kb == keys.end()) return;
    if (auto r = gower_similarity(*matrix.row(ka->second), *matrix.row(kb->second), min_coverage)) {
      t.set(a, b, r->similarity, r->coverage);
    }
  });
}

SimilarityTable build_phylo_table(const PhyloIndex& index, const std::vector<std::string>& languages,
                                  const Registry* registry) {
  const auto keys = resolve_keys(languages, registry,
                                 [&](const std::string& l) { return index.path(l) != nullptr; });
  return fill_pairs(Measure::Gen, languages, [&](SimilarityTable& t, const auto& a, const auto& b) {
    const auto ka = keys.find(a);
    const auto kb = keys.find(b);
    if (ka == keys.end() || kb == keys.end()) return;
    if (auto v = phylo_relatedness(ka->second, kb->second, index)) t.set(a, b, *v);
  });
}

SimilarityTable build_geo_table(const LocationTable& locations,
                                const std::vector<std::string>& languages,
                                const Registry* registry) {
  const auto keys = resolve_keys(
      languages, registry, [&](const std::string& l) { return locations.find(l) != nullptr; });
  return fill_pairs(Measure::Geo, languages, [&](SimilarityTable& t, const auto& a, const auto& b) {
    const auto ka = keys.find(a);
    const auto kb = keys.find(b);
    if (ka == keys.end() || kb == keys.end()) return;
    t.set(a, b, geo_proximity(*locations.find(ka->second), *locations.find(kb->second)));
  });
}

SimilarityTable build_lexical_table(const LexicalEntryTable& lexicon,
                                    const std::vector<std::string>& languages,
                                    const Registry* registry) {
  std::set<std::string> with_entries;
  for (const auto& [entry, lang] : lexicon.entry_lang) with_entries.insert(lang);
  const auto keys = resolve_keys(
      languages, registry, [&](const std::string& l) { return with_entries.count(l) > 0; });
  return fill_pairs(Measure::Lex, languages, [&](SimilarityTable& t, const auto& a, const auto& b) {
    const auto ka = keys.find(a);
    const auto kb = keys.find(b);
    if (ka == keys.end() || kb == keys.end()) return;
    if (auto v = lexical_similarity(ka->second, kb->second, lexicon)) t.set(a, b, *v);
  });
}

SimilarityTable build_overlap_table(Measure measure, const std::map<std::string, UnitSet>& units) {
  if (measure != Measure::Chr && measure != Measure::Wor && measure != Measure::Tri &&
      measure != Measure::Swt) {
    throw ContractViolation("unit sets cannot produce measure " + std::string(to_string(measure)));
  }
  SimilarityTable table(measure);
  for (auto i = units.begin(); i != units.end(); ++i) {
    for (auto j = std::next(i); j != units.end(); ++j) {
      table.set(i->first, j->first, jaccard(i->second, j->second));
    }
  }
  return table;
}

SimilarityTable build_similarity_table(Measure measure, const SimilarityInputs& inputs,
                                       const std::vector<std::string>& languages,
                                       double min_coverage, const Registry* registry) {
  const auto need = [&](const void* p, const char* what) {
    if (!p) {
      throw ContractViolation("measure " + std::string(to_string(measure)) + " needs " + what);
    }
  };
  switch (measure) {
    case Measure::Gb:
    case Measure::Syn:
    case Measure::Pho:
    case Measure::Inv:
      need(inputs.features, "a feature matrix");
      return build_gower_table(measure, *inputs.features, languages, min_coverage, registry);
    case Measure::Gen:
      need(inputs.phylo, "phylogenetic paths");
      return build_phylo_table(*inputs.phylo, languages, registry);
    case Measure::Geo:
      need(inputs.locations, "location vectors");
      return build_geo_table(*inputs.locations, languages, registry);
    case Measure::Lex:
      need(inputs.lexicon, "a lexical table");
      return build_lexical_table(*inputs.lexicon, languages, registry);
    case Measure::Chr:
    case Measure::Wor:
    case Measure::Tri:
    case Measure::Swt:
      need(inputs.units, "corpus unit sets");
      return build_overlap_table(measure, *inputs.units);
  }
  throw ContractViolation("unknown measure");
}

// ---------------------------------------------------------------------------
// Emission
// ---------------------------------------------------------------------------

std::string emit_similarity_table(const SimilarityTable& table) {
  std::string out = "measure\tlang_a\tlang_b\tvalue\tcoverage\n";
  const std::string m(to_string(table.measure()));
  for (const auto& [k, v] : table.values()) {
    const auto c = table.coverage(k.first, k.second);
    out += m + '\t' + k.first + '\t' + k.second + '\t' + text::format_fixed(v, 6) + '\t' +
           (c ? text::format_fixed(*c, 6) : std::string("NA")) + '\n';
  }
  return out;
}

SimilarityTable parse_similarity_table(std::string_view contents, const std::string& source) {
  std::optional<SimilarityTable> table;
  const auto lines = text::split_lines(std::string(contents));
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::size_t line = i + 1;
    if (lines[i].empty() || lines[i].front() == '#') continue;
    const auto f = text::split(lines[i], '\t');
    if (f[0] == "measure") continue;
    if (f.size() != 5) throw ParseError(source, line, "expected 5 columns");
    const auto m = measure_from_string(f[0]);
    if (!m) throw ParseError(source, line, "unknown measure '" + f[0] + "'");
    if (!table) table.emplace(*m);
    if (table->measure() != *m) throw ValidationError(source, line, "mixed measures in one table");
    const auto v = text::parse_double(f[3]);
    if (!v || *v < 0.0 || *v > 1.0) throw ParseError(source, line, "bad value '" + f[3] + "'");
    std::optional<double> c;
    if (f[4] != "NA") {
      c = text::parse_double(f[4]);
      if (!c || *c < 0.0 || *c > 1.0) throw ParseError(source, line, "bad coverage '" + f[4] + "'");
    }
    if (f[1] == f[2]) throw ValidationError(source, line, "self pair");
    table->set(f[1], f[2], *v, c);
  }
  if (!table) throw ParseError(source, 1, "empty similarity table");
  return *table;
}

SimilarityTable load_similarity_table(const std::filesystem::path& path) {
  return parse_similarity_table(text::read_file(path), path.string());
}

std::string emit_source_attribute(const SourceAttribute& attr) {
  std::string out = "measure\tlang\tvalue\n";
  for (const auto& [lang, v] : attr.values) {
    out += attr.measure + '\t' + lang + '\t' + text::format_shortest(v) + '\n';
  }
  return out;
}

SourceAttribute parse_source_attribute(std::string_view contents, const std::string& source) {
  SourceAttribute attr;
  const auto lines = text::split_lines(std::string(contents));
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::size_t line = i + 1;
    if (lines[i].empty() || lines[i].front() == '#') continue;
    const auto f = text::split(lines[i], '\t');
    if (f[0] == "measure") continue;
    if (f.size() != 3) throw ParseError(source, line, "expected 3 columns");
    attr.measure = f[0];
    const auto v = text::parse_double(f[2]);
    if (!v || *v < 0.0) throw ParseError(source, line, "bad count '" + f[2] + "'");
    attr.values[f[1]] = *v;
  }
  return attr;
}

SourceAttribute load_source_attribute(const std::filesystem::path& path) {
  return parse_source_attribute(text::read_file(path), path.string());
}

}  // namespace langsim
