#include "langsim/lingdata.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <tuple>

#include "langsim/error.hpp"
#include "langsim/text.hpp"

namespace langsim {

namespace {

bool is_lower(char c) { return c >= 'a' && c <= 'z'; }

bool skippable(const std::string& line) { return line.empty() || line.front() == '#'; }

std::optional<std::string> optional_field(const std::vector<std::string>& fields, std::size_t i) {
  if (i >= fields.size()) return std::nullopt;
  const auto v = text::trim(fields[i]);
  if (v.empty()) return std::nullopt;
  return std::string(v);
}

}  // namespace

// ---------------------------------------------------------------------------
// Tags
// ---------------------------------------------------------------------------

bool is_language_code(std::string_view s) {
  return s.size() == 3 && is_lower(s[0]) && is_lower(s[1]) && is_lower(s[2]);
}

bool is_script_code(std::string_view s) {
  return s.size() == 4 && s[0] >= 'A' && s[0] <= 'Z' && is_lower(s[1]) && is_lower(s[2]) &&
         is_lower(s[3]);
}

std::string base_language(std::string_view tag) {
  if (tag.size() >= 3 && is_language_code(tag.substr(0, 3)) &&
      (tag.size() == 3 || tag[3] == '_' || tag[3] == '-')) {
    return std::string(tag.substr(0, 3));
  }
  return std::string(tag);
}

std::optional<std::string> tag_script(std::string_view tag) {
  if (tag.size() >= 8 && tag[3] == '_' && is_script_code(tag.substr(4, 4)) &&
      (tag.size() == 8 || tag[8] == '-' || tag[8] == '_')) {
    return std::string(tag.substr(4, 4));
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Registry
// ---------------------------------------------------------------------------

namespace {

// Shared by the constructor and the line-aware loader; `line_of(i)` maps a
// record index to its source line (0 when unknown).
template <typename LineOf>
void validate_records(const std::vector<LanguageRecord>& records, const std::string& source,
                      LineOf line_of) {
  const auto fail = [&](std::size_t i, const std::string& msg) {
    const std::size_t line = line_of(i);
    if (line) throw ValidationError(source, line, msg);
    throw ValidationError(source + ": " + msg);
  };
  std::map<std::pair<std::string, std::string>, std::size_t> seen;
  std::map<std::string, std::size_t> by_id;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    if (!is_language_code(r.id)) fail(i, "malformed language id '" + r.id + "'");
    if (r.script && !is_script_code(*r.script)) fail(i, "malformed script '" + *r.script + "'");
    if (r.macro_id && !is_language_code(*r.macro_id)) {
      fail(i, "malformed macro_id '" + *r.macro_id + "'");
    }
    const auto key = std::make_pair(r.id, r.script.value_or(""));
    if (auto [it, inserted] = seen.emplace(key, i); !inserted) {
      fail(i, "duplicate language (" + r.id + ", " + r.script.value_or("") + ")");
    }
    by_id.emplace(r.id, i);
  }
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    if (!r.macro_id) continue;
    if (*r.macro_id == r.id) fail(i, "language " + r.id + " is its own macrolanguage");
    const auto it = by_id.find(*r.macro_id);
    if (it == by_id.end()) fail(i, "macro_id '" + *r.macro_id + "' is not registered");
    if (records[it->second].macro_id) {
      fail(i, "fallback chain " + r.id + " -> " + *r.macro_id + " -> " +
                  *records[it->second].macro_id + " is longer than one step");
    }
  }
}

}  // namespace

Registry::Registry(std::vector<LanguageRecord> records) : records_(std::move(records)) {
  validate_records(records_, "<registry>", [](std::size_t) { return std::size_t{0}; });
}

bool Registry::contains(std::string_view id) const { return find(id) != nullptr; }

const LanguageRecord* Registry::find(std::string_view id,
                                     std::optional<std::string_view> script) const {
  for (const auto& r : records_) {
    if (r.id != id) continue;
    if (script && r.script.value_or("") != *script) continue;
    return &r;
  }
  return nullptr;
}

std::optional<std::string> Registry::fallback(std::string_view id) const {
  for (const auto& r : records_) {
    if (r.id == id && r.macro_id) return r.macro_id;
  }
  return std::nullopt;
}

std::optional<std::string> Registry::resolve(
    std::string_view id, const std::function<bool(const std::string&)>& has) const {
  std::string exact(id);
  if (has(exact)) return exact;
  if (auto macro = fallback(id); macro && has(*macro)) return macro;
  return std::nullopt;
}

std::optional<std::string> Registry::script_of(std::string_view tag) const {
  if (auto s = tag_script(tag)) return s;
  const auto* r = find(base_language(tag));
  if (r) return r->script;
  return std::nullopt;
}

std::optional<bool> Registry::in_pretraining(std::string_view tag) const {
  const auto base = base_language(tag);
  if (auto s = tag_script(tag)) {
    if (const auto* r = find(base, *s); r && r->in_pretraining) return r->in_pretraining;
  }
  const auto* r = find(base);
  if (r) return r->in_pretraining;
  return std::nullopt;
}

std::vector<std::string> Registry::ids() const {
  std::set<std::string> ids;
  for (const auto& r : records_) ids.insert(r.id);
  return {ids.begin(), ids.end()};
}

Registry parse_registry(std::string_view contents, const std::string& source) {
  static const std::vector<std::string> kColumns = {"id", "script", "macro_id", "in_pretraining"};
  const auto lines = text::split_lines(std::string(contents));
  if (lines.empty()) throw ParseError(source, 1, "missing header");
  const auto header = text::split(lines[0], '\t');
  if (header.size() > kColumns.size() ||
      !std::equal(header.begin(), header.end(), kColumns.begin())) {
    throw ParseError(source, 1, "header must be 'id\\tscript\\tmacro_id\\tin_pretraining'");
  }
  std::vector<LanguageRecord> records;
  std::vector<std::size_t> record_lines;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::size_t line = i + 1;
    if (skippable(lines[i])) continue;
    const auto fields = text::split(lines[i], '\t');
    if (fields.size() > kColumns.size()) throw ParseError(source, line, "too many columns");
    LanguageRecord r;
    r.id = std::string(text::trim(fields[0]));
    if (!is_language_code(r.id)) {
      throw ParseError(source, line, "malformed language id '" + r.id + "'");
    }
    r.script = optional_field(fields, 1);
    if (r.script && !is_script_code(*r.script)) {
      throw ParseError(source, line, "malformed script '" + *r.script + "'");
    }
    r.macro_id = optional_field(fields, 2);
    if (r.macro_id && !is_language_code(*r.macro_id)) {
      throw ParseError(source, line, "malformed macro_id '" + *r.macro_id + "'");
    }
    if (auto flag = optional_field(fields, 3)) {
      if (*flag == "1") {
        r.in_pretraining = true;
      } else if (*flag == "0") {
        r.in_pretraining = false;
      } else {
        throw ParseError(source, line, "in_pretraining must be 1 or 0");
      }
    }
    records.push_back(std::move(r));
    record_lines.push_back(line);
  }
  validate_records(records, source, [&](std::size_t i) { return record_lines[i]; });
  return Registry(std::move(records));
}

Registry load_registry(const std::filesystem::path& path) {
  return parse_registry(text::read_file(path), path.string());
}

std::string emit_registry(const Registry& registry) {
  auto records = registry.records();
  std::sort(records.begin(), records.end(), [](const auto& a, const auto& b) {
    return std::tie(a.id, a.script) < std::tie(b.id, b.script);
  });
  std::string out = "id\tscript\tmacro_id\tin_pretraining\n";
  for (const auto& r : records) {
    out += r.id + '\t' + r.script.value_or("") + '\t' + r.macro_id.value_or("") + '\t';
    if (r.in_pretraining) out += *r.in_pretraining ? "1" : "0";
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// Feature matrices
// ---------------------------------------------------------------------------

std::string_view to_string(FeatureKind kind) {
  switch (kind) {
    case FeatureKind::Gb: return "gb";
    case FeatureKind::Syn: return "syn";
    case FeatureKind::Pho: return "pho";
    case FeatureKind::Inv: return "inv";
  }
  return "?";
}

std::optional<FeatureKind> feature_kind_from_string(std::string_view s) {
  for (auto k : {FeatureKind::Gb, FeatureKind::Syn, FeatureKind::Pho, FeatureKind::Inv}) {
    if (to_string(k) == s) return k;
  }
  return std::nullopt;
}

const FeatureVector* FeatureMatrix::row(std::string_view lang) const {
  const auto it = rows.find(std::string(lang));
  return it == rows.end() ? nullptr : &it->second;
}

std::size_t FeatureMatrix::missing_count() const {
  std::size_t n = 0;
  for (const auto& [lang, values] : rows) {
    n += static_cast<std::size_t>(std::count(values.begin(), values.end(), std::nullopt));
  }
  return n;
}

FeatureMatrix parse_feature_matrix(std::string_view contents, FeatureKind kind,
                                   const Registry* registry, const std::string& source) {
  const auto lines = text::split_lines(std::string(contents));
  if (lines.empty()) throw ParseError(source, 1, "missing header");
  const auto header = text::split(lines[0], ',');
  if (text::trim(header[0]) != "language") {
    throw ParseError(source, 1, "first header column must be 'language'");
  }
  FeatureMatrix m;
  m.kind = kind;
  for (std::size_t i = 1; i < header.size(); ++i) {
    m.features.emplace_back(text::trim(header[i]));
  }
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::size_t line = i + 1;
    if (lines[i].empty()) continue;
    const auto cells = text::split(lines[i], ',');
    if (cells.size() != header.size()) {
      throw ParseError(source, line,
                       "ragged row: expected " + std::to_string(header.size()) + " cells, got " +
                           std::to_string(cells.size()));
    }
    std::string lang(text::trim(cells[0]));
    if (!is_language_code(lang)) {
      throw ParseError(source, line, "malformed language id '" + lang + "'");
    }
    if (registry && !registry->contains(lang)) {
      throw ValidationError(source, line, "language '" + lang + "' is not in the registry");
    }
    FeatureVector values;
    values.reserve(m.features.size());
    for (std::size_t c = 1; c < cells.size(); ++c) {
      const auto v = text::trim(cells[c]);
      if (v.empty()) {
        values.emplace_back(std::nullopt);
      } else {
        values.emplace_back(std::string(v));
      }
    }
    if (!m.rows.emplace(lang, std::move(values)).second) {
      throw ValidationError(source, line, "duplicate language '" + lang + "'");
    }
  }
  return m;
}

FeatureMatrix load_feature_matrix(const std::filesystem::path& path, FeatureKind kind,
                                  const Registry* registry) {
  return parse_feature_matrix(text::read_file(path), kind, registry, path.string());
}

std::string emit_feature_matrix(const FeatureMatrix& matrix) {
  std::string out = "language";
  for (const auto& f : matrix.features) out += ',' + f;
  out += '\n';
  for (const auto& [lang, values] : matrix.rows) {
    out += lang;
    for (const auto& v : values) {
      out += ',';
      if (v) out += *v;
    }
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// Phylogeny
// ---------------------------------------------------------------------------

const std::vector<std::string>* PhyloIndex::path(std::string_view lang) const {
  const auto it = paths.find(std::string(lang));
  return it == paths.end() ? nullptr : &it->second;
}

PhyloIndex parse_phylo_paths(std::string_view contents, const std::set<std::string>& drop_roots,
                             const std::string& source) {
  PhyloIndex index;
  const auto lines = text::split_lines(std::string(contents));
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::size_t line = i + 1;
    if (skippable(lines[i])) continue;
    const auto fields = text::split(lines[i], '\t');
    if (fields.size() != 2) throw ParseError(source, line, "expected 'lang_id<TAB>path'");
    const std::string lang(text::trim(fields[0]));
    if (lang.empty()) throw ParseError(source, line, "empty language id");
    auto nodes = text::split(fields[1], '/');
    for (const auto& n : nodes) {
      if (n.empty()) throw ParseError(source, line, "empty node in path");
    }
    if (nodes.size() > 1 && drop_roots.count(nodes.front())) nodes.erase(nodes.begin());
    if (!index.paths.emplace(lang, std::move(nodes)).second) {
      throw ValidationError(source, line, "duplicate language '" + lang + "'");
    }
  }
  return index;
}

PhyloIndex load_phylo_paths(const std::filesystem::path& path,
                            const std::set<std::string>& drop_roots) {
  return parse_phylo_paths(text::read_file(path), drop_roots, path.string());
}

std::string emit_phylo_paths(const PhyloIndex& index) {
  std::string out;
  for (const auto& [lang, nodes] : index.paths) {
    out += lang + '\t' + text::join(nodes, "/") + '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// Locations
// ---------------------------------------------------------------------------

const LocationVector* LocationTable::find(std::string_view lang) const {
  const auto it = vectors.find(std::string(lang));
  return it == vectors.end() ? nullptr : &it->second;
}

LocationTable parse_locations(std::string_view contents, const std::string& source) {
  const auto lines = text::split_lines(std::string(contents));
  if (lines.empty()) throw ParseError(source, 1, "missing header");
  const auto header = text::split(lines[0], ',');
  if (text::trim(header[0]) != "language") {
    throw ParseError(source, 1, "first header column must be 'language'");
  }
  if (header.size() < 2) throw ParseError(source, 1, "need at least one coordinate column");
  LocationTable table;
  table.dimension = header.size() - 1;
  for (std::size_t i = 1; i < header.size(); ++i) table.columns.emplace_back(text::trim(header[i]));
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::size_t line = i + 1;
    if (lines[i].empty()) continue;
    const auto cells = text::split(lines[i], ',');
    if (cells.size() != header.size()) throw ParseError(source, line, "ragged row");
    LocationVector v;
    v.lang = std::string(text::trim(cells[0]));
    for (std::size_t c = 1; c < cells.size(); ++c) {
      const auto x = text::parse_double(text::trim(cells[c]));
      if (!x) throw ParseError(source, line, "non-numeric coordinate '" + cells[c] + "'");
      if (*x < 0.0 || *x > 1.0) {
        throw ValidationError(source, line, "coordinate " + cells[c] + " outside [0,1]");
      }
      v.coords.push_back(*x);
    }
    const std::string lang = v.lang;
    if (!table.vectors.emplace(lang, std::move(v)).second) {
      throw ValidationError(source, line, "duplicate language '" + lang + "'");
    }
  }
  return table;
}

LocationTable load_locations(const std::filesystem::path& path) {
  return parse_locations(text::read_file(path), path.string());
}

std::string emit_locations(const LocationTable& table) {
  std::string out = "language";
  for (const auto& c : table.columns) out += ',' + c;
  out += '\n';
  for (const auto& [lang, v] : table.vectors) {
    out += lang;
    for (double x : v.coords) out += ',' + text::format_shortest(x);
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// Lexical entries
// ---------------------------------------------------------------------------

std::vector<std::string> LexicalEntryTable::entries_of(std::string_view lang) const {
  std::vector<std::string> out;
  for (const auto& [entry, l] : entry_lang) {
    if (l == lang) out.push_back(entry);
  }
  return out;
}

std::optional<double> LexicalEntryTable::dissimilarity(const std::string& a,
                                                       const std::string& b) const {
  const auto key = a < b ? std::make_pair(a, b) : std::make_pair(b, a);
  const auto it = dissim.find(key);
  if (it == dissim.end()) return std::nullopt;
  return it->second;
}

LexicalEntryTable parse_lexical_table(std::string_view entries, std::string_view dissim,
                                      const std::string& source) {
  LexicalEntryTable table;
  const std::string entries_src = source + "[entries]";
  const auto elines = text::split_lines(std::string(entries));
  for (std::size_t i = 0; i < elines.size(); ++i) {
    const std::size_t line = i + 1;
    if (skippable(elines[i])) continue;
    const auto fields = text::split(elines[i], '\t');
    if (fields.size() != 2) throw ParseError(entries_src, line, "expected 'entry_id<TAB>lang_id'");
    if (i == 0 && fields[0] == "entry_id") continue;
    std::string entry(text::trim(fields[0]));
    std::string lang(text::trim(fields[1]));
    if (entry.empty() || lang.empty()) throw ParseError(entries_src, line, "empty field");
    if (!table.entry_lang.emplace(entry, lang).second) {
      throw ValidationError(entries_src, line, "duplicate entry '" + entry + "'");
    }
  }
  const std::string dissim_src = source + "[dissim]";
  const auto dlines = text::split_lines(std::string(dissim));
  for (std::size_t i = 0; i < dlines.size(); ++i) {
    const std::size_t line = i + 1;
    if (skippable(dlines[i])) continue;
    const auto fields = text::split(dlines[i], '\t');
    if (fields.size() != 3) throw ParseError(dissim_src, line, "expected 'entry_a<TAB>entry_b<TAB>value'");
    if (i == 0 && fields[0] == "entry_a") continue;
    std::string a(text::trim(fields[0]));
    std::string b(text::trim(fields[1]));
    const auto v = text::parse_double(text::trim(fields[2]));
    if (!v) throw ParseError(dissim_src, line, "non-numeric value '" + fields[2] + "'");
    if (*v < 0.0 || *v > 1.0) throw ValidationError(dissim_src, line, "value outside [0,1]");
    for (const auto& e : {a, b}) {
      if (!table.entry_lang.count(e)) {
        throw ValidationError(dissim_src, line, "unknown entry '" + e + "'");
      }
    }
    auto key = a < b ? std::make_pair(a, b) : std::make_pair(b, a);
    if (!table.dissim.emplace(std::move(key), *v).second) {
      throw ValidationError(dissim_src, line, "duplicate pair " + a + "/" + b);
    }
  }
  return table;
}

LexicalEntryTable load_lexical_table(const std::filesystem::path& entries_path,
                                     const std::filesystem::path& dissim_path) {
  return parse_lexical_table(text::read_file(entries_path), text::read_file(dissim_path),
                             entries_path.string());
}

std::string emit_lexical_entries(const LexicalEntryTable& table) {
  std::string out;
  for (const auto& [entry, lang] : table.entry_lang) out += entry + '\t' + lang + '\n';
  return out;
}

std::string emit_lexical_dissim(const LexicalEntryTable& table) {
  std::string out;
  for (const auto& [key, v] : table.dissim) {
    out += key.first + '\t' + key.second + '\t' + text::format_shortest(v) + '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// Token corpora
// ---------------------------------------------------------------------------

std::string Sentence::text() const {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += ' ';
    out += tokens[i].form;
  }
  return out;
}

std::size_t TokenCorpus::token_count() const {
  std::size_t n = 0;
  for (const auto& s : sentences) n += s.tokens.size();
  return n;
}

TokenCorpus parse_token_corpus(std::string_view contents, std::string lang,
                               const std::string& source) {
  TokenCorpus corpus;
  corpus.lang = std::move(lang);
  Sentence current;
  std::vector<std::size_t> token_lines;

  const auto flush = [&]() {
    if (current.tokens.empty()) return;
    const bool annotated = current.tokens.front().head.has_value();
    const int n = static_cast<int>(current.tokens.size());
    for (int i = 0; i < n; ++i) {
      const auto& t = current.tokens[static_cast<std::size_t>(i)];
      const std::size_t line = token_lines[static_cast<std::size_t>(i)];
      if (t.head.has_value() != annotated) {
        throw ValidationError(source, line, "sentence mixes annotated and unannotated tokens");
      }
      if (!t.head) continue;
      if (*t.head < 0 || *t.head > n) {
        throw ValidationError(source, line, "head " + std::to_string(*t.head) + " out of range");
      }
      if (*t.head == i + 1) {
        throw ValidationError(source, line, "token " + std::to_string(i + 1) + " is its own head");
      }
    }
    corpus.sentences.push_back(std::move(current));
    current = Sentence{};
    token_lines.clear();
  };

  const auto lines = text::split_lines(std::string(contents));
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::size_t line = i + 1;
    const auto& l = lines[i];
    if (l.empty()) {
      flush();
      continue;
    }
    if (l.front() == '#') continue;
    const auto cols = text::split(l, '\t');
    if (cols.size() != 10) {
      throw ParseError(source, line, "expected 10 columns, got " + std::to_string(cols.size()));
    }
    const auto& id = cols[0];
    if (id.find('-') != std::string::npos || id.find('.') != std::string::npos) continue;
    const auto idx = text::parse_int(id);
    if (!idx || *idx != static_cast<long long>(current.tokens.size()) + 1) {
      throw ParseError(source, line, "unexpected token id '" + id + "'");
    }
    Token t;
    t.form = cols[1];
    if (cols[3] != "_") t.upos = cols[3];
    if (cols[6] != "_") {
      const auto h = text::parse_int(cols[6]);
      if (!h) throw ParseError(source, line, "non-numeric head '" + cols[6] + "'");
      t.head = static_cast<int>(*h);
    }
    if (cols[7] != "_") t.deprel = cols[7];
    current.tokens.push_back(std::move(t));
    token_lines.push_back(line);
  }
  flush();
  return corpus;
}

TokenCorpus load_token_corpus(const std::filesystem::path& path, std::string lang) {
  return parse_token_corpus(text::read_file(path), std::move(lang), path.string());
}

std::string emit_token_corpus(const TokenCorpus& corpus) {
  std::string out;
  for (const auto& s : corpus.sentences) {
    for (std::size_t i = 0; i < s.tokens.size(); ++i) {
      const auto& t = s.tokens[i];
      out += std::to_string(i + 1) + '\t' + t.form + "\t_\t" + t.upos.value_or("_") + "\t_\t_\t" +
             (t.head ? std::to_string(*t.head) : "_") + '\t' + t.deprel.value_or("_") + "\t_\t_\n";
    }
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// Labeled corpora
// ---------------------------------------------------------------------------

std::string_view to_string(Split split) {
  switch (split) {
    case Split::Train: return "train";
    case Split::Dev: return "dev";
    case Split::Test: return "test";
  }
  return "?";
}

std::optional<Split> split_from_string(std::string_view s) {
  for (auto sp : {Split::Train, Split::Dev, Split::Test}) {
    if (to_string(sp) == s) return sp;
  }
  return std::nullopt;
}

std::vector<std::string> LabeledTextCorpus::texts() const {
  std::vector<std::string> out;
  out.reserve(items.size());
  for (const auto& it : items) out.push_back(it.text);
  return out;
}

std::vector<std::string> LabeledTextCorpus::gold_labels() const {
  std::vector<std::string> out;
  out.reserve(items.size());
  for (const auto& it : items) out.push_back(it.label);
  return out;
}

LabeledTextCorpus parse_labeled_corpus(std::string_view contents, std::string lang, Split split,
                                       const std::string& source) {
  static constexpr std::string_view kPrefix = "#labels:";
  LabeledTextCorpus corpus;
  corpus.lang = std::move(lang);
  corpus.split = split;
  const auto lines = text::split_lines(std::string(contents));
  if (lines.empty() || lines[0].rfind(kPrefix, 0) != 0) {
    throw ParseError(source, 1, "first line must be '#labels: l1,l2,...'");
  }
  std::set<std::string> label_set;
  for (const auto& l : text::split(std::string_view(lines[0]).substr(kPrefix.size()), ',')) {
    std::string label(text::trim(l));
    if (label.empty()) throw ParseError(source, 1, "empty label in header");
    if (!label_set.insert(label).second) throw ParseError(source, 1, "duplicate label '" + label + "'");
    corpus.labels.push_back(std::move(label));
  }
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::size_t line = i + 1;
    if (lines[i].empty()) continue;
    const auto tab = lines[i].find('\t');
    if (tab == std::string::npos) throw ParseError(source, line, "expected 'label<TAB>text'");
    LabeledItem item{lines[i].substr(0, tab), lines[i].substr(tab + 1)};
    if (!label_set.count(item.label)) {
      throw ValidationError(source, line, "undeclared label '" + item.label + "'");
    }
    if (item.text.empty()) throw ValidationError(source, line, "empty text");
    corpus.items.push_back(std::move(item));
  }
  return corpus;
}

LabeledTextCorpus load_labeled_corpus(const std::filesystem::path& path, std::string lang,
                                      Split split) {
  return parse_labeled_corpus(text::read_file(path), std::move(lang), split, path.string());
}

std::string emit_labeled_corpus(const LabeledTextCorpus& corpus) {
  std::string out = "#labels: " + text::join(corpus.labels, ",") + '\n';
  for (const auto& it : corpus.items) out += it.label + '\t' + it.text + '\n';
  return out;
}

std::vector<std::string> load_label_lines(const std::filesystem::path& path) {
  std::vector<std::string> out;
  for (auto& l : text::split_lines(text::read_file(path))) out.emplace_back(text::trim(l));
  return out;
}

std::set<std::string> load_vocabulary(const std::filesystem::path& path) {
  std::set<std::string> vocab;
  for (const auto& l : text::split_lines(text::read_file(path))) {
    if (!l.empty()) vocab.insert(l);
  }
  return vocab;
}

// ---------------------------------------------------------------------------
// Results
// ---------------------------------------------------------------------------

std::optional<double> TransferResultMatrix::score(const std::string& train,
                                                  const std::string& test) const {
  const auto it = scores.find({train, test});
  if (it == scores.end()) return std::nullopt;
  return it->second;
}

std::vector<std::string> TransferResultMatrix::train_languages() const {
  std::set<std::string> s;
  for (const auto& [key, v] : scores) s.insert(key.first);
  return {s.begin(), s.end()};
}

std::vector<std::string> TransferResultMatrix::test_languages() const {
  std::set<std::string> s;
  for (const auto& [key, v] : scores) s.insert(key.second);
  return {s.begin(), s.end()};
}

std::string TransferResultMatrix::label() const { return experiment + "/" + metric; }

std::vector<TransferResultMatrix> parse_results(std::string_view contents,
                                                const std::string& source) {
  std::map<std::pair<std::string, std::string>, TransferResultMatrix> grouped;
  const auto lines = text::split_lines(std::string(contents));
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::size_t line = i + 1;
    if (skippable(lines[i])) continue;
    const auto f = text::split(lines[i], '\t');
    if (f[0] == "experiment") continue;
    if (f.size() != 4 && f.size() != 5) {
      throw ParseError(source, line, "expected 'experiment<TAB>metric<TAB>train<TAB>test<TAB>score'");
    }
    const bool has_metric = f.size() == 5;
    const std::string& experiment = f[0];
    const std::string metric = has_metric ? f[1] : "score";
    const std::string& train = f[has_metric ? 2 : 1];
    const std::string& test = f[has_metric ? 3 : 2];
    if (experiment.empty() || metric.empty() || train.empty() || test.empty()) {
      throw ParseError(source, line, "empty field");
    }
    const auto score = text::parse_double(f.back());
    if (!score) throw ParseError(source, line, "non-numeric score '" + f.back() + "'");
    if (*score < 0.0 || *score > 100.0) {
      throw ValidationError(source, line, "score " + f.back() + " outside [0,100]");
    }
    auto& m = grouped[{experiment, metric}];
    m.experiment = experiment;
    m.metric = metric;
    if (!m.scores.emplace(std::make_pair(train, test), *score).second) {
      throw ValidationError(source, line, "duplicate cell " + train + " -> " + test);
    }
  }
  std::vector<TransferResultMatrix> out;
  for (auto& [key, m] : grouped) out.push_back(std::move(m));
  return out;
}

std::vector<TransferResultMatrix> load_results(const std::filesystem::path& path) {
  return parse_results(text::read_file(path), path.string());
}

std::string emit_results(const std::vector<TransferResultMatrix>& matrices) {
  auto sorted = matrices;
  std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) {
    return std::tie(a.experiment, a.metric) < std::tie(b.experiment, b.metric);
  });
  std::string out = "experiment\tmetric\ttrain_lang\ttest_lang\tscore\n";
  for (const auto& m : sorted) {
    for (const auto& [key, v] : m.scores) {
      out += m.experiment + '\t' + m.metric + '\t' + key.first + '\t' + key.second + '\t' +
             text::format_shortest(v) + '\n';
    }
  }
  return out;
}

}  // namespace langsim
