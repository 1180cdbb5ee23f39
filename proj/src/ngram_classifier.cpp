#include "langsim/ngram_classifier.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <utility>

#include "langsim/error.hpp"
#include "langsim/rng.hpp"
#include "langsim/taskmetrics.hpp"
#include "langsim/text.hpp"

namespace langsim {

std::string_view to_string(Analyzer a) { return a == Analyzer::Char ? "char" : "char_wb"; }

std::optional<Analyzer> analyzer_from_string(std::string_view s) {
  if (s == "char") return Analyzer::Char;
  if (s == "char_wb") return Analyzer::CharWb;
  return std::nullopt;
}

void FeaturizerConfig::validate() const {
  if (n_min < 1 || n_max < n_min) {
    throw ContractViolation("n-gram range must satisfy 1 <= n_min <= n_max");
  }
  if (max_features && *max_features == 0) throw ContractViolation("max_features must be positive");
}

void TrainConfig::validate() const {
  if (epochs < 1) throw ContractViolation("epochs must be >= 1");
  if (!(learning_rate > 0.0)) throw ContractViolation("learning rate must be > 0");
  if (batch_size && *batch_size == 0) throw ContractViolation("batch size must be > 0");
  for (auto h : hidden_layers) {
    if (h == 0) throw ContractViolation("hidden layers must be non-empty");
  }
}

// ---------------------------------------------------------------------------
// Featurization
// ---------------------------------------------------------------------------

namespace {

bool is_space_cp(char32_t c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f' || c == 0xA0;
}

void count_ngrams(const std::vector<char32_t>& chars, int n_min, int n_max, NgramCounts& out) {
  const auto len = static_cast<int>(chars.size());
  for (int n = n_min; n <= n_max; ++n) {
    for (int i = 0; i + n <= len; ++i) {
      std::string gram;
      for (int k = 0; k < n; ++k) text::append_utf8(gram, chars[static_cast<std::size_t>(i + k)]);
      out[gram] += 1.0;
    }
  }
}

}  // namespace

NgramCounts featurize(std::string_view text_in, const FeaturizerConfig& cfg) {
  cfg.validate();
  NgramCounts counts;
  const auto chars = text::decode_utf8(text_in);
  if (cfg.analyzer == Analyzer::Char) {
    count_ngrams(chars, cfg.n_min, cfg.n_max, counts);
    return counts;
  }
  std::vector<char32_t> word;
  const auto flush = [&]() {
    if (word.empty()) return;
    std::vector<char32_t> padded;
    padded.reserve(word.size() + 2);
    padded.push_back(' ');
    padded.insert(padded.end(), word.begin(), word.end());
    padded.push_back(' ');
    count_ngrams(padded, cfg.n_min, cfg.n_max, counts);
    word.clear();
  };
  for (char32_t c : chars) {
    if (is_space_cp(c)) {
      flush();
    } else {
      word.push_back(c);
    }
  }
  flush();
  return counts;
}

// ---------------------------------------------------------------------------
// Model
// ---------------------------------------------------------------------------

namespace {

using SparseRow = std::vector<std::pair<std::size_t, double>>;

SparseRow to_sparse(const NgramCounts& counts, const std::map<std::string, std::size_t>& vocab) {
  SparseRow row;
  for (const auto& [gram, c] : counts) {
    if (auto it = vocab.find(gram); it != vocab.end()) row.emplace_back(it->second, c);
  }
  return row;
}

// Activations of every layer for one input; acts[0] is the first hidden layer.
std::vector<std::vector<double>> forward(const std::vector<DenseLayer>& layers, const SparseRow& x) {
  std::vector<std::vector<double>> acts;
  acts.reserve(layers.size());
  const auto& first = layers.front();
  std::vector<double> z = first.bias;
  for (const auto& [idx, c] : x) {
    const double* w = &first.weights[idx * first.outputs];
    for (std::size_t j = 0; j < first.outputs; ++j) z[j] += c * w[j];
  }
  for (std::size_t l = 0; l < layers.size(); ++l) {
    if (l > 0) {
      const auto& layer = layers[l];
      const auto& in = acts.back();
      z = layer.bias;
      for (std::size_t i = 0; i < layer.inputs; ++i) {
        const double a = in[i];
        if (a == 0.0) continue;
        const double* w = &layer.weights[i * layer.outputs];
        for (std::size_t j = 0; j < layer.outputs; ++j) z[j] += a * w[j];
      }
    }
    if (l + 1 < layers.size()) {
      for (double& v : z) v = std::max(0.0, v);
    }
    acts.push_back(z);
  }
  return acts;
}

void softmax_inplace(std::vector<double>& z) {
  const double mx = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (double& v : z) {
    v = std::exp(v - mx);
    sum += v;
  }
  for (double& v : z) v /= sum;
}

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
};

}  // namespace

std::vector<double> TopicModel::scores(std::string_view text) const {
  return forward(layers, to_sparse(featurize(text, featurizer), vocabulary)).back();
}

const std::string& TopicModel::predict(std::string_view text) const {
  const auto s = scores(text);
  const auto best = std::max_element(s.begin(), s.end());
  return labels[static_cast<std::size_t>(best - s.begin())];
}

TopicModel train(const LabeledTextCorpus& corpus, const FeaturizerConfig& fcfg,
                 const TrainConfig& tcfg) {
  fcfg.validate();
  tcfg.validate();
  std::set<std::string> present;
  for (const auto& it : corpus.items) present.insert(it.label);
  if (present.size() < 2) {
    throw TrainingError("training corpus for '" + corpus.lang + "' needs at least two labels");
  }

  TopicModel model;
  model.featurizer = fcfg;
  model.labels = corpus.labels;
  std::map<std::string, std::size_t> label_index;
  for (std::size_t i = 0; i < model.labels.size(); ++i) label_index[model.labels[i]] = i;

  // Vocabulary from the training texts only, columns in sorted term order.
  std::vector<NgramCounts> feats;
  feats.reserve(corpus.items.size());
  NgramCounts totals;
  for (const auto& it : corpus.items) {
    feats.push_back(featurize(it.text, fcfg));
    for (const auto& [g, c] : feats.back()) totals[g] += c;
  }
  std::vector<std::string> terms;
  terms.reserve(totals.size());
  for (const auto& [g, c] : totals) terms.push_back(g);
  if (fcfg.max_features && terms.size() > *fcfg.max_features) {
    std::stable_sort(terms.begin(), terms.end(), [&](const auto& a, const auto& b) {
      return totals[a] > totals[b];
    });
    terms.resize(*fcfg.max_features);
    std::sort(terms.begin(), terms.end());
  }
  for (std::size_t i = 0; i < terms.size(); ++i) model.vocabulary.emplace(terms[i], i);

  std::vector<SparseRow> X;
  std::vector<std::size_t> y;
  X.reserve(feats.size());
  for (std::size_t i = 0; i < feats.size(); ++i) {
    X.push_back(to_sparse(feats[i], model.vocabulary));
    y.push_back(label_index.at(corpus.items[i].label));
  }

  // Glorot-uniform initialization from the seeded stream.
  Rng rng(tcfg.seed);
  std::vector<std::size_t> sizes{model.vocabulary.size()};
  sizes.insert(sizes.end(), tcfg.hidden_layers.begin(), tcfg.hidden_layers.end());
  sizes.push_back(model.labels.size());
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    DenseLayer layer;
    layer.inputs = sizes[l];
    layer.outputs = sizes[l + 1];
    const double bound = std::sqrt(6.0 / static_cast<double>(layer.inputs + layer.outputs));
    layer.weights.resize(layer.inputs * layer.outputs);
    layer.bias.resize(layer.outputs);
    for (double& w : layer.weights) w = rng.uniform(-bound, bound);
    for (double& b : layer.bias) b = rng.uniform(-bound, bound);
    model.layers.push_back(std::move(layer));
  }

  const std::size_t L = model.layers.size();
  std::vector<AdamState> w_state(L);
  std::vector<AdamState> b_state(L);
  std::vector<std::vector<double>> w_grad(L);
  std::vector<std::vector<double>> b_grad(L);
  for (std::size_t l = 0; l < L; ++l) {
    const auto& layer = model.layers[l];
    w_state[l] = {std::vector<double>(layer.weights.size()), std::vector<double>(layer.weights.size())};
    b_state[l] = {std::vector<double>(layer.bias.size()), std::vector<double>(layer.bias.size())};
    w_grad[l].resize(layer.weights.size());
    b_grad[l].resize(layer.bias.size());
  }

  const std::size_t n = X.size();
  const std::size_t batch = std::min(tcfg.batch_size.value_or(200), n);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::uint64_t step = 0;

  for (int epoch = 0; epoch < tcfg.epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t start = 0; start < n; start += batch) {
      const std::size_t end = std::min(start + batch, n);
      const double bsz = static_cast<double>(end - start);
      for (std::size_t l = 0; l < L; ++l) {
        std::fill(w_grad[l].begin(), w_grad[l].end(), 0.0);
        std::fill(b_grad[l].begin(), b_grad[l].end(), 0.0);
      }
      for (std::size_t s = start; s < end; ++s) {
        const std::size_t i = order[s];
        auto acts = forward(model.layers, X[i]);
        std::vector<double> delta = acts.back();
        softmax_inplace(delta);
        delta[y[i]] -= 1.0;
        for (double& d : delta) d /= bsz;
        for (std::size_t l = L; l-- > 0;) {
          const auto& layer = model.layers[l];
          for (std::size_t j = 0; j < layer.outputs; ++j) b_grad[l][j] += delta[j];
          if (l == 0) {
            for (const auto& [idx, c] : X[i]) {
              double* g = &w_grad[0][idx * layer.outputs];
              for (std::size_t j = 0; j < layer.outputs; ++j) g[j] += c * delta[j];
            }
            break;
          }
          const auto& in = acts[l - 1];
          std::vector<double> prev(layer.inputs, 0.0);
          for (std::size_t a = 0; a < layer.inputs; ++a) {
            const double* w = &layer.weights[a * layer.outputs];
            double* g = &w_grad[l][a * layer.outputs];
            double back = 0.0;
            for (std::size_t j = 0; j < layer.outputs; ++j) {
              g[j] += in[a] * delta[j];
              back += w[j] * delta[j];
            }
            prev[a] = in[a] > 0.0 ? back : 0.0;
          }
          delta = std::move(prev);
        }
      }
      ++step;
      const double t = static_cast<double>(step);
      const double lr = tcfg.learning_rate * std::sqrt(1.0 - std::pow(tcfg.beta2, t)) /
                        (1.0 - std::pow(tcfg.beta1, t));
      const auto update = [&](std::vector<double>& param, const std::vector<double>& grad,
                              AdamState& st, double l2) {
        for (std::size_t k = 0; k < param.size(); ++k) {
          const double g = grad[k] + l2 * param[k];
          st.m[k] = tcfg.beta1 * st.m[k] + (1.0 - tcfg.beta1) * g;
          st.v[k] = tcfg.beta2 * st.v[k] + (1.0 - tcfg.beta2) * g * g;
          param[k] -= lr * st.m[k] / (std::sqrt(st.v[k]) + tcfg.epsilon);
        }
      };
      for (std::size_t l = 0; l < L; ++l) {
        update(model.layers[l].weights, w_grad[l], w_state[l], tcfg.l2_penalty / bsz);
        update(model.layers[l].bias, b_grad[l], b_state[l], 0.0);
      }
    }
  }
  return model;
}

std::vector<std::string> predict(const TopicModel& model, const LabeledTextCorpus& corpus) {
  std::vector<std::string> out;
  out.reserve(corpus.items.size());
  for (const auto& it : corpus.items) out.push_back(model.predict(it.text));
  return out;
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

namespace {

constexpr std::string_view kMagic = "langsim-topic-model";
constexpr int kFormatVersion = 1;

std::string escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '\\': out += "\\\\"; break;
      case '\t': out += "\\t"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      default: out += c;
    }
  }
  return out;
}

std::string unescape(std::string_view s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '\\' || i + 1 == s.size()) {
      out += s[i];
      continue;
    }
    switch (s[++i]) {
      case 't': out += '\t'; break;
      case 'n': out += '\n'; break;
      case 'r': out += '\r'; break;
      default: out += s[i];
    }
  }
  return out;
}

std::string join_numbers(const double* data, std::size_t n) {
  std::string out;
  for (std::size_t i = 0; i < n; ++i) {
    if (i) out += ' ';
    out += text::format_shortest(data[i]);
  }
  return out;
}

class LineReader {
 public:
  explicit LineReader(std::string_view contents) : lines_(text::split_lines(std::string(contents))) {}

  const std::string& next() {
    if (pos_ >= lines_.size()) throw ParseError("<model>", pos_ + 1, "unexpected end of model");
    return lines_[pos_++];
  }

  std::vector<std::string> fields(std::string_view expected_key, std::size_t count) {
    auto f = text::split(next(), ' ');
    if (f.empty() || f[0] != expected_key || f.size() != count + 1) {
      throw ParseError("<model>", pos_, "expected '" + std::string(expected_key) + "' record");
    }
    f.erase(f.begin());
    return f;
  }

  std::size_t number(std::string_view key) {
    const auto f = fields(key, 1);
    const auto v = text::parse_int(f[0]);
    if (!v || *v < 0) throw ParseError("<model>", pos_, "bad count for " + std::string(key));
    return static_cast<std::size_t>(*v);
  }

  std::vector<double> doubles(std::size_t count) {
    const auto& line = next();
    std::vector<double> out;
    out.reserve(count);
    if (count == 0) return out;
    for (const auto& tok : text::split(line, ' ')) {
      const auto v = text::parse_double(tok);
      if (!v) throw ParseError("<model>", pos_, "bad number '" + tok + "'");
      out.push_back(*v);
    }
    if (out.size() != count) throw ParseError("<model>", pos_, "wrong number of values");
    return out;
  }

  std::size_t line() const { return pos_; }

 private:
  std::vector<std::string> lines_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string serialize_model(const TopicModel& model) {
  std::string out = std::string(kMagic) + ' ' + std::to_string(kFormatVersion) + '\n';
  out += "analyzer " + std::string(to_string(model.featurizer.analyzer)) + '\n';
  out += "ngram_range " + std::to_string(model.featurizer.n_min) + ' ' +
         std::to_string(model.featurizer.n_max) + '\n';
  out += "max_features " +
         (model.featurizer.max_features ? std::to_string(*model.featurizer.max_features)
                                        : std::string("none")) +
         '\n';
  out += "labels " + std::to_string(model.labels.size()) + '\n';
  for (const auto& l : model.labels) out += escape(l) + '\n';
  std::vector<const std::string*> by_index(model.vocabulary.size());
  for (const auto& [term, idx] : model.vocabulary) by_index.at(idx) = &term;
  out += "vocabulary " + std::to_string(by_index.size()) + '\n';
  for (const auto* term : by_index) out += escape(*term) + '\n';
  out += "layers " + std::to_string(model.layers.size()) + '\n';
  for (const auto& layer : model.layers) {
    out += "layer " + std::to_string(layer.inputs) + ' ' + std::to_string(layer.outputs) + '\n';
    for (std::size_t i = 0; i < layer.inputs; ++i) {
      out += join_numbers(&layer.weights[i * layer.outputs], layer.outputs) + '\n';
    }
    out += join_numbers(layer.bias.data(), layer.bias.size()) + '\n';
  }
  return out;
}

TopicModel deserialize_model(std::string_view contents) {
  LineReader in(contents);
  const auto head = text::split(in.next(), ' ');
  if (head.size() != 2 || head[0] != kMagic) throw ParseError("<model>", 1, "not a topic model");
  if (head[1] != std::to_string(kFormatVersion)) {
    throw ParseError("<model>", 1, "unsupported model version " + head[1]);
  }
  TopicModel model;
  const auto analyzer = analyzer_from_string(in.fields("analyzer", 1)[0]);
  if (!analyzer) throw ParseError("<model>", in.line(), "unknown analyzer");
  model.featurizer.analyzer = *analyzer;
  const auto range = in.fields("ngram_range", 2);
  const auto n_min = text::parse_int(range[0]);
  const auto n_max = text::parse_int(range[1]);
  if (!n_min || !n_max) throw ParseError("<model>", in.line(), "bad n-gram range");
  model.featurizer.n_min = static_cast<int>(*n_min);
  model.featurizer.n_max = static_cast<int>(*n_max);
  const auto cap = in.fields("max_features", 1)[0];
  if (cap != "none") {
    const auto v = text::parse_int(cap);
    if (!v || *v <= 0) throw ParseError("<model>", in.line(), "bad max_features");
    model.featurizer.max_features = static_cast<std::size_t>(*v);
  }
  model.featurizer.validate();
  const std::size_t n_labels = in.number("labels");
  for (std::size_t i = 0; i < n_labels; ++i) model.labels.push_back(unescape(in.next()));
  const std::size_t n_vocab = in.number("vocabulary");
  for (std::size_t i = 0; i < n_vocab; ++i) {
    if (!model.vocabulary.emplace(unescape(in.next()), i).second) {
      throw ParseError("<model>", in.line(), "duplicate vocabulary entry");
    }
  }
  const std::size_t n_layers = in.number("layers");
  std::size_t expected_inputs = n_vocab;
  for (std::size_t l = 0; l < n_layers; ++l) {
    const auto dims = in.fields("layer", 2);
    DenseLayer layer;
    layer.inputs = static_cast<std::size_t>(text::parse_int(dims[0]).value_or(-1));
    layer.outputs = static_cast<std::size_t>(text::parse_int(dims[1]).value_or(-1));
    if (layer.inputs != expected_inputs || layer.outputs == 0) {
      throw ParseError("<model>", in.line(), "layer dimensions do not chain");
    }
    layer.weights.reserve(layer.inputs * layer.outputs);
    for (std::size_t i = 0; i < layer.inputs; ++i) {
      const auto row = in.doubles(layer.outputs);
      layer.weights.insert(layer.weights.end(), row.begin(), row.end());
    }
    layer.bias = in.doubles(layer.outputs);
    expected_inputs = layer.outputs;
    model.layers.push_back(std::move(layer));
  }
  if (model.layers.empty() || expected_inputs != model.labels.size()) {
    throw ParseError("<model>", in.line(), "output layer does not match label count");
  }
  return model;
}

void save_model(const TopicModel& model, const std::filesystem::path& path) {
  text::write_file_atomic(path, serialize_model(model));
}

TopicModel load_model(const std::filesystem::path& path) {
  return deserialize_model(text::read_file(path));
}

// ---------------------------------------------------------------------------
// Transfer matrices
// ---------------------------------------------------------------------------

TransferResultMatrix build_transfer_matrix(const std::vector<LanguageSplits>& corpora,
                                           const FeaturizerConfig& fcfg, const TrainConfig& tcfg,
                                           const std::string& experiment) {
  if (corpora.empty()) throw ContractViolation("build_transfer_matrix: no corpora");
  const std::set<std::string> labels(corpora.front().train.labels.begin(),
                                     corpora.front().train.labels.end());
  for (const auto& c : corpora) {
    for (const auto* split : {&c.train, &c.test}) {
      if (std::set<std::string>(split->labels.begin(), split->labels.end()) != labels) {
        throw ValidationError("label set of " + c.lang + " (" + std::string(to_string(split->split)) +
                              ") differs from " + corpora.front().lang);
      }
    }
  }
  auto sorted = corpora;
  std::sort(sorted.begin(), sorted.end(),
            [](const auto& a, const auto& b) { return a.lang < b.lang; });

  TransferResultMatrix result;
  result.experiment = experiment;
  result.metric = "accuracy";
  for (const auto& source : sorted) {
    TrainConfig cfg = tcfg;
    cfg.seed = derive_seed(tcfg.seed, source.lang);
    const TopicModel model = train(source.train, fcfg, cfg);
    for (const auto& target : sorted) {
      const auto report = topic_accuracy(target.test, predict(model, target.test));
      result.scores[{source.lang, target.lang}] = report.value;
    }
  }
  return result;
}

}  // namespace langsim
