#pragma once

// Character n-gram featurization and a small MLP topic classifier used to
// generate train×test transfer matrices.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "langsim/lingdata.hpp"

namespace langsim {

enum class Analyzer { Char, CharWb };

std::string_view to_string(Analyzer a);
std::optional<Analyzer> analyzer_from_string(std::string_view s);

/// Defaults: 1-4 grams, word-bounded,
/// no feature cap.
struct FeaturizerConfig {
  int n_min = 1;
  int n_max = 4;
  Analyzer analyzer = Analyzer::CharWb;
  std::optional<std::size_t> max_features;

  void validate() const;
};

/// Defaults: 20 epochs of Adam at lr 1e-3; one hidden layer of 100 ReLUs;
/// mini-batches of min(200, n).
struct TrainConfig {
  int epochs = 20;
  double learning_rate = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::vector<std::size_t> hidden_layers{100};
  std::optional<std::size_t> batch_size;
  double l2_penalty = 1e-4;
  std::uint64_t seed = 0;

  void validate() const;
};

using NgramCounts = std::map<std::string, double>;

/// `Char`: every substring of length n_min..n_max of the raw text.
/// `CharWb`: whitespace-separated words, each padded with one space per side;
/// n-grams never cross the padded word.
NgramCounts featurize(std::string_view text, const FeaturizerConfig& cfg);

/// Fully connected layer; `weights` is row-major inputs × outputs.
struct DenseLayer {
  std::size_t inputs = 0;
  std::size_t outputs = 0;
  std::vector<double> weights;
  std::vector<double> bias;
};

class TopicModel {
 public:
  FeaturizerConfig featurizer;
  std::map<std::string, std::size_t> vocabulary;
  std::vector<std::string> labels;
  /// The first layer reads the sparse n-gram count vector.
  std::vector<DenseLayer> layers;

  /// Output logits; unseen n-grams contribute nothing.
  std::vector<double> scores(std::string_view text) const;
  /// Argmax of the logits, ties to the earliest label.
  const std::string& predict(std::string_view text) const;
};

/// Deterministic for a given (corpus, configs). Throws TrainingError when
/// the corpus has fewer than two distinct labels.
TopicModel train(const LabeledTextCorpus& corpus, const FeaturizerConfig& fcfg,
                 const TrainConfig& tcfg);

std::vector<std::string> predict(const TopicModel& model, const LabeledTextCorpus& corpus);

std::string serialize_model(const TopicModel& model);
TopicModel deserialize_model(std::string_view contents);
void save_model(const TopicModel& model, const std::filesystem::path& path);
TopicModel load_model(const std::filesystem::path& path);

struct LanguageSplits {
  std::string lang;
  LabeledTextCorpus train;
  LabeledTextCorpus test;
};

/// Trains one model per language (seeded from `tcfg.seed` and the language
/// tag) and scores it on every test split, diagonal included.
TransferResultMatrix build_transfer_matrix(const std::vector<LanguageSplits>& corpora,
                                           const FeaturizerConfig& fcfg, const TrainConfig& tcfg,
                                           const std::string& experiment = "topics-base");

}  // namespace langsim
