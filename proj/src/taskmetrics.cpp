#include "langsim/taskmetrics.hpp"

#include <algorithm>

#include "langsim/error.hpp"
#include "langsim/text.hpp"

namespace langsim {

namespace {

void check_alignment(const TokenCorpus& gold, const TokenCorpus& pred) {
  if (gold.sentences.size() != pred.sentences.size()) {
    throw AlignmentError(std::min(gold.sentences.size(), pred.sentences.size()),
                         "gold has " + std::to_string(gold.sentences.size()) +
                             " sentences, prediction has " + std::to_string(pred.sentences.size()));
  }
  for (std::size_t s = 0; s < gold.sentences.size(); ++s) {
    const auto& g = gold.sentences[s].tokens;
    const auto& p = pred.sentences[s].tokens;
    if (g.size() != p.size()) {
      throw AlignmentError(s, "gold has " + std::to_string(g.size()) + " tokens, prediction has " +
                                  std::to_string(p.size()));
    }
    for (std::size_t t = 0; t < g.size(); ++t) {
      if (g[t].form != p[t].form) {
        throw AlignmentError(s, "token " + std::to_string(t + 1) + " differs: '" + g[t].form +
                                    "' vs '" + p[t].form + "'");
      }
    }
  }
}

double percent(std::size_t correct, std::size_t total) {
  return 100.0 * static_cast<double>(correct) / static_cast<double>(total);
}

}  // namespace

std::string_view universal_relation(std::string_view deprel) {
  return deprel.substr(0, deprel.find(':'));
}

ScoreReport pos_accuracy(const TokenCorpus& gold, const TokenCorpus& pred) {
  check_alignment(gold, pred);
  std::size_t correct = 0;
  std::size_t total = 0;
  for (std::size_t s = 0; s < gold.sentences.size(); ++s) {
    const auto& g = gold.sentences[s].tokens;
    const auto& p = pred.sentences[s].tokens;
    for (std::size_t t = 0; t < g.size(); ++t) {
      if (!g[t].upos || !p[t].upos) {
        throw ContractViolation("pos_accuracy: untagged token in sentence " + std::to_string(s));
      }
      ++total;
      if (*g[t].upos == *p[t].upos) ++correct;
    }
  }
  if (total == 0) throw ContractViolation("pos_accuracy: no tokens to score");
  return {"pos", percent(correct, total), total};
}

AttachmentScores attachment_scores(const TokenCorpus& gold, const TokenCorpus& pred) {
  check_alignment(gold, pred);
  std::size_t heads = 0;
  std::size_t labeled = 0;
  std::size_t total = 0;
  for (std::size_t s = 0; s < gold.sentences.size(); ++s) {
    const auto& g = gold.sentences[s].tokens;
    const auto& p = pred.sentences[s].tokens;
    for (std::size_t t = 0; t < g.size(); ++t) {
      if (!g[t].head || !p[t].head) {
        throw ContractViolation("attachment_scores: missing head in sentence " + std::to_string(s));
      }
      ++total;
      if (*g[t].head != *p[t].head) continue;
      ++heads;
      if (g[t].deprel && p[t].deprel &&
          universal_relation(*g[t].deprel) == universal_relation(*p[t].deprel)) {
        ++labeled;
      }
    }
  }
  if (total == 0) throw ContractViolation("attachment_scores: no tokens to score");
  return {{"uas", percent(heads, total), total}, {"las", percent(labeled, total), total}};
}

ScoreReport topic_accuracy(const LabeledTextCorpus& gold, const std::vector<std::string>& pred) {
  if (gold.items.size() != pred.size()) {
    throw AlignmentError(0, "gold has " + std::to_string(gold.items.size()) +
                                " items, prediction has " + std::to_string(pred.size()));
  }
  if (pred.empty()) throw ContractViolation("topic_accuracy: no items to score");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (gold.items[i].label == pred[i]) ++correct;
  }
  return {"accuracy", percent(correct, pred.size()), pred.size()};
}

double random_baseline(std::size_t num_classes) {
  if (num_classes == 0) throw ContractViolation("random_baseline: zero classes");
  return 100.0 / static_cast<double>(num_classes);
}

std::string emit_metric_report(const std::vector<MetricRow>& rows) {
  std::string out = "metric\ttrain_lang\ttest_lang\tvalue\tn\n";
  for (const auto& r : rows) {
    out += r.report.metric + '\t' + r.train_lang + '\t' + r.test_lang + '\t' +
           text::format_fixed(r.report.value, 2) + '\t' + std::to_string(r.report.n_items) + '\n';
  }
  return out;
}

}  // namespace langsim
