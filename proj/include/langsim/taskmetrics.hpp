#pragma once

// Task scoring: POS accuracy, attachment scores, topic accuracy.

#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "langsim/lingdata.hpp"

namespace langsim {

struct ScoreReport {
  std::string metric;
  double value = 0.0;  // percent
  std::size_t n_items = 0;
};

struct AttachmentScores {
  ScoreReport uas;
  ScoreReport las;
};

ScoreReport pos_accuracy(const TokenCorpus& gold, const TokenCorpus& pred);

/// LAS compares labels up to the first ':' (`obl:tmod` == `obl`).
AttachmentScores attachment_scores(const TokenCorpus& gold, const TokenCorpus& pred);

ScoreReport topic_accuracy(const LabeledTextCorpus& gold, const std::vector<std::string>& pred);

/// Expected accuracy of guessing uniformly among `num_classes`.
double random_baseline(std::size_t num_classes);

/// `acl:relcl` -> `acl`.
std::string_view universal_relation(std::string_view deprel);

struct MetricRow {
  ScoreReport report;
  std::string train_lang;
  std::string test_lang;
};

/// TSV `metric\ttrain_lang\ttest_lang\tvalue\tn`, values to 2 decimals.
std::string emit_metric_report(const std::vector<MetricRow>& rows);

}  // namespace langsim
