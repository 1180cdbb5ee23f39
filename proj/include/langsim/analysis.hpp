#pragma once

// Table-level analyses over transfer results and similarity tables.

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "langsim/lingdata.hpp"
#include "langsim/similarity.hpp"
#include "langsim/stats.hpp"

namespace langsim::analysis {

inline constexpr double kDefaultAlpha = 0.05;
inline constexpr std::size_t kDefaultMinPairs = 3;

// ---------------------------------------------------------------------------
// Within / across summaries
// ---------------------------------------------------------------------------

enum class SummaryLevel { Dataset, Language };

std::string_view to_string(SummaryLevel level);

struct WithinAcross {
  std::string experiment;  // `exp/metric`
  SummaryLevel level = SummaryLevel::Dataset;
  std::optional<stats::MeanStd> within;
  std::optional<stats::MeanStd> across;
  std::size_t n_within = 0;
  std::size_t n_across = 0;
};

/// Population mean and std of diagonal vs off-diagonal cells. At language
/// level, cells are first averaged per (train, test) base-language pair.
WithinAcross within_across_summary(const TransferResultMatrix& results, SummaryLevel level);

std::string emit_summary(const std::vector<WithinAcross>& rows);

// ---------------------------------------------------------------------------
// Selectors
// ---------------------------------------------------------------------------

/// Scores a (source, target) pair; larger means "pick this source first".
struct Selector {
  std::string name;
  std::function<std::optional<double>(const std::string& source, const std::string& target)> value;
};

Selector make_selector(const SimilarityTable& table);
/// The value depends on the source only.
Selector make_selector(const SourceAttribute& attribute);
/// Uses another experiment's score for the same (source, target) cell.
Selector make_selector(const TransferResultMatrix& results);

// ---------------------------------------------------------------------------
// Correlations
// ---------------------------------------------------------------------------

enum class CorrelationStatus { Value, NotSignificant, MissingData };

struct CorrelationRow {
  std::string test_lang;
  std::string measure;
  std::optional<double> r;
  std::optional<double> p;
  std::size_t n = 0;
  bool zeroed = false;
  CorrelationStatus status = CorrelationStatus::MissingData;
};

struct CorrelationTable {
  std::string experiment;
  double alpha = kDefaultAlpha;
  std::size_t n_min = kDefaultMinPairs;
  std::vector<CorrelationRow> rows;  // sorted by (test_lang, measure)
};

/// Per test language and selector, Pearson r between selector values and
/// transfer scores over sources other than the target. Fewer than `n_min`
/// usable sources (or a constant series) yields missing-data.
CorrelationTable per_target_correlations(const TransferResultMatrix& results,
                                         const std::vector<Selector>& selectors,
                                         double alpha = kDefaultAlpha,
                                         std::size_t n_min = kDefaultMinPairs);

struct AggregateRow {
  std::string measure;
  double mean = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::size_t n = 0;
  bool degenerate = false;  // fewer than two entries, no interval
};

/// Optional subset of test languages by pretraining membership.
struct LanguageFilter {
  const Registry* registry = nullptr;
  bool in_pretraining = true;
};

/// Zeroed entries contribute 0 and missing-data entries are skipped. Rows are
/// sorted by measure; a measure with no usable entry is absent.
std::vector<AggregateRow> aggregate_correlations(const CorrelationTable& table,
                                                 std::optional<LanguageFilter> filter = std::nullopt,
                                                 double level = 0.95);

/// `experiment\ttest_lang\tmeasure\tr\tp\tn\tzeroed`, zeroed is 1/0/NA.
std::string emit_correlations(const std::vector<CorrelationTable>& tables);
std::string emit_aggregates(const std::string& experiment, const std::string& subset,
                            const std::vector<AggregateRow>& rows, bool with_header = true);

struct Intercorrelation {
  std::vector<std::string> measures;
  /// Keyed by measure index pair (i, j), both orders present.
  std::map<std::pair<std::size_t, std::size_t>, stats::CorrStat> cells;
  double alpha = kDefaultAlpha;
};

/// Pearson between every pair of tables over language pairs defined in both.
/// Pairs without enough overlap are absent.
Intercorrelation measure_intercorrelations(const std::vector<SimilarityTable>& tables,
                                           double alpha = kDefaultAlpha);

/// Square matrix; insignificant cells print as `---`, absent ones as `NA`.
std::string emit_intercorrelations(const Intercorrelation& m);

// ---------------------------------------------------------------------------
// Source selection
// ---------------------------------------------------------------------------

struct LossRow {
  std::string target;
  double loss = 0.0;  // percentage points
};

struct LossTable {
  std::string selector;
  std::size_t k = 1;
  std::vector<LossRow> rows;  // sorted by target
  std::optional<stats::MeanStd> aggregate;
  std::vector<std::string> skipped;  // targets without candidates
};

/// For every test language, the gap between the best candidate score and the
/// best score among the selector's top-k candidates.
LossTable selection_loss(const TransferResultMatrix& results, const Selector& selector,
                         std::size_t k);

/// Ranks sources by their score in `selector_results`. Throws
/// ContractViolation when the two experiments share no (source, target) cell.
LossTable cross_experiment_loss(const TransferResultMatrix& target_results,
                                const TransferResultMatrix& selector_results, std::size_t k);

/// `selector\tk\ttarget\tloss_pp`; each table ends with
/// `# mean\t<m>\tstd\t<s>\tskipped\t<n>`.
std::string emit_losses(const std::vector<LossTable>& tables);

// ---------------------------------------------------------------------------
// Script partition
// ---------------------------------------------------------------------------

struct ScriptPartition {
  stats::KsResult ks;
  std::size_t n_same = 0;
  std::size_t n_different = 0;
};

/// KS test between cross-language scores with matching vs differing scripts.
ScriptPartition script_partition_test(const TransferResultMatrix& results, const Registry& registry);

// ---------------------------------------------------------------------------
// Heatmap
// ---------------------------------------------------------------------------

struct Heatmap {
  std::vector<std::string> rows;     // test languages, Ward order
  std::vector<std::string> columns;  // train languages
  std::vector<std::vector<std::optional<double>>> cells;
};

/// Rows (test languages) clustered with Ward on Euclidean distances between
/// score vectors. Columns follow the row order where the language trains,
/// remaining train languages are appended in sorted order.
Heatmap heatmap_order(const TransferResultMatrix& results);

std::string emit_heatmap(const Heatmap& heatmap);
std::string emit_order(const Heatmap& heatmap);

// ---------------------------------------------------------------------------
// Multi-predictor fit
// ---------------------------------------------------------------------------

struct FitOptions {
  bool same_script = false;
  bool in_pretraining = false;  // of the test language
  const Registry* registry = nullptr;
};

struct FitReport {
  std::string experiment;
  std::vector<std::string> predictors;  // "intercept" first
  std::vector<double> coefficients;     // raw scale
  std::vector<double> std_errors;       // raw scale
  std::vector<double> standardized;     // on z-scored predictors
  std::size_t n_complete = 0;
  std::size_t n_candidates = 0;
  std::map<std::string, std::size_t> excluded_by;  // rows lacking each predictor
};

/// OLS of transfer score on the selectors (and optional flags) over
/// cross-language cells where every predictor is defined.
FitReport multi_predictor_fit(const TransferResultMatrix& results,
                              const std::vector<Selector>& selectors, const FitOptions& options = {});

std::string emit_fit(const std::vector<FitReport>& reports);

}  // namespace langsim::analysis
