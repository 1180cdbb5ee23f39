#pragma once

// Statistical kernels: correlation with p-values, t intervals, two-sample
// Kolmogorov-Smirnov, Ward ordering, least squares.

#include <cstddef>
#include <span>
#include <vector>

namespace langsim::stats {

struct CorrStat {
  double r = 0.0;
  double p = 1.0;  // two-sided
  std::size_t n = 0;
};

/// Sample Pearson r with a two-sided Student-t p-value (n - 2 df).
/// Throws UndefinedStatistic for n < 3, unequal lengths or a constant series.
CorrStat pearson(std::span<const double> x, std::span<const double> y);

/// Pearson on mid-ranks.
CorrStat spearman(std::span<const double> x, std::span<const double> y);

/// 1-based ranks; tied values share the mean of their positions.
std::vector<double> average_ranks(std::span<const double> v);

/// Two-sided p-value of a correlation coefficient `r` over `n` pairs.
double correlation_p_value(double r, std::size_t n);

/// I_x(a, b) via Lentz's continued fraction.
double regularized_incomplete_beta(double a, double b, double x);

double student_t_cdf(double t, double df);

/// Inverse of student_t_cdf by bisection.
double student_t_quantile(double prob, double df);

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // population (ddof = 0)
};

MeanStd mean_std(std::span<const double> v);

struct MeanCI {
  double mean = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};

/// mean ± t_{n-1,(1+level)/2} · s / sqrt(n), with s the sample deviation.
MeanCI mean_ci(std::span<const double> v, double level = 0.95);

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
  std::size_t n_a = 0;
  std::size_t n_b = 0;
};

/// D = sup |ECDF_a - ECDF_b|; p from the asymptotic Kolmogorov distribution
/// at sqrt(n_a n_b / (n_a + n_b)) · D.
KsResult ks_two_sample(std::span<const double> a, std::span<const double> b);

/// P(K > lambda) for the Kolmogorov distribution.
double kolmogorov_survival(double lambda);

using SquareMatrix = std::vector<std::vector<double>>;

/// Leaf order of a Ward dendrogram built with Lance-Williams updates on
/// squared dissimilarities. At each merge the cluster whose smallest member is
/// lower stays on the left; equal costs go to the lexicographically smallest
/// (min index, max index) pair.
std::vector<std::size_t> ward_order(const SquareMatrix& dissimilarity);

struct OlsFit {
  std::vector<double> coefficients;
  std::vector<double> std_errors;
  std::vector<double> residuals;
  double residual_variance = 0.0;  // RSS / (n - p)
  std::size_t n = 0;
  std::size_t p = 0;
};

/// Least squares via column-pivoted QR. `rows` is n × p (include an
/// intercept column yourself). Throws SingularMatrix on rank deficiency.
OlsFit ols_fit(const std::vector<std::vector<double>>& rows, std::span<const double> y);

}  // namespace langsim::stats
