#include "langsim/stats.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "langsim/error.hpp"

namespace langsim::stats {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Continued fraction for the incomplete beta function (modified Lentz).
double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIter = 10000;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) break;
  }
  return h;
}

void check_pairs(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw UndefinedStatistic("correlation: sequences differ in length");
  if (x.size() < 3) throw UndefinedStatistic("correlation: need at least 3 pairs");
}

}  // namespace

double regularized_incomplete_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                           a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double student_t_cdf(double t, double df) {
  if (std::isinf(t)) return t > 0 ? 1.0 : 0.0;
  const double t2 = t * t;
  if (t2 < df) {
    // P(|T| < |t|) = I_y(1/2, df/2); avoids 1 - x cancellation near 0
    const double inner = 0.5 * regularized_incomplete_beta(0.5, df / 2.0, t2 / (df + t2));
    return t >= 0 ? 0.5 + inner : 0.5 - inner;
  }
  const double tail = 0.5 * regularized_incomplete_beta(df / 2.0, 0.5, df / (df + t2));
  return t >= 0 ? 1.0 - tail : tail;
}

double student_t_quantile(double prob, double df) {
  if (!(prob > 0.0 && prob < 1.0)) throw UndefinedStatistic("t quantile: prob outside (0,1)");
  double lo = -1.0;
  double hi = 1.0;
  while (student_t_cdf(lo, df) > prob) lo *= 2.0;
  while (student_t_cdf(hi, df) < prob) hi *= 2.0;
  for (int i = 0; i < 200 && hi - lo > 1e-13 * std::max(1.0, std::fabs(hi)); ++i) {
    const double mid = 0.5 * (lo + hi);
    if (student_t_cdf(mid, df) < prob) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double correlation_p_value(double r, std::size_t n) {
  if (n < 3) throw UndefinedStatistic("p-value needs n >= 3");
  const double df = static_cast<double>(n - 2);
  const double r2 = r * r;
  if (r2 >= 1.0) return 0.0;
  // P(|T| > t) with t² = df r² / (1 - r²) equals I_{1 - r²}(df/2, 1/2).
  return std::clamp(regularized_incomplete_beta(df / 2.0, 0.5, 1.0 - r2), 0.0, 1.0);
}

CorrStat pearson(std::span<const double> x, std::span<const double> y) {
  check_pairs(x, y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw UndefinedStatistic("correlation: constant input");
  const double r = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
  return {r, correlation_p_value(r, x.size()), x.size()};
}

std::vector<double> average_ranks(std::span<const double> v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[idx[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

CorrStat spearman(std::span<const double> x, std::span<const double> y) {
  check_pairs(x, y);
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  return pearson(rx, ry);
}

MeanStd mean_std(std::span<const double> v) {
  if (v.empty()) throw UndefinedStatistic("mean of empty sequence");
  const double n = static_cast<double>(v.size());
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / n)};
}

MeanCI mean_ci(std::span<const double> v, double level) {
  if (v.size() < 2) throw UndefinedStatistic("confidence interval needs n >= 2");
  if (!(level > 0.0 && level < 1.0)) throw UndefinedStatistic("level outside (0,1)");
  const double n = static_cast<double>(v.size());
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  const double s = std::sqrt(ss / (n - 1.0));
  if (s == 0.0) return {mean, mean, mean};
  const double half = student_t_quantile(0.5 * (1.0 + level), n - 1.0) * s / std::sqrt(n);
  return {mean, mean - half, mean + half};
}

double kolmogorov_survival(double lambda) {
  if (lambda <= 0.0) return 1.0;
  if (lambda < 1.18) {
    // Theta-function form converges fast for small lambda.
    const double y = std::exp(-kPi * kPi / (8.0 * lambda * lambda));
    double sum = 0.0;
    for (int k = 1; k <= 50; k += 2) sum += std::pow(y, static_cast<double>(k * k));
    return std::clamp(1.0 - std::sqrt(2.0 * kPi) / lambda * sum, 0.0, 1.0);
  }
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 ? 1.0 : -1.0) * term;
    if (term < 1e-18) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

KsResult ks_two_sample(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw UndefinedStatistic("KS test needs two non-empty samples");
  std::vector<double> sa(a.begin(), a.end());
  std::vector<double> sb(b.begin(), b.end());
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  const double na = static_cast<double>(sa.size());
  const double nb = static_cast<double>(sb.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < sa.size() && j < sb.size()) {
    const double x = std::min(sa[i], sb[j]);
    while (i < sa.size() && sa[i] == x) ++i;
    while (j < sb.size() && sb[j] == x) ++j;
    d = std::max(d, std::fabs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  const double ne = na * nb / (na + nb);
  return {d, kolmogorov_survival(std::sqrt(ne) * d), sa.size(), sb.size()};
}

std::vector<std::size_t> ward_order(const SquareMatrix& dissimilarity) {
  const std::size_t m = dissimilarity.size();
  if (m == 0) throw ContractViolation("ward_order: empty matrix");
  for (std::size_t i = 0; i < m; ++i) {
    if (dissimilarity[i].size() != m) throw ContractViolation("ward_order: matrix is not square");
    if (std::fabs(dissimilarity[i][i]) > 1e-9) throw ContractViolation("ward_order: non-zero diagonal");
    for (std::size_t j = 0; j < i; ++j) {
      if (std::fabs(dissimilarity[i][j] - dissimilarity[j][i]) > 1e-9) {
        throw ContractViolation("ward_order: matrix is not symmetric");
      }
    }
  }
  // Working copy of squared dissimilarities; slot i holds the cluster whose
  // smallest member is i.
  SquareMatrix d2(m, std::vector<double>(m, 0.0));
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) d2[i][j] = dissimilarity[i][j] * dissimilarity[i][j];
  }
  std::vector<std::vector<std::size_t>> order(m);
  std::vector<double> size(m, 1.0);
  std::vector<bool> active(m, true);
  for (std::size_t i = 0; i < m; ++i) order[i] = {i};

  for (std::size_t step = 1; step < m; ++step) {
    bool found = false;
    double best = 0.0;
    std::size_t ba = 0;
    std::size_t bb = 0;
    for (std::size_t i = 0; i < m; ++i) {
      if (!active[i]) continue;
      for (std::size_t j = i + 1; j < m; ++j) {
        if (!active[j]) continue;
        const double tol = 1e-12 * std::max(1.0, std::fabs(best));
        if (!found || d2[i][j] < best - tol) {
          found = true;
          best = d2[i][j];
          ba = i;
          bb = j;
        }
      }
    }
    for (std::size_t k = 0; k < m; ++k) {
      if (!active[k] || k == ba || k == bb) continue;
      const double nk = size[k];
      const double v = ((size[ba] + nk) * d2[k][ba] + (size[bb] + nk) * d2[k][bb] - nk * d2[ba][bb]) /
                       (size[ba] + size[bb] + nk);
      d2[k][ba] = d2[ba][k] = v;
    }
    size[ba] += size[bb];
    active[bb] = false;
    order[ba].insert(order[ba].end(), order[bb].begin(), order[bb].end());
  }
  return order[0];
}

OlsFit ols_fit(const std::vector<std::vector<double>>& rows, std::span<const double> y) {
  const std::size_t n = rows.size();
  if (n != y.size()) throw ContractViolation("ols_fit: rows and responses differ in length");
  if (n == 0) throw SingularMatrix("ols_fit: no observations");
  const std::size_t p = rows.front().size();
  if (p == 0) throw ContractViolation("ols_fit: no predictors");
  if (n < p) throw SingularMatrix("ols_fit: fewer rows than columns");
  Eigen::MatrixXd X(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
  Eigen::VectorXd Y(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    if (rows[i].size() != p) throw ContractViolation("ols_fit: ragged design matrix");
    for (std::size_t j = 0; j < p; ++j) {
      X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
    Y(static_cast<Eigen::Index>(i)) = y[i];
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  qr.setThreshold(1e-10);
  if (static_cast<std::size_t>(qr.rank()) < p) {
    throw SingularMatrix("ols_fit: design matrix has rank " + std::to_string(qr.rank()) + " < " +
                         std::to_string(p));
  }
  const Eigen::VectorXd beta = qr.solve(Y);
  const Eigen::VectorXd resid = Y - X * beta;
  OlsFit fit;
  fit.n = n;
  fit.p = p;
  fit.coefficients.assign(beta.data(), beta.data() + beta.size());
  fit.residuals.assign(resid.data(), resid.data() + resid.size());
  fit.residual_variance = n > p ? resid.squaredNorm() / static_cast<double>(n - p) : 0.0;
  const Eigen::MatrixXd xtx_inv =
      (X.transpose() * X).ldlt().solve(Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(p),
                                                                 static_cast<Eigen::Index>(p)));
  for (std::size_t j = 0; j < p; ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    fit.std_errors.push_back(std::sqrt(std::max(0.0, fit.residual_variance * xtx_inv(jj, jj))));
  }
  return fit;
}

}  // namespace langsim::stats
