#pragma once

// Slow, direct reimplementations used to check the production kernels.
// They share no code with the library beyond plain data types.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace oracle {

struct Gower {
  double similarity;
  double coverage;
};

inline std::optional<Gower> gower(const std::vector<std::optional<std::string>>& a,
                                  const std::vector<std::optional<std::string>>& b,
                                  double min_coverage) {
  int both = 0;
  int equal = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] && b[i]) {
      ++both;
      if (*a[i] == *b[i]) ++equal;
    }
  }
  if (both == 0) return std::nullopt;
  const double cov = static_cast<double>(both) / static_cast<double>(a.size());
  if (cov < min_coverage) return std::nullopt;
  return Gower{static_cast<double>(equal) / both, cov};
}

inline double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const auto n = static_cast<long double>(x.size());
  long double mx = 0;
  long double my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  long double sxy = 0;
  long double sxx = 0;
  long double syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return static_cast<double>(sxy / std::sqrt(sxx * syy));
}

// Mid-rank: 1 + #smaller + (#equal - 1) / 2.
inline std::vector<double> ranks(const std::vector<double>& v) {
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    double less = 0;
    double eq = 0;
    for (double w : v) {
      if (w < v[i]) ++less;
      if (w == v[i]) ++eq;
    }
    r[i] = 1.0 + less + (eq - 1.0) / 2.0;
  }
  return r;
}

inline double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  return pearson(ranks(x), ranks(y));
}

// Student t density integrated with composite Simpson's rule.
inline double t_density(double t, double df) {
  const double c = std::exp(std::lgamma((df + 1) / 2) - std::lgamma(df / 2)) /
                   std::sqrt(df * std::numbers::pi);
  return c * std::pow(1 + t * t / df, -(df + 1) / 2);
}

inline double t_cdf(double t, double df) {
  const int n = 200000;
  const double a = 0.0;
  const double b = std::fabs(t);
  const double h = (b - a) / n;
  double s = t_density(a, df) + t_density(b, df);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * t_density(a + i * h, df);
  const double half = s * h / 3.0;
  return t >= 0 ? 0.5 + half : 0.5 - half;
}

inline double correlation_p(double r, std::size_t n) {
  const double df = static_cast<double>(n) - 2.0;
  const double t = r * std::sqrt(df) / std::sqrt(1.0 - r * r);
  return 2.0 * (1.0 - t_cdf(std::fabs(t), df));
}

inline double t_quantile(double prob, double df) {
  double lo = 0.0;
  double hi = 1000.0;
  for (int i = 0; i < 100; ++i) {
    const double mid = 0.5 * (lo + hi);
    (t_cdf(mid, df) < prob ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// Supremum of the ECDF gap, evaluated at every sample point.
inline double ks_statistic(const std::vector<double>& a, const std::vector<double>& b) {
  const auto ecdf = [](const std::vector<double>& s, double x) {
    double c = 0;
    for (double v : s) {
      if (v <= x) ++c;
    }
    return c / static_cast<double>(s.size());
  };
  double d = 0;
  for (const auto* s : {&a, &b}) {
    for (double x : *s) d = std::max(d, std::fabs(ecdf(a, x) - ecdf(b, x)));
  }
  return d;
}

// Ward agglomeration that recomputes every merge cost from the original
// dissimilarities: 2|A||B|/(|A|+|B|) * (mean D²(A,B) - mean D²(A,A)/2 - mean D²(B,B)/2),
// where within-cluster means run over all ordered pairs. Clusters are keyed by
// their smallest member; equal costs go to the lexicographically smallest
// key pair and the lower key stays on the left.
inline std::vector<std::size_t> ward_order(const std::vector<std::vector<double>>& d) {
  const std::size_t m = d.size();
  std::vector<std::vector<std::size_t>> members(m);
  std::vector<std::vector<std::size_t>> order(m);
  std::vector<bool> alive(m, true);
  for (std::size_t i = 0; i < m; ++i) members[i] = order[i] = {i};
  const auto mean_sq = [&](const std::vector<std::size_t>& p, const std::vector<std::size_t>& q) {
    double s = 0;
    for (auto i : p) {
      for (auto j : q) s += d[i][j] * d[i][j];
    }
    return s / static_cast<double>(p.size() * q.size());
  };
  for (std::size_t step = 1; step < m; ++step) {
    bool found = false;
    double best = 0;
    std::size_t ba = 0;
    std::size_t bb = 0;
    for (std::size_t a = 0; a < m; ++a) {
      if (!alive[a]) continue;
      for (std::size_t b = a + 1; b < m; ++b) {
        if (!alive[b]) continue;
        const auto& A = members[a];
        const auto& B = members[b];
        const double na = static_cast<double>(A.size());
        const double nb = static_cast<double>(B.size());
        const double cost = 2 * na * nb / (na + nb) *
                            (mean_sq(A, B) - 0.5 * mean_sq(A, A) - 0.5 * mean_sq(B, B));
        if (!found || cost < best - 1e-9 * std::max(1.0, std::fabs(best))) {
          found = true;
          best = cost;
          ba = a;
          bb = b;
        }
      }
    }
    members[ba].insert(members[ba].end(), members[bb].begin(), members[bb].end());
    order[ba].insert(order[ba].end(), order[bb].begin(), order[bb].end());
    alive[bb] = false;
  }
  return order[0];
}

inline double jaccard(const std::set<std::string>& a, const std::set<std::string>& b) {
  std::size_t inter = 0;
  for (const auto& x : a) inter += b.count(x);
  const std::size_t uni = a.size() + b.size() - inter;
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

}  // namespace oracle
