// Copyright 2026 The RWDE Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef RWDE_STATS_HPP_
#define RWDE_STATS_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/math/special_functions/beta.hpp>

namespace rwde {

struct BetaParams {
  double a;
  double b;
  BetaParams(double a_, double b_) : a(a_), b(b_) {
    if (!(a > 0.0) || !(b > 0.0))
      throw std::invalid_argument("BetaParams: parameters must be positive");
  }
};

inline double beta_cdf(double x, const BetaParams& p) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  return boost::math::ibeta(p.a, p.b, x);
}

// CDF of 1/W for W ~ Beta(a, b); supported on (1, infinity).
inline double inverse_beta_cdf(double t, const BetaParams& p) {
  if (t <= 1.0) return 0.0;
  return 1.0 - beta_cdf(1.0 / t, p);
}

// Survival function of the Kolmogorov statistic: P(K > z) for the limit law
// of sqrt(n) * D_n.  Theta-function inversion for small z, the alternating
// series elsewhere.
inline double kolmogorov_survival(double z) {
  if (z < 0.2) return 1.0;
  if (z < 0.755) {
    const double v = 1.0 / (z * z);
    const double pi2 = 9.86960440108935862;  // pi^2
    return 1.0 - std::sqrt(2.0 * 3.14159265358979323846) / z *
                     (std::exp(-pi2 * v / 8.0) + std::exp(-9.0 * pi2 * v / 8.0) +
                      std::exp(-25.0 * pi2 * v / 8.0));
  }
  if (z < 6.8116) {
    double s = 0.0;
    for (int j = 1; j <= 4; ++j) {
      const double term = std::exp(-2.0 * j * j * z * z);
      s += (j % 2 == 1) ? term : -term;
    }
    return 2.0 * s;
  }
  return 0.0;
}

struct TestReport {
  std::string name;
  double statistic = 0.0;
  double p_value = 0.0;
  std::size_t n = 0;
  double significance = 0.01;
  bool pass = false;
};

// One-sample Kolmogorov-Smirnov test against a continuous CDF.  The p-value
// uses the asymptotic Kolmogorov law, so at least 100 samples are required.
inline TestReport ks_test(std::vector<double> samples,
                          const std::function<double(double)>& cdf,
                          const std::string& name, double significance = 0.01) {
  const std::size_t n = samples.size();
  if (n < 100) throw std::invalid_argument("ks_test: need at least 100 samples");
  std::sort(samples.begin(), samples.end());
  double d = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double f = cdf(samples[i]);
    d = std::max(d, f - static_cast<double>(i) / n);
    d = std::max(d, static_cast<double>(i + 1) / n - f);
  }
  TestReport r;
  r.name = name;
  r.statistic = d;
  r.p_value = kolmogorov_survival(std::sqrt(static_cast<double>(n)) * d);
  r.n = n;
  r.significance = significance;
  r.pass = r.p_value > significance;
  return r;
}

inline TestReport ks_test_beta(const std::vector<double>& samples,
                               const BetaParams& p, const std::string& name,
                               double significance = 0.01) {
  return ks_test(samples, [p](double x) { return beta_cdf(x, p); }, name,
                 significance);
}

inline TestReport ks_test_inverse_beta(const std::vector<double>& samples,
                                       const BetaParams& p,
                                       const std::string& name,
                                       double significance = 0.01) {
  return ks_test(samples, [p](double t) { return inverse_beta_cdf(t, p); }, name,
                 significance);
}

// One-sided stochastic-domination check: the empirical survival function of
// the samples must not exceed the reference survival function by more than
// the one-sided Dvoretzky-Kiefer-Wolfowitz band at the given level.
struct DominationReport {
  double max_violation = 0.0;
  double band = 0.0;
  std::size_t n = 0;
  bool pass = false;
};

inline DominationReport dominated_by(std::vector<double> samples,
                                     const std::function<double(double)>& survival,
                                     double level = 0.01) {
  const std::size_t n = samples.size();
  if (n == 0) throw std::invalid_argument("dominated_by: empty sample");
  std::sort(samples.begin(), samples.end());
  double worst = -1.0;
  for (std::size_t i = 0; i < n; ++i) {
    // Empirical P(X >= x_(i)) = (n - i) / n, compared just left of x_(i).
    const double emp = static_cast<double>(n - i) / n;
    worst = std::max(worst, emp - survival(samples[i]));
  }
  DominationReport r;
  r.max_violation = worst;
  r.band = std::sqrt(std::log(1.0 / level) / (2.0 * n));
  r.n = n;
  r.pass = worst <= r.band;
  return r;
}

struct TailEstimate {
  double kappa_hat = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  std::size_t k = 0;
  std::size_t n = 0;
};

inline std::size_t hill_default_k(std::size_t n) {
  return static_cast<std::size_t>(std::floor(std::pow(static_cast<double>(n), 0.6)));
}

// Hill estimator of the tail exponent from the top k order statistics, with
// the asymptotic 95% interval kappa_hat * (1 -+ 1.96 / sqrt(k)).  k = 0
// selects floor(n^0.6).
inline TailEstimate tail_exponent_hill(std::vector<double> samples,
                                       std::size_t k = 0) {
  const std::size_t n = samples.size();
  if (k == 0) k = hill_default_k(n);
  if (k < 20) throw std::invalid_argument("hill: k must be at least 20");
  if (k > n / 10) throw std::invalid_argument("hill: k must be at most n/10");
  for (double x : samples)
    if (!(x > 0.0)) throw std::invalid_argument("hill: samples must be positive");
  std::sort(samples.begin(), samples.end(), std::greater<double>());
  double s = 0.0;
  const double log_xk = std::log(samples[k]);
  for (std::size_t i = 0; i < k; ++i) s += std::log(samples[i]) - log_xk;
  const double hill = s / static_cast<double>(k);
  TailEstimate e;
  e.kappa_hat = 1.0 / hill;
  const double half = 1.96 * e.kappa_hat / std::sqrt(static_cast<double>(k));
  e.ci_lo = e.kappa_hat - half;
  e.ci_hi = e.kappa_hat + half;
  e.k = k;
  e.n = n;
  return e;
}

inline std::vector<TailEstimate> hill_sweep(const std::vector<double>& samples,
                                            const std::vector<std::size_t>& ks) {
  std::vector<TailEstimate> out;
  out.reserve(ks.size());
  for (std::size_t k : ks) out.push_back(tail_exponent_hill(samples, k));
  return out;
}

// Default sweep grid: geometric between 20 and n/10.
inline std::vector<std::size_t> hill_sweep_grid(std::size_t n, std::size_t points = 12) {
  std::vector<std::size_t> ks;
  const double lo = 20.0, hi = static_cast<double>(n) / 10.0;
  if (hi < lo) return ks;
  for (std::size_t i = 0; i < points; ++i) {
    const double t = points == 1 ? 0.0 : static_cast<double>(i) / (points - 1);
    const auto k = static_cast<std::size_t>(std::floor(lo * std::pow(hi / lo, t)));
    if (ks.empty() || k > ks.back()) ks.push_back(k);
  }
  return ks;
}

// Empirical s-th moment with a divergence diagnostic: the share of the sum
// contributed by the single largest term.  A share near one means the
// estimate tracks one excursion, the signature of a diverging moment.
struct MomentEstimate {
  double value = 0.0;
  double max_contribution = 0.0;
  double standard_error = 0.0;
  std::size_t n = 0;
};

inline MomentEstimate mc_moment(const std::vector<double>& samples, double s) {
  if (samples.empty()) throw std::invalid_argument("mc_moment: empty sample");
  double sum = 0.0, sum2 = 0.0, biggest = 0.0;
  for (double x : samples) {
    if (!(x >= 0.0)) throw std::invalid_argument("mc_moment: negative sample");
    const double t = (s == 0.0) ? 1.0 : std::pow(x, s);
    sum += t;
    sum2 += t * t;
    biggest = std::max(biggest, t);
  }
  MomentEstimate m;
  m.n = samples.size();
  m.value = sum / m.n;
  m.max_contribution = (sum > 0.0) ? biggest / sum : 0.0;
  const double var = std::max(0.0, sum2 / m.n - m.value * m.value);
  m.standard_error = std::sqrt(var / m.n);
  return m;
}

// Least-squares slope of log survival against log value over a quantile
// window of the order statistics.  For a power tail the slope estimates
// minus the tail exponent and r2 is close to one.
struct SurvivalFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  std::size_t points = 0;
};

inline SurvivalFit survival_loglog_fit(std::vector<double> samples,
                                       double q_lo = 0.9, double q_hi = 0.9999) {
  const std::size_t n = samples.size();
  if (!(0.0 < q_lo && q_lo < q_hi && q_hi < 1.0))
    throw std::invalid_argument("survival fit: bad quantile window");
  std::sort(samples.begin(), samples.end());
  const auto i_lo = static_cast<std::size_t>(q_lo * n);
  const auto i_hi = static_cast<std::size_t>(q_hi * n);
  std::vector<double> xs, ys;
  for (std::size_t i = i_lo; i < i_hi && i < n; ++i) {
    const double survival = static_cast<double>(n - i) / n;
    if (!(samples[i] > 0.0) || survival <= 0.0) continue;
    xs.push_back(std::log(samples[i]));
    ys.push_back(std::log(survival));
  }
  if (xs.size() < 30)
    throw std::invalid_argument("survival fit: fewer than 30 usable points");
  const std::size_t m = xs.size();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= m;
  my /= m;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  if (sxx <= 0.0 || syy <= 0.0)
    throw std::invalid_argument("survival fit: degenerate window");
  SurvivalFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r2 = (sxy * sxy) / (sxx * syy);
  f.points = m;
  return f;
}

}  // namespace rwde

#endif  // RWDE_STATS_HPP_
