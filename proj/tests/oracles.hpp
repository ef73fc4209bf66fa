#pragma once

// Reference computations written independently of the library code.

#include <cmath>
#include <functional>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/special_functions/beta.hpp>

namespace oracle {

// f(n) by brute-force summation over all n-hat up to far in the tail.
inline double f_series(double n) {
  const int kmax = static_cast<int>(n + 40 * std::sqrt(n) + 80);
  double sum = 0;
  for (int k = 1; k <= kmax; ++k)
    sum += std::exp(k * std::log(n) - n - std::lgamma(k + 1.0)) / k;
  return n * sum / -std::expm1(-n);
}

inline double beta_quantile(double q, double a, double b) {
  return boost::math::ibeta_inv(a, b, q);
}

inline double beta_cdf(double x, double a, double b) { return boost::math::ibeta(a, b, x); }

inline double z_for(double level) {
  return boost::math::quantile(boost::math::normal(), 0.5 + level / 2);
}

// Root of g on [lo, hi] with g(lo), g(hi) of opposite sign.
inline double bisect(const std::function<double(double)>& g, double lo, double hi) {
  double glo = g(lo);
  for (int i = 0; i < 200 && hi - lo > 1e-15 * (1 + std::abs(lo)); ++i) {
    const double mid = 0.5 * (lo + hi);
    const double gm = g(mid);
    if ((gm > 0) == (glo > 0)) {
      lo = mid;
      glo = gm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

struct Pair {
  double lower, upper;
};

// Both solutions of (p_hat - p)^2 = z^2 var(p) where var(p) is a quadratic in p
// with var(p_hat) > 0 and a positive leading coefficient of the difference.
inline Pair score_roots(double p_hat, double z, const std::function<double(double)>& var) {
  const auto g = [&](double p) { return (p_hat - p) * (p_hat - p) - z * z * var(p); };
  double step = 1e-3;
  double lo = p_hat - step;
  while (g(lo) <= 0) lo = p_hat - (step *= 2);
  step = 1e-3;
  double hi = p_hat + step;
  while (g(hi) <= 0) hi = p_hat + (step *= 2);
  return {bisect(g, lo, p_hat), bisect(g, p_hat, hi)};
}

// Score interval for counts with extra count variances s1sq, s2sq beyond
// Poisson, from the quadratic variance model in the true p.
inline Pair extra_score(double n1, double n2, double s1sq, double s2sq, double z) {
  const double n = n1 + n2;
  const double p_hat = n1 / n;
  return score_roots(p_hat, z, [&](double p) {
    return (p * (1 - p) * n + (1 - p) * (1 - p) * s1sq + p * p * s2sq) / (n * n);
  });
}

}  // namespace oracle
