#include "effstat/probability.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "effstat/error.hpp"

namespace effstat {

namespace {

constexpr int kDirectLimit = 20;

void require_mean(double mu) {
  if (!std::isfinite(mu) || mu <= 0)
    throw DomainError("Poisson mean must be finite and positive, got " + std::to_string(mu));
}

double log_choose(std::int64_t n, std::int64_t k) {
  return std::lgamma(static_cast<double>(n) + 1) - std::lgamma(static_cast<double>(k) + 1) -
         std::lgamma(static_cast<double>(n - k) + 1);
}

double log_beta(double a, double b) { return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b); }

// Continued fraction for I_x(a,b), modified Lentz. Converges for x < (a+1)/(a+b+2).
double beta_continued_fraction(double x, double a, double b) {
  constexpr double kTiny = 1e-300;
  constexpr double kEps = 1e-16;
  const double qab = a + b;
  const double qap = a + 1;
  const double qam = a - 1;
  double c = 1;
  double d = 1 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1 / d;
  double h = d;
  for (int m = 1; m <= 10000; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1) < kEps) return h;
  }
  throw NumericError("incomplete beta continued fraction did not converge", x, x);
}

}  // namespace

double log_pmf_poisson(std::int64_t k, double mu) {
  require_mean(mu);
  if (k < 0) throw DomainError("Poisson count must be non-negative");
  const auto kd = static_cast<double>(k);
  return kd * std::log(mu) - mu - std::lgamma(kd + 1);
}

double pmf_poisson(std::int64_t k, double mu) {
  require_mean(mu);
  if (k < 0) throw DomainError("Poisson count must be non-negative");
  if (k > kDirectLimit) return std::exp(log_pmf_poisson(k, mu));
  double term = std::exp(-mu);
  for (std::int64_t i = 1; i <= k; ++i) term *= mu / static_cast<double>(i);
  return term;
}

double pmf_binomial(std::int64_t k, std::int64_t n, double p) {
  if (n < 0 || k < 0 || k > n) throw DomainError("binomial pmf requires 0 <= k <= n");
  if (!(p >= 0 && p <= 1)) throw DomainError("binomial probability outside [0, 1]");
  if (p == 0) return k == 0 ? 1.0 : 0.0;
  if (p == 1) return k == n ? 1.0 : 0.0;
  if (n <= kDirectLimit) {
    double choose = 1;
    for (std::int64_t i = 1; i <= k; ++i)
      choose = choose * static_cast<double>(n - k + i) / static_cast<double>(i);
    return choose * std::pow(p, static_cast<double>(k)) *
           std::pow(1 - p, static_cast<double>(n - k));
  }
  return std::exp(log_choose(n, k) + static_cast<double>(k) * std::log(p) +
                  static_cast<double>(n - k) * std::log1p(-p));
}

std::vector<double> binomial_pmf_row(std::int64_t n, double p) {
  std::vector<double> row(static_cast<std::size_t>(n + 1));
  for (std::int64_t k = 0; k <= n; ++k) row[static_cast<std::size_t>(k)] = pmf_binomial(k, n, p);
  return row;
}

std::vector<double> poisson_pmf_row(double mu, std::int64_t kmax) {
  require_mean(mu);
  std::vector<double> row(static_cast<std::size_t>(kmax + 1));
  const double log_mu = std::log(mu);
  for (std::int64_t k = 0; k <= kmax; ++k) {
    const auto kd = static_cast<double>(k);
    row[static_cast<std::size_t>(k)] = std::exp(kd * log_mu - mu - std::lgamma(kd + 1));
  }
  return row;
}

std::int64_t poisson_upper_cut(double mu, double tail, double* dropped) {
  require_mean(mu);
  // Far enough out that the remaining mass is below double resolution.
  auto k = static_cast<std::int64_t>(std::ceil(mu + 40 * std::sqrt(mu) + 60));
  double mass = 0;
  while (k > 0) {
    const double next = mass + pmf_poisson(k, mu);
    if (next >= tail) break;
    mass = next;
    --k;
  }
  if (dropped != nullptr) *dropped = mass;
  return k;
}

double incomplete_beta(double x, double a, double b) {
  if (!(a > 0) || !(b > 0)) throw DomainError("incomplete beta requires a > 0 and b > 0");
  if (!(x >= 0 && x <= 1)) throw DomainError("incomplete beta requires 0 <= x <= 1");
  if (x == 0) return 0;
  if (x == 1) return 1;
  const double front = std::exp(a * std::log(x) + b * std::log1p(-x) - log_beta(a, b));
  if (x < (a + 1) / (a + b + 2)) return front * beta_continued_fraction(x, a, b) / a;
  return 1 - front * beta_continued_fraction(1 - x, b, a) / b;
}

double beta_pdf(double x, double a, double b) {
  if (x <= 0 || x >= 1) {
    if (x == 0 && a == 1) return 1 / std::exp(log_beta(a, b));
    if (x == 1 && b == 1) return 1 / std::exp(log_beta(a, b));
    return 0;
  }
  return std::exp((a - 1) * std::log(x) + (b - 1) * std::log1p(-x) - log_beta(a, b));
}

double quantile_beta(double q, double a, double b) {
  if (!(a > 0) || !(b > 0)) throw DomainError("beta quantile requires a > 0 and b > 0");
  if (!(q >= 0 && q <= 1)) throw DomainError("beta quantile requires 0 <= q <= 1");
  if (q == 0) return 0;
  if (q == 1) return 1;

  constexpr int kMaxIter = 300;
  constexpr double kWidth = 1e-15;
  double lo = 0;
  double hi = 1;
  double x = a / (a + b);
  for (int iter = 0; iter < kMaxIter; ++iter) {
    const double residual = incomplete_beta(x, a, b) - q;
    if (residual == 0) return x;
    if (residual < 0) lo = x; else hi = x;
    if (hi - lo < kWidth) return 0.5 * (lo + hi);

    const double density = beta_pdf(x, a, b);
    double next = density > 0 ? x - residual / density : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - x) <= 4 * std::numeric_limits<double>::epsilon() * x) return next;
    x = next;
  }
  throw NumericError("beta quantile did not converge", lo, hi);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_quantile(double p) {
  if (!(p > 0 && p < 1)) throw DomainError("normal quantile requires 0 < p < 1");
  // Acklam's rational approximation, then one Halley step.
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double kLow = 0.02425;
  double x;
  if (p < kLow) {
    const double q = std::sqrt(-2 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
  } else if (p <= 1 - kLow) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1);
  } else {
    const double q = std::sqrt(-2 * std::log1p(-p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
  }
  for (int step = 0; step < 2; ++step) {
    // Work in the tail closest to p to avoid cancellation.
    const double e = x < 0 ? 0.5 * std::erfc(-x / std::numbers::sqrt2) - p
                           : (1 - p) - 0.5 * std::erfc(x / std::numbers::sqrt2);
    const double u = e * std::sqrt(2 * std::numbers::pi) * std::exp(0.5 * x * x);
    x -= u / (1 + 0.5 * x * u);
  }
  return x;
}

double z_from_level(double level) {
  if (!(level > 0 && level < 1)) throw DomainError("confidence level must lie in (0, 1)");
  return -normal_quantile(0.5 * (1 - level));
}

}  // namespace effstat
