#pragma once

#include <cstdint>
#include <vector>

namespace effstat {

// Probability mass functions. Arguments beyond 20 are evaluated in log space.

double pmf_poisson(std::int64_t k, double mu);
double log_pmf_poisson(std::int64_t k, double mu);

/// C(n,k) p^k (1-p)^(n-k), exact at p = 0 and p = 1 (0^0 = 1).
double pmf_binomial(std::int64_t k, std::int64_t n, double p);

/// All binomial probabilities for k = 0..n.
std::vector<double> binomial_pmf_row(std::int64_t n, double p);

/// Poisson probabilities for k = 0..kmax.
std::vector<double> poisson_pmf_row(double mu, std::int64_t kmax);

/// Smallest K with P(k > K) < tail for k ~ Poisson(mu). The dropped mass is
/// written to `dropped` when non-null.
std::int64_t poisson_upper_cut(double mu, double tail, double* dropped = nullptr);

/// Regularized incomplete beta function I_x(a, b).
double incomplete_beta(double x, double a, double b);

/// Density of Beta(a, b) at x.
double beta_pdf(double x, double a, double b);

/// Inverse of I_x(a, b) in x. Newton steps kept inside a bisection bracket.
/// Throws NumericError with the last bracket if the iteration cap is hit.
double quantile_beta(double q, double a, double b);

double normal_cdf(double x);

/// Standard normal quantile, accurate to ~1e-15 relative.
double normal_quantile(double p);

/// z such that a central interval of +-z standard deviations holds `level`
/// probability. Equivalently sqrt of the chi-square(1) quantile at `level`.
double z_from_level(double level);

}  // namespace effstat
