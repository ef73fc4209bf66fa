#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace effstat {

/// Which correction f(n) multiplies the binomial variance when the number of
/// trials is Poisson distributed (n-hat = 0 outcomes excluded).
struct FnMode {
  enum class Kind { Exact, LargeN, SmallN, Blend, Unity };

  Kind kind = Kind::Unity;
  double tolerance = 1e-12;  // only used by Exact

  static FnMode exact(double tolerance = 1e-12);
  static FnMode large_n() { return {Kind::LargeN}; }
  static FnMode small_n() { return {Kind::SmallN}; }
  static FnMode blend() { return {Kind::Blend}; }
  static FnMode unity() { return {Kind::Unity}; }

  friend bool operator==(const FnMode&, const FnMode&) = default;
};

/// "unity", "exact", "exact:<tol>", "large-n", "small-n", "blend".
FnMode parse_fn_mode(std::string_view text);
std::string to_string(const FnMode& mode);

/// p (1 - p) / n.
double var_binomial(double p, double n);

/// f(n) by direct summation of (n / k) Pois(k; n) over k >= 1, renormalized by
/// 1 - Pois(0; n). Stops once 30 consecutive terms on a tail each add less
/// than tol times the running sum.
double f_exact(double n, double tol = 1e-12);

/// Large-n series through O(1/n^3): (2n + n^2 + n^3 + 6) / n^3.
double f_large_n(double n);

/// Small-n branch n - n^2/4.
double f_small_n(double n);

/// q-logarithm (x^(1-q) - 1) / (1 - q); natural log at q = 1.
double q_log(double x, double q);

/// Logistic blend of f_small_n and f_large_n in q-log space (q = 0.82,
/// centre 2.92, width 0.18). Within 1.7 % of f_exact everywhere.
double f_approx(double n);

/// Blend weight of f_large_n inside f_approx.
double f_approx_transition(double n);

double f_of(const FnMode& mode, double n);

/// Variance of p-hat for Poisson-distributed trials with expectation n.
double var_poisson_trials(double p, double n, const FnMode& mode);

/// (sum w)^2 / sum w^2 with compensated sums.
double effective_count(std::span<const double> weights);

/// p (1 - p) / n_eff * f(n_eff). The large-n series is the recommended mode.
double var_weighted(double p, double n_eff, const FnMode& mode = FnMode::large_n());

/// Summary of one covariate bin: success fraction, mean weight, event count.
struct CovariateBin {
  double p;
  double w;
  std::int64_t count;
};

/// Asymptotic variance of the weighted estimator when efficiency and weight
/// both depend on a covariate. Expectations are replaced by count-weighted bin
/// means.
double var_xdep(std::span<const CovariateBin> bins, double n);

/// sqrt(var(n_k) - n_k): the spread of a count estimate above its Poisson floor.
double sigma_b(double var_nk, double nk);

/// Inputs for the variance of p-hat when the counts carry extra fluctuations.
struct ExtraFluctuationInputs {
  enum class Parameterization { N1N2, N1N };

  double n1 = 0;
  double n2_or_n = 0;  // n2 in N1N2 mode, total n in N1N mode
  Parameterization parameterization = Parameterization::N1N2;
  double var1 = 0;
  double var2_or_varn = 0;
  double rho = 0;

  static ExtraFluctuationInputs from_n1_n2(double n1, double n2, double var1, double var2,
                                           double rho = 0);
  static ExtraFluctuationInputs from_n1_n(double n1, double n, double var1, double var_n,
                                          double rho = 0);
};

struct ExtraVariance {
  double value = 0;
  /// Set when the sample estimates are mutually inconsistent (the true
  /// variance is never negative); only possible in N1N mode.
  bool fluctuation_artifact = false;
};

ExtraVariance var_extra(const ExtraFluctuationInputs& in);

}  // namespace effstat
