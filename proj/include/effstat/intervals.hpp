#pragma once

#include <string>
#include <string_view>
#include <utility>

#include "effstat/estimators.hpp"
#include "effstat/variance.hpp"

namespace effstat {

enum class Method {
  Wilson,
  WilsonPoisson,
  WilsonWeighted,
  WilsonExtra,
  ClopperPearson,
  NormalApprox,
  BayesianUniform,
  BayesianJeffreys,
};

std::string to_string(Method method);

struct Interval {
  double lower = 0;
  double upper = 1;
  double level = 0;
  Method method = Method::Wilson;
  /// Bounds were truncated to [0, 1] (or p-hat was clipped into it first).
  bool clipped = false;

  bool contains(double p) const { return lower <= p && p <= upper; }
  double width() const { return upper - lower; }
};

enum class PriorKind { Uniform, JeffreysBinomial };

/// Root pair of (p_hat - p)^2 = z^2 p (1 - p) f / n. Written in a
/// cancellation-free form: the lower bound is exactly 0 at p_hat = 0 and the
/// upper bound exactly 1 at p_hat = 1.
std::pair<double, double> generalized_wilson_bounds(double p_hat, double n, double f, double z);

/// Standard score interval.
Interval wilson(const EfficiencyCounts& counts, double level);

/// Score interval with the variance inflated by f(n-hat).
Interval wilson_poisson(const EfficiencyCounts& counts, double level, const FnMode& mode);

/// Score interval at the effective count, f from the large-n series.
Interval wilson_weighted(const WeightedEstimate& est, double level);

/// Unclipped roots of the score equation with extra count fluctuations
/// (N1N2 inputs, rho = 0). Solved from the quadratic coefficients.
/// Throws DegenerateInterval when the leading coefficient is not positive or
/// the discriminant is negative.
std::pair<double, double> wilson_extra_roots(const ExtraFluctuationInputs& in, double level);

/// wilson_extra_roots clipped to [0, 1].
Interval wilson_extra(const ExtraFluctuationInputs& in, double level);

/// Equal-tailed exact interval from Beta quantiles.
Interval clopper_pearson(const EfficiencyCounts& counts, double level);

/// p_hat -+ z sqrt(p_hat (1 - p_hat) / n), clipped to [0, 1].
Interval normal_approx(const EfficiencyCounts& counts, double level);

/// p_hat -+ z sqrt(variance), clipped to [0, 1].
Interval normal_approx(double p_hat, double variance, double level);

/// Equal-tailed credible interval from the Beta posterior. No boundary
/// modification at k = 0 or k = n.
Interval bayesian(const EfficiencyCounts& counts, double level, PriorKind prior);

}  // namespace effstat
