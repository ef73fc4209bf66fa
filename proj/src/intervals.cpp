#include "effstat/intervals.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "effstat/error.hpp"
#include "effstat/probability.hpp"

namespace effstat {

namespace {

Interval clip(double lower, double upper, double level, Method method, bool clipped = false) {
  Interval out{lower, upper, level, method, clipped};
  if (out.lower < 0) {
    out.lower = 0;
    out.clipped = true;
  }
  if (out.upper > 1) {
    out.upper = 1;
    out.clipped = true;
  }
  // Clipping a root pair lying entirely outside [0, 1] collapses it.
  if (out.lower > 1) {
    out.lower = 1;
    out.clipped = true;
  }
  if (out.upper < 0) {
    out.upper = 0;
    out.clipped = true;
  }
  return out;
}

}  // namespace

std::string to_string(Method method) {
  switch (method) {
    case Method::Wilson: return "wilson";
    case Method::WilsonPoisson: return "wilson-poisson";
    case Method::WilsonWeighted: return "wilson-weighted";
    case Method::WilsonExtra: return "wilson-extra";
    case Method::ClopperPearson: return "clopper-pearson";
    case Method::NormalApprox: return "normal";
    case Method::BayesianUniform: return "bayes-uniform";
    case Method::BayesianJeffreys: return "bayes-jeffreys";
  }
  return "unknown";
}

std::pair<double, double> generalized_wilson_bounds(double p_hat, double n, double f, double z) {
  if (!(n > 0)) throw DomainError("score interval requires n > 0");
  if (!(f > 0)) throw DomainError("score interval requires f(n) > 0");
  if (!(p_hat >= 0 && p_hat <= 1)) throw DomainError("p-hat outside [0, 1]");
  const double k = z * z * f / n;
  const double root = (z / n) * std::sqrt(p_hat * (1 - p_hat) * n * f + 0.25 * z * z * f * f);
  // (c - r) = (c^2 - r^2) / (c + r) and c^2 - r^2 = p_hat^2 (1 + k).
  const double c_low = p_hat + 0.5 * k;
  const double c_high = (1 - p_hat) + 0.5 * k;
  const double lower = p_hat * p_hat / (c_low + root);
  const double upper = 1 - (1 - p_hat) * (1 - p_hat) / (c_high + root);
  return {lower, upper};
}

Interval wilson(const EfficiencyCounts& counts, double level) {
  const double p_hat = estimate(counts);
  const auto [lo, hi] =
      generalized_wilson_bounds(p_hat, static_cast<double>(counts.total()), 1.0, z_from_level(level));
  return {lo, hi, level, Method::Wilson, false};
}

Interval wilson_poisson(const EfficiencyCounts& counts, double level, const FnMode& mode) {
  const double p_hat = estimate(counts);
  const auto n = static_cast<double>(counts.total());
  const auto [lo, hi] = generalized_wilson_bounds(p_hat, n, f_of(mode, n), z_from_level(level));
  return {lo, hi, level, Method::WilsonPoisson, false};
}

Interval wilson_weighted(const WeightedEstimate& est, double level) {
  if (!(est.n_eff_hat > 0) || !std::isfinite(est.n_eff_hat))
    throw DomainError("weighted interval requires a positive effective count");
  const double p_hat = std::clamp(est.p_hat, 0.0, 1.0);
  const auto [lo, hi] = generalized_wilson_bounds(p_hat, est.n_eff_hat, f_large_n(est.n_eff_hat),
                                                  z_from_level(level));
  return {lo, hi, level, Method::WilsonWeighted, p_hat != est.p_hat};
}

std::pair<double, double> wilson_extra_roots(const ExtraFluctuationInputs& in, double level) {
  if (in.parameterization != ExtraFluctuationInputs::Parameterization::N1N2)
    throw DomainError("extra-fluctuation score interval takes (n1, n2) inputs");
  if (in.rho != 0) throw DomainError("extra-fluctuation score interval assumes rho = 0");
  if (!(in.n1 >= 0) || !(in.n2_or_n >= 0) || !(in.n1 + in.n2_or_n > 0))
    throw DomainError("counts must be non-negative with a positive total");
  const double s1 = sigma_b(in.var1, in.n1);
  const double s2 = sigma_b(in.var2_or_varn, in.n2_or_n);
  const double n = in.n1 + in.n2_or_n;
  const double p_hat = in.n1 / n;
  const double z2 = z_from_level(level) * z_from_level(level);

  // n^2 var(p) = A p^2 + B p + C
  const double s1sq = s1 * s1;
  const double quad_a = s1sq + s2 * s2 - n;
  const double quad_b = n - 2 * s1sq;
  const double quad_c = s1sq;
  // (p_hat - p)^2 = z^2/n^2 (A p^2 + B p + C)  ->  a p^2 + b p + c = 0
  const double a = 1 - z2 * quad_a / (n * n);
  const double b = -(2 * p_hat + z2 * quad_b / (n * n));
  const double c = p_hat * p_hat - z2 * quad_c / (n * n);
  const double disc = b * b - 4 * a * c;
  if (!(a > 0) || disc < 0) {
    std::ostringstream msg;
    msg << "no finite score interval: a=" << a << " b=" << b << " c=" << c;
    throw DegenerateInterval(msg.str(), a, b, c);
  }
  const double q = -0.5 * (b + std::copysign(std::sqrt(disc), b));
  double r1 = q / a;
  double r2 = q != 0 ? c / q : r1;
  if (r1 > r2) std::swap(r1, r2);
  return {r1, r2};
}

Interval wilson_extra(const ExtraFluctuationInputs& in, double level) {
  const auto [lo, hi] = wilson_extra_roots(in, level);
  return clip(lo, hi, level, Method::WilsonExtra);
}

Interval clopper_pearson(const EfficiencyCounts& counts, double level) {
  estimate(counts);
  if (!(level > 0 && level < 1)) throw DomainError("confidence level must lie in (0, 1)");
  const double alpha = 1 - level;
  const auto k = static_cast<double>(counts.successes);
  const auto n = static_cast<double>(counts.total());
  const double lower = counts.successes == 0 ? 0.0 : quantile_beta(alpha / 2, k, n - k + 1);
  const double upper = counts.failures == 0 ? 1.0 : quantile_beta(1 - alpha / 2, k + 1, n - k);
  return {lower, upper, level, Method::ClopperPearson, false};
}

Interval normal_approx(const EfficiencyCounts& counts, double level) {
  const double p_hat = estimate(counts);
  return normal_approx(p_hat, p_hat * (1 - p_hat) / static_cast<double>(counts.total()), level);
}

Interval normal_approx(double p_hat, double variance, double level) {
  if (!(variance >= 0)) throw DomainError("variance must be non-negative");
  const double half = z_from_level(level) * std::sqrt(variance);
  return clip(p_hat - half, p_hat + half, level, Method::NormalApprox);
}

Interval bayesian(const EfficiencyCounts& counts, double level, PriorKind prior) {
  estimate(counts);
  if (!(level > 0 && level < 1)) throw DomainError("confidence level must lie in (0, 1)");
  const double a0 = prior == PriorKind::Uniform ? 1.0 : 0.5;
  const double alpha = 1 - level;
  const double a = static_cast<double>(counts.successes) + a0;
  const double b = static_cast<double>(counts.failures) + a0;
  return {quantile_beta(alpha / 2, a, b), quantile_beta(1 - alpha / 2, a, b), level,
          prior == PriorKind::Uniform ? Method::BayesianUniform : Method::BayesianJeffreys, false};
}

}  // namespace effstat
