#include "effstat/variance.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

#include "effstat/error.hpp"
#include "effstat/probability.hpp"
#include "effstat/summation.hpp"

namespace effstat {

namespace {

void require_positive(double n, const char* what) {
  if (!(n > 0) || !std::isfinite(n))
    throw DomainError(std::string(what) + " must be finite and positive");
}

void require_probability(double p) {
  if (!(p >= 0 && p <= 1)) throw DomainError("probability outside [0, 1]");
}

constexpr double kBlendQ = 0.82;
constexpr double kBlendCentre = 2.92;
constexpr double kBlendWidth = 0.18;
constexpr int kQuietTerms = 30;

}  // namespace

FnMode FnMode::exact(double tolerance) {
  if (!(tolerance > 0 && tolerance <= 1e-3))
    throw DomainError("exact f(n) tolerance must lie in (0, 1e-3]");
  return {Kind::Exact, tolerance};
}

FnMode parse_fn_mode(std::string_view text) {
  if (text == "unity") return FnMode::unity();
  if (text == "large-n") return FnMode::large_n();
  if (text == "small-n") return FnMode::small_n();
  if (text == "blend") return FnMode::blend();
  if (text == "exact") return FnMode::exact();
  if (text.starts_with("exact:")) {
    const auto tol_text = text.substr(6);
    double tol = 0;
    auto [ptr, ec] = std::from_chars(tol_text.data(), tol_text.data() + tol_text.size(), tol);
    if (ec != std::errc() || ptr != tol_text.data() + tol_text.size())
      throw DomainError("cannot parse tolerance in '" + std::string(text) + "'");
    return FnMode::exact(tol);
  }
  throw DomainError("unknown f(n) mode '" + std::string(text) + "'");
}

std::string to_string(const FnMode& mode) {
  switch (mode.kind) {
    case FnMode::Kind::Unity: return "unity";
    case FnMode::Kind::LargeN: return "large-n";
    case FnMode::Kind::SmallN: return "small-n";
    case FnMode::Kind::Blend: return "blend";
    case FnMode::Kind::Exact: {
      if (mode.tolerance == 1e-12) return "exact";
      std::ostringstream out;
      out << "exact:" << mode.tolerance;
      return out.str();
    }
  }
  return "unknown";
}

double var_binomial(double p, double n) {
  require_probability(p);
  require_positive(n, "n");
  return p * (1 - p) / n;
}

double f_exact(double n, double tol) {
  require_positive(n, "n");
  if (!(tol > 0)) throw DomainError("tolerance must be positive");

  const double mode = std::max(1.0, std::floor(n));
  const double p_mode = std::exp(log_pmf_poisson(static_cast<std::int64_t>(mode), n));
  CompensatedSum sum;
  sum += n / mode * p_mode;

  // Upper tail: Pois(k+1) = Pois(k) n / (k+1).
  double pk = p_mode;
  int quiet = 0;
  for (double k = mode + 1; quiet < kQuietTerms; k += 1) {
    pk *= n / k;
    const double term = n / k * pk;
    sum += term;
    quiet = term < tol * sum.value() ? quiet + 1 : 0;
  }
  // Lower tail down to k = 1: Pois(k-1) = Pois(k) k / n.
  pk = p_mode;
  quiet = 0;
  for (double k = mode - 1; k >= 1 && quiet < kQuietTerms; k -= 1) {
    pk *= (k + 1) / n;
    const double term = n / k * pk;
    sum += term;
    quiet = term < tol * sum.value() ? quiet + 1 : 0;
  }
  return sum.value() / -std::expm1(-n);
}

double f_large_n(double n) {
  require_positive(n, "n");
  return (2 * n + n * n + n * n * n + 6) / (n * n * n);
}

double f_small_n(double n) {
  require_positive(n, "n");
  return n - n * n / 4;
}

double q_log(double x, double q) {
  if (!(x > 0)) throw DomainError("q-logarithm requires x > 0");
  if (q == 1) return std::log(x);
  return (std::pow(x, 1 - q) - 1) / (1 - q);
}

double f_approx_transition(double n) {
  require_positive(n, "n");
  // q_log written out with exp/log; pow is several times slower here.
  constexpr double power = 1 - kBlendQ;
  static const double centre = q_log(kBlendCentre, kBlendQ);
  const double ql = (std::exp(power * std::log(n)) - 1) / power;
  return 1 / (1 + std::exp((centre - ql) / kBlendWidth));
}

double f_approx(double n) {
  const double z = f_approx_transition(n);
  const double n3 = n * n * n;
  return (1 - z) * (n - n * n / 4) + z * (2 * n + n * n + n3 + 6) / n3;
}

double f_of(const FnMode& mode, double n) {
  switch (mode.kind) {
    case FnMode::Kind::Unity:
      require_positive(n, "n");
      return 1;
    case FnMode::Kind::Exact: return f_exact(n, mode.tolerance);
    case FnMode::Kind::LargeN: return f_large_n(n);
    case FnMode::Kind::SmallN: return f_small_n(n);
    case FnMode::Kind::Blend: return f_approx(n);
  }
  throw DomainError("invalid f(n) mode");
}

double var_poisson_trials(double p, double n, const FnMode& mode) {
  return var_binomial(p, n) * f_of(mode, n);
}

double effective_count(std::span<const double> weights) {
  if (weights.empty()) throw DomainError("effective count of an empty sample");
  CompensatedSum sw;
  CompensatedSum sw2;
  for (const double w : weights) {
    sw += w;
    sw2 += w * w;
  }
  if (sw2.value() <= 0 || sw.value() == 0)
    throw DomainError("effective count undefined for zero total weight");
  return sw.value() * sw.value() / sw2.value();
}

double var_weighted(double p, double n_eff, const FnMode& mode) {
  return var_binomial(p, n_eff) * f_of(mode, n_eff);
}

double var_xdep(std::span<const CovariateBin> bins, double n) {
  require_positive(n, "n");
  if (bins.size() < 2) throw DomainError("covariate variance needs at least two bins");
  CompensatedSum counts;
  CompensatedSum cw;
  CompensatedSum cwp;
  for (const auto& bin : bins) {
    if (bin.count < 1) throw DomainError("empty covariate bin");
    require_probability(bin.p);
    const auto c = static_cast<double>(bin.count);
    counts += c;
    cw += c * bin.w;
    cwp += c * bin.w * bin.p;
  }
  if (cw.value() == 0) throw DomainError("covariate bins carry zero total weight");
  const double p_bar = cwp.value() / cw.value();
  CompensatedSum binomial_term;
  CompensatedSum spread_term;
  for (const auto& bin : bins) {
    const auto c = static_cast<double>(bin.count);
    const double w2 = bin.w * bin.w;
    binomial_term += c * bin.p * (1 - bin.p) * w2;
    spread_term += c * (bin.p - p_bar) * (bin.p - p_bar) * w2;
  }
  const double mean_w = cw.value() / counts.value();
  return (binomial_term.value() + spread_term.value()) / (n * mean_w * mean_w * counts.value());
}

double sigma_b(double var_nk, double nk) {
  const double excess = var_nk - nk;
  // Tolerate round-off when var_nk was built as nk + 0.
  if (excess < -1e-12 * std::max(1.0, std::abs(nk)))
    throw DomainError("estimated variance " + std::to_string(var_nk) +
                      " lies below the Poisson floor " + std::to_string(nk));
  return std::sqrt(std::max(0.0, excess));
}

ExtraFluctuationInputs ExtraFluctuationInputs::from_n1_n2(double n1, double n2, double var1,
                                                          double var2, double rho) {
  return {n1, n2, Parameterization::N1N2, var1, var2, rho};
}

ExtraFluctuationInputs ExtraFluctuationInputs::from_n1_n(double n1, double n, double var1,
                                                         double var_n, double rho) {
  return {n1, n, Parameterization::N1N, var1, var_n, rho};
}

ExtraVariance var_extra(const ExtraFluctuationInputs& in) {
  if (!(in.rho >= -1 && in.rho <= 1)) throw DomainError("correlation must lie in [-1, 1]");
  if (!(in.n1 >= 0) || !(in.n2_or_n >= 0) || !std::isfinite(in.n1) || !std::isfinite(in.n2_or_n))
    throw DomainError("counts must be finite and non-negative");
  const double s1 = sigma_b(in.var1, in.n1);

  if (in.parameterization == ExtraFluctuationInputs::Parameterization::N1N2) {
    const double n1 = in.n1;
    const double n2 = in.n2_or_n;
    const double s2 = sigma_b(in.var2_or_varn, n2);
    const double n = n1 + n2;
    if (!(n > 0)) throw DomainError("total count must be positive");
    const double n4 = n * n * n * n;
    const double value =
        (n1 * n1 * in.var2_or_varn + n2 * n2 * in.var1 - 2 * in.rho * n1 * n2 * s1 * s2) / n4;
    return {value, false};
  }

  const double n1 = in.n1;
  const double n = in.n2_or_n;
  const double v1 = in.var1;
  const double vn = in.var2_or_varn;
  if (!(n > n1)) throw DomainError("total count must exceed the success count");
  const double n3 = n * n * n;
  const double n4 = n3 * n;
  double value = (n * n * v1 + vn * n1 * n1 - 2 * n * n1 * v1) / n4;
  // sigma_2b^2 implied by var(n) when rho = 0.
  const double radicand = in.rho * in.rho * (v1 - n1) + vn - n + n1 - v1;
  bool inconsistent = radicand < 0;
  if (in.rho != 0) {
    if (radicand < 0)
      throw DomainError("var(n) too small for the given var(n1) and correlation");
    value += 2 * in.rho * n1 / n3 * (in.rho * (v1 - n1) - s1 * std::sqrt(radicand));
  }
  return {value, inconsistent || value < 0};
}

}  // namespace effstat
