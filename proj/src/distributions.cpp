#include "effstat/distributions.hpp"

#include <charconv>
#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

#include "effstat/error.hpp"
#include "effstat/probability.hpp"

namespace effstat {

namespace {

// Inversion by searching outward from the mode. Visits outcomes in order of
// decreasing probability (roughly), so the expected cost is O(sd).
// `up(k, pk)` returns P(k+1), `down(k, pk)` returns P(k-1).
template <class Up, class Down>
std::int64_t search_from_mode(RngStream& rng, std::int64_t mode, double p_mode, std::int64_t lo_lim,
                              std::int64_t hi_lim, Up up, Down down) {
  const double u = rng.uniform();
  double cum = p_mode;
  if (u < cum) return mode;
  std::int64_t lo = mode;
  std::int64_t hi = mode;
  double p_lo = p_mode;
  double p_hi = p_mode;
  while (lo > lo_lim || hi < hi_lim) {
    if (hi < hi_lim) {
      p_hi = up(hi, p_hi);
      ++hi;
      cum += p_hi;
      if (u < cum) return hi;
    }
    if (lo > lo_lim) {
      p_lo = down(lo, p_lo);
      --lo;
      cum += p_lo;
      if (u < cum) return lo;
    }
    if (p_hi == 0 && p_lo == 0) break;
  }
  // Rounding left u above the accumulated mass.
  return mode;
}

double parse_number(std::string_view text) {
  double value = 0;
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last)
    throw DomainError("cannot parse number '" + std::string(text) + "'");
  return value;
}

}  // namespace

std::int64_t sample(RngStream& rng, const Poisson& d) {
  validate(d);
  if (d.mean == 0) return 0;
  const double mu = d.mean;
  const auto mode = static_cast<std::int64_t>(std::floor(mu));
  const double p_mode = std::exp(log_pmf_poisson(mode, mu));
  const auto hi_lim = static_cast<std::int64_t>(std::ceil(mu + 40 * std::sqrt(mu) + 60));
  return search_from_mode(
      rng, mode, p_mode, 0, hi_lim,
      [mu](std::int64_t k, double pk) { return pk * mu / static_cast<double>(k + 1); },
      [mu](std::int64_t k, double pk) { return pk * static_cast<double>(k) / mu; });
}

std::int64_t sample(RngStream& rng, const Binomial& d) {
  validate(d);
  const std::int64_t n = d.trials;
  const double p = d.p;
  if (n == 0 || p == 0) return 0;
  if (p == 1) return n;
  const double odds = p / (1 - p);
  auto mode = static_cast<std::int64_t>(std::floor(static_cast<double>(n + 1) * p));
  if (mode > n) mode = n;
  const double p_mode = pmf_binomial(mode, n, p);
  return search_from_mode(
      rng, mode, p_mode, 0, n,
      [n, odds](std::int64_t k, double pk) {
        return pk * static_cast<double>(n - k) / static_cast<double>(k + 1) * odds;
      },
      [n, odds](std::int64_t k, double pk) {
        return pk * static_cast<double>(k) / static_cast<double>(n - k + 1) / odds;
      });
}

bool sample(RngStream& rng, const Bernoulli& d) {
  validate(d);
  return rng.uniform() < d.p;
}

double sample(RngStream& rng, const Normal& d) {
  validate(d);
  // Box-Muller, cosine branch only so that one draw uses exactly two words.
  const double u1 = 1 - rng.uniform();
  const double u2 = rng.uniform();
  return d.mean + d.sigma * std::sqrt(-2 * std::log(u1)) * std::cos(2 * std::numbers::pi * u2);
}

double sample(RngStream& rng, const Exponential& d) {
  validate(d);
  return -d.mean * std::log1p(-rng.uniform());
}

double sample(RngStream& rng, const Uniform& d) {
  validate(d);
  return d.lo + (d.hi - d.lo) * rng.uniform();
}

double sample(RngStream& rng, const Distribution& d) {
  return std::visit(
      [&rng](const auto& dist) -> double {
        using T = std::decay_t<decltype(dist)>;
        if constexpr (std::is_same_v<T, Constant>) {
          return dist.value;
        } else {
          return static_cast<double>(sample(rng, dist));
        }
      },
      d);
}

void validate(const Distribution& d) {
  std::visit(
      [](const auto& dist) {
        using T = std::decay_t<decltype(dist)>;
        if constexpr (std::is_same_v<T, Poisson>) {
          if (!std::isfinite(dist.mean) || dist.mean < 0)
            throw DomainError("Poisson mean must be finite and >= 0");
        } else if constexpr (std::is_same_v<T, Binomial>) {
          if (dist.trials < 0) throw DomainError("binomial trials must be >= 0");
          if (!(dist.p >= 0 && dist.p <= 1)) throw DomainError("binomial p outside [0, 1]");
        } else if constexpr (std::is_same_v<T, Bernoulli>) {
          if (!(dist.p >= 0 && dist.p <= 1)) throw DomainError("Bernoulli p outside [0, 1]");
        } else if constexpr (std::is_same_v<T, Normal>) {
          if (!std::isfinite(dist.mean) || !(dist.sigma > 0) || !std::isfinite(dist.sigma))
            throw DomainError("normal distribution requires finite mean and sigma > 0");
        } else if constexpr (std::is_same_v<T, Exponential>) {
          if (!(dist.mean > 0) || !std::isfinite(dist.mean))
            throw DomainError("exponential mean must be finite and > 0");
        } else if constexpr (std::is_same_v<T, Uniform>) {
          if (!std::isfinite(dist.lo) || !std::isfinite(dist.hi) || !(dist.lo < dist.hi))
            throw DomainError("uniform distribution requires lo < hi");
        } else {
          if (!std::isfinite(dist.value)) throw DomainError("constant must be finite");
        }
      },
      d);
}

double mean(const Distribution& d) {
  return std::visit(
      [](const auto& dist) -> double {
        using T = std::decay_t<decltype(dist)>;
        if constexpr (std::is_same_v<T, Poisson>) return dist.mean;
        else if constexpr (std::is_same_v<T, Binomial>) return static_cast<double>(dist.trials) * dist.p;
        else if constexpr (std::is_same_v<T, Bernoulli>) return dist.p;
        else if constexpr (std::is_same_v<T, Normal>) return dist.mean;
        else if constexpr (std::is_same_v<T, Exponential>) return dist.mean;
        else if constexpr (std::is_same_v<T, Uniform>) return 0.5 * (dist.lo + dist.hi);
        else return dist.value;
      },
      d);
}

double variance(const Distribution& d) {
  return std::visit(
      [](const auto& dist) -> double {
        using T = std::decay_t<decltype(dist)>;
        if constexpr (std::is_same_v<T, Poisson>) return dist.mean;
        else if constexpr (std::is_same_v<T, Binomial>)
          return static_cast<double>(dist.trials) * dist.p * (1 - dist.p);
        else if constexpr (std::is_same_v<T, Bernoulli>) return dist.p * (1 - dist.p);
        else if constexpr (std::is_same_v<T, Normal>) return dist.sigma * dist.sigma;
        else if constexpr (std::is_same_v<T, Exponential>) return dist.mean * dist.mean;
        else if constexpr (std::is_same_v<T, Uniform>) return (dist.hi - dist.lo) * (dist.hi - dist.lo) / 12;
        else return 0.0;
      },
      d);
}

Distribution parse_distribution(std::string_view spec) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto colon = spec.find(':', start);
    parts.push_back(spec.substr(start, colon == std::string_view::npos ? colon : colon - start));
    if (colon == std::string_view::npos) break;
    start = colon + 1;
  }
  const auto name = parts.front();
  const auto expect = [&](std::size_t count) {
    if (parts.size() != count + 1)
      throw DomainError("distribution '" + std::string(name) + "' takes " + std::to_string(count) +
                        " parameter(s): '" + std::string(spec) + "'");
  };
  Distribution d;
  if (name == "exp" || name == "exponential") {
    expect(1);
    d = Exponential{parse_number(parts[1])};
  } else if (name == "normal" || name == "gauss") {
    expect(2);
    d = Normal{parse_number(parts[1]), parse_number(parts[2])};
  } else if (name == "uniform") {
    expect(2);
    d = Uniform{parse_number(parts[1]), parse_number(parts[2])};
  } else if (name == "poisson") {
    expect(1);
    d = Poisson{parse_number(parts[1])};
  } else if (name == "binomial") {
    expect(2);
    const double trials = parse_number(parts[1]);
    if (trials != std::floor(trials)) throw DomainError("binomial trials must be an integer");
    d = Binomial{static_cast<std::int64_t>(trials), parse_number(parts[2])};
  } else if (name == "bernoulli") {
    expect(1);
    d = Bernoulli{parse_number(parts[1])};
  } else if (name == "const" || name == "constant") {
    expect(1);
    d = Constant{parse_number(parts[1])};
  } else {
    throw DomainError("unknown distribution '" + std::string(name) + "'");
  }
  validate(d);
  return d;
}

std::string to_string(const Distribution& d) {
  std::ostringstream out;
  out.precision(9);
  std::visit(
      [&out](const auto& dist) {
        using T = std::decay_t<decltype(dist)>;
        if constexpr (std::is_same_v<T, Poisson>) out << "poisson:" << dist.mean;
        else if constexpr (std::is_same_v<T, Binomial>) out << "binomial:" << dist.trials << ':' << dist.p;
        else if constexpr (std::is_same_v<T, Bernoulli>) out << "bernoulli:" << dist.p;
        else if constexpr (std::is_same_v<T, Normal>) out << "normal:" << dist.mean << ':' << dist.sigma;
        else if constexpr (std::is_same_v<T, Exponential>) out << "exp:" << dist.mean;
        else if constexpr (std::is_same_v<T, Uniform>) out << "uniform:" << dist.lo << ':' << dist.hi;
        else out << "const:" << dist.value;
      },
      d);
  return out.str();
}

}  // namespace effstat
