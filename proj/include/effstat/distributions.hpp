#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <variant>

#include "effstat/rng.hpp"

namespace effstat {

struct Poisson {
  double mean;
};
struct Binomial {
  std::int64_t trials;
  double p;
};
struct Bernoulli {
  double p;
};
struct Normal {
  double mean;
  double sigma;
};
struct Exponential {
  double mean;
};
struct Uniform {
  double lo;
  double hi;
};
/// Point mass; used for unit or fixed weights.
struct Constant {
  double value;
};

using Distribution = std::variant<Poisson, Binomial, Bernoulli, Normal, Exponential, Uniform,
                                  Constant>;

// Every draw is a deterministic function of the stream position. Invalid
// parameters throw DomainError.

std::int64_t sample(RngStream& rng, const Poisson& d);
std::int64_t sample(RngStream& rng, const Binomial& d);
bool sample(RngStream& rng, const Bernoulli& d);
double sample(RngStream& rng, const Normal& d);
double sample(RngStream& rng, const Exponential& d);
double sample(RngStream& rng, const Uniform& d);

/// Draw from any distribution, integer outcomes widened to double.
double sample(RngStream& rng, const Distribution& d);

void validate(const Distribution& d);
double mean(const Distribution& d);
double variance(const Distribution& d);

/// Parse "exp:5", "normal:3:1", "uniform:-0.5:1", "poisson:10",
/// "binomial:10:0.3", "bernoulli:0.2" or "const:1".
Distribution parse_distribution(std::string_view spec);

std::string to_string(const Distribution& d);

}  // namespace effstat
