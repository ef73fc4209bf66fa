#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "effstat/rng.hpp"

namespace effstat {

/// Observed successes and failures.
struct EfficiencyCounts {
  std::int64_t successes = 0;
  std::int64_t failures = 0;

  std::int64_t total() const { return successes + failures; }
  EfficiencyCounts mirrored() const { return {failures, successes}; }
};

/// successes / (successes + failures). Throws UndefinedEstimate at zero total.
double estimate(const EfficiencyCounts& counts);

struct WeightedEntry {
  double weight = 1;
  bool success = false;
  std::optional<double> x;
};

using WeightedObservations = std::vector<WeightedEntry>;

struct WeightedEstimate {
  double p_hat = 0;
  double n_eff_hat = 0;
  double sum_w = 0;
  double sum_w2 = 0;
  /// p_hat fell outside [0, 1]; only possible with negative weights.
  bool out_of_range = false;
  /// Total weight is negative; the ratio is unstable.
  bool negative_total = false;
};

/// Weighted success fraction and effective count. Throws DomainError when the
/// total weight is exactly zero or the sample is empty.
WeightedEstimate estimate_weighted(std::span<const WeightedEntry> obs);

/// Sample variance of the weighted estimator over `replicas` resamples of the
/// events (with replacement, same size). Consumes one word of `rng`.
double bootstrap_variance(std::span<const WeightedEntry> obs, int replicas, RngStream& rng);

/// Efficiency and weight as functions of a per-event covariate x.
struct XScenario {
  std::function<double(double)> efficiency;
  std::function<double(double)> weight;
  std::function<double(double)> density;
  std::function<double(RngStream&)> sample_x;
  double lo = 0;
  double hi = 1;

  /// p(x) = x, w(x) = x^3, x uniform on [0, 1]; asymptotic efficiency 0.8.
  static XScenario cubic_weight();
  /// Constant p and w, x uniform on [0, 1].
  static XScenario constant(double p, double w = 1);
};

/// Weighted average efficiency  int w p f dx / int w f dx  over the support.
double effective_efficiency_target(const std::function<double(double)>& efficiency,
                                   const std::function<double(double)>& weight,
                                   const std::function<double(double)>& density, double lo,
                                   double hi);
double effective_efficiency_target(const XScenario& scenario);

/// `count` events drawn from the scenario.
WeightedObservations draw_events(const XScenario& scenario, std::int64_t count, RngStream& rng);

struct BiasPoint {
  double n = 0;
  double mean_p_hat = 0;
  double std_error = 0;
  std::int64_t reps = 0;
};

/// Mean of p-hat over `reps` samples with n-hat ~ Poisson(n) (n-hat = 0 skipped)
/// for every n in the grid.
std::vector<BiasPoint> bias_curve(const XScenario& scenario, std::span<const double> n_grid,
                                  int reps, RngStream& rng);

}  // namespace effstat
