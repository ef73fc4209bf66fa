#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "effstat/distributions.hpp"
#include "effstat/estimators.hpp"
#include "effstat/intervals.hpp"
#include "effstat/rng.hpp"

namespace effstat {

enum class Sampling { Binomial, Poisson };

std::string to_string(Sampling sampling);
Sampling parse_sampling(std::string_view text);

/// Default cut on the neglected Poisson tail when enumerating n-hat.
inline constexpr double kPoissonTail = 1e-10;

/// A named interval constructor for plain counts.
struct CountMethod {
  std::string name;
  std::function<Interval(const EfficiencyCounts&, double level)> build;
};

/// "wilson", "wilson-poisson:<fn-mode>", "clopper-pearson", "normal",
/// "bayes-uniform", "bayes-jeffreys". Throws DomainError for unknown names.
CountMethod count_method(std::string_view name);
std::vector<std::string> count_method_names();

/// Interval bounds for every (n, k), built once per row and reused across p.
/// Not thread-safe while rows are being added; call prepare() first and share
/// the table read-only afterwards.
class IntervalTable {
 public:
  IntervalTable(CountMethod method, double level);

  const CountMethod& method() const { return method_; }
  double level() const { return level_; }

  /// Build all rows for totals 1..n_max.
  void prepare(std::int64_t n_max);
  /// Row for total n (k = 0..n). Builds it if missing.
  const std::vector<std::pair<double, double>>& row(std::int64_t n);
  /// Row for total n; n must have been prepared.
  const std::vector<std::pair<double, double>>& row(std::int64_t n) const;

 private:
  CountMethod method_;
  double level_;
  std::vector<std::vector<std::pair<double, double>>> rows_;
};

/// Exact coverage with n fixed: sum over k of B(k; n, p) [lower <= p <= upper].
double coverage_binomial(const CountMethod& method, double p, std::int64_t n, double level);
double coverage_binomial(const IntervalTable& table, double p, std::int64_t n);
/// As above, building missing rows first.
double coverage_binomial(IntervalTable& table, double p, std::int64_t n);

struct PoissonCoverage {
  double coverage = 0;
  /// Neglected Poisson tail mass after renormalization.
  double truncation_bound = 0;
  std::int64_t n_hat_max = 0;
};

/// Exact coverage with n-hat ~ Poisson(n), conditioned on n-hat >= 1.
PoissonCoverage coverage_poisson(const CountMethod& method, double p, double n, double level);
PoissonCoverage coverage_poisson(const IntervalTable& table, double p, double n);
PoissonCoverage coverage_poisson(IntervalTable& table, double p, double n);

/// Largest n-hat visited by coverage_poisson at expectation n.
std::int64_t poisson_enumeration_limit(double n);

/// Coverage averaged over p with a uniform prior: midpoint rule on `grid`
/// equal cells of (0, 1).
double average_coverage(const CountMethod& method, double n, double level, int grid,
                        Sampling sampling);
double average_coverage(const IntervalTable& table, double n, int grid, Sampling sampling);

struct CoverageCell {
  std::string method;
  double p = 0;
  double n = 0;
  double level = 0;
  Sampling sampling = Sampling::Binomial;
  double coverage = 0;
  double truncation_bound = 0;
  bool monte_carlo = false;
  std::int64_t reps = 0;
  std::uint64_t seed = 0;
  std::string error;  // empty on success
};

/// Exact coverage for every (method, p, n), row-major in that order. Per-cell
/// failures are recorded in the cell.
std::vector<CoverageCell> scan_grid(std::span<const CountMethod> methods,
                                    std::span<const double> p_grid,
                                    std::span<const double> n_grid, double level,
                                    Sampling sampling, unsigned threads = 1);

struct AverageCell {
  std::string method;
  double n = 0;
  double level = 0;
  Sampling sampling = Sampling::Binomial;
  double average = 0;
  int grid = 0;
  std::string error;
};

std::vector<AverageCell> average_scan(std::span<const CountMethod> methods,
                                      std::span<const double> n_grid, double level,
                                      Sampling sampling, int grid = 1000, unsigned threads = 1);

// ---------------------------------------------------------------------------
// Monte-Carlo studies. All are deterministic in (rng seed, stream id, reps)
// and independent of the thread count: replicas are processed in fixed-size
// chunks, each with its own derived stream, and reduced in chunk order.

struct PoissonTrialStudy {
  double mc_variance = 0;  // mean of (p_hat - p)^2
  double std_error = 0;    // of mc_variance
  double predicted = 0;    // var_poisson_trials with the exact f(n)
  std::int64_t reps_used = 0;
  std::int64_t skipped = 0;  // n-hat = 0
};

PoissonTrialStudy simulate_poisson_trials(double p, double n, std::int64_t reps, RngStream& rng,
                                          unsigned threads = 1);

/// Variance estimators compared in the weighted study, in output order.
enum class WeightedEstimator { Unity, LargeNCount, LargeNEffective, BlendEffective };
inline constexpr std::size_t kWeightedEstimators = 4;
std::string to_string(WeightedEstimator e);

struct WeightedStudy {
  double mc_variance = 0;
  double mc_variance_se = 0;
  double mean_p_hat = 0;
  std::array<double, kWeightedEstimators> mean_estimate{};
  double min_neff_ratio = 0;  // min over reps of n_eff_hat / n_hat
  double max_neff_ratio = 0;
  std::int64_t reps_used = 0;
  std::int64_t skipped = 0;

  double ratio(WeightedEstimator e) const {
    return mean_estimate[static_cast<std::size_t>(e)] / mc_variance;
  }
};

/// n-hat ~ Poisson(n) (0 skipped), weights i.i.d. from `weights`, successes
/// Bernoulli(p) independent of the weights.
WeightedStudy simulate_weighted_variance(const Distribution& weights, double p, double n,
                                         std::int64_t reps, RngStream& rng, unsigned threads = 1);

/// Monte-Carlo coverage of wilson_weighted in the same setting.
double coverage_weighted_mc(const Distribution& weights, double p, double n, double level,
                            std::int64_t reps, RngStream& rng, unsigned threads = 1);

struct ScenarioExtra {
  double n = 0;
  double p = 0;
  double bkg_sigma1 = 0;
  double bkg_sigma2 = 0;
  std::int64_t reps = 0;

  /// Extra variance equal to `fraction` * n on both counts.
  static ScenarioExtra with_background(double n, double p, double fraction, std::int64_t reps);
};

struct ExtraStudy {
  double mc_sd = 0;
  double formula_sd = 0;    // sqrt of the mean var_extra estimate
  double corrected_sd = 0;  // first term replaced by the Poisson-trial variance
  double mean_p_hat = 0;
  double wilson_extra_coverage = 0;
  std::int64_t degenerate_intervals = 0;
  std::int64_t redraws = 0;
  std::int64_t reps_used = 0;
};

/// n-hat_k = Poisson(n_k) + Normal(0, sigma_kb), redrawn while negative.
ExtraStudy simulate_extra(const ScenarioExtra& scenario, double level, RngStream& rng,
                          unsigned threads = 1);

struct XdepStudy {
  double p_bar = 0;
  double mean_p_hat = 0;
  double se_mean_p_hat = 0;
  double mc_variance = 0;
  double mean_binned = 0;
  double mean_bootstrap = 0;
  double mean_wrong = 0;  // var_weighted at n_eff: ignores the covariate
  std::int64_t reps_used = 0;
  std::int64_t binned_failures = 0;
};

struct XdepOptions {
  int bins = 20;
  int bootstrap_replicas = 100;
};

XdepStudy simulate_xdep(const XScenario& scenario, double n, std::int64_t reps, RngStream& rng,
                        const XdepOptions& options = {}, unsigned threads = 1);

}  // namespace effstat
