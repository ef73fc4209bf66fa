#include "effstat/estimators.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>

#include "effstat/distributions.hpp"
#include "effstat/error.hpp"
#include "effstat/summation.hpp"

namespace effstat {

double estimate(const EfficiencyCounts& counts) {
  if (counts.successes < 0 || counts.failures < 0)
    throw DomainError("counts must be non-negative");
  if (counts.total() == 0) throw UndefinedEstimate("efficiency undefined for zero trials");
  return static_cast<double>(counts.successes) / static_cast<double>(counts.total());
}

WeightedEstimate estimate_weighted(std::span<const WeightedEntry> obs) {
  if (obs.empty()) throw DomainError("weighted estimate of an empty sample");
  CompensatedSum pass;
  CompensatedSum all;
  CompensatedSum all2;
  for (const auto& e : obs) {
    if (e.success) pass += e.weight;
    all += e.weight;
    all2 += e.weight * e.weight;
  }
  WeightedEstimate est;
  est.sum_w = all.value();
  est.sum_w2 = all2.value();
  if (est.sum_w == 0) throw DomainError("weighted estimate undefined for zero total weight");
  est.p_hat = pass.value() / est.sum_w;
  est.n_eff_hat = est.sum_w * est.sum_w / est.sum_w2;
  est.out_of_range = est.p_hat < 0 || est.p_hat > 1;
  est.negative_total = est.sum_w < 0;
  return est;
}

double bootstrap_variance(std::span<const WeightedEntry> obs, int replicas, RngStream& rng) {
  if (replicas < 100) throw DomainError("bootstrap needs at least 100 replicas");
  if (obs.size() < 2) throw DomainError("bootstrap needs at least two events");
  const RngStream family = rng.derive(rng());
  const auto size = static_cast<std::uint64_t>(obs.size());

  std::vector<double> p_hats(static_cast<std::size_t>(replicas));
  for (int r = 0; r < replicas; ++r) {
    RngStream stream = family.derive(static_cast<std::uint64_t>(r));
    double p_hat = 0;
    int attempt = 0;
    for (;; ++attempt) {
      if (attempt == 100) throw DomainError("bootstrap resample kept producing zero total weight");
      // Plain sums: resample totals are not subject to cancellation any
      // worse than the original sample.
      double pass = 0;
      double all = 0;
      for (std::uint64_t i = 0; i < size; ++i) {
        const auto& e = obs[stream.below(size)];
        all += e.weight;
        if (e.success) pass += e.weight;
      }
      if (all != 0) {
        p_hat = pass / all;
        break;
      }
    }
    p_hats[static_cast<std::size_t>(r)] = p_hat;
  }
  CompensatedSum sum;
  for (const double v : p_hats) sum += v;
  const double mean = sum.value() / replicas;
  CompensatedSum ss;
  for (const double v : p_hats) ss += (v - mean) * (v - mean);
  return ss.value() / (replicas - 1);
}

XScenario XScenario::cubic_weight() {
  XScenario s;
  s.efficiency = [](double x) { return x; };
  s.weight = [](double x) { return x * x * x; };
  s.density = [](double) { return 1.0; };
  s.sample_x = [](RngStream& rng) { return rng.uniform(); };
  return s;
}

XScenario XScenario::constant(double p, double w) {
  XScenario s;
  s.efficiency = [p](double) { return p; };
  s.weight = [w](double) { return w; };
  s.density = [](double) { return 1.0; };
  s.sample_x = [](RngStream& rng) { return rng.uniform(); };
  return s;
}

double effective_efficiency_target(const std::function<double(double)>& efficiency,
                                   const std::function<double(double)>& weight,
                                   const std::function<double(double)>& density, double lo,
                                   double hi) {
  if (!(lo < hi)) throw DomainError("integration support must satisfy lo < hi");
  using boost::math::quadrature::gauss_kronrod;
  constexpr double kTol = 1e-10;
  const double num = gauss_kronrod<double, 31>::integrate(
      [&](double x) { return weight(x) * efficiency(x) * density(x); }, lo, hi, 15, kTol);
  const double den = gauss_kronrod<double, 31>::integrate(
      [&](double x) { return weight(x) * density(x); }, lo, hi, 15, kTol);
  if (!(den > 0)) throw DomainError("weight times density integrates to a non-positive value");
  return num / den;
}

double effective_efficiency_target(const XScenario& s) {
  return effective_efficiency_target(s.efficiency, s.weight, s.density, s.lo, s.hi);
}

WeightedObservations draw_events(const XScenario& s, std::int64_t count, RngStream& rng) {
  WeightedObservations events;
  events.reserve(static_cast<std::size_t>(count));
  for (std::int64_t i = 0; i < count; ++i) {
    const double x = s.sample_x(rng);
    const bool pass = sample(rng, Bernoulli{s.efficiency(x)});
    events.push_back({s.weight(x), pass, x});
  }
  return events;
}

std::vector<BiasPoint> bias_curve(const XScenario& scenario, std::span<const double> n_grid,
                                  int reps, RngStream& rng) {
  if (reps < 100) throw DomainError("bias curve needs at least 100 repetitions");
  const RngStream family = rng.derive(rng());
  std::vector<BiasPoint> curve;
  curve.reserve(n_grid.size());
  for (std::size_t cell = 0; cell < n_grid.size(); ++cell) {
    const double n = n_grid[cell];
    RngStream stream = family.derive(cell);
    CompensatedSum sum;
    CompensatedSum sum2;
    std::int64_t used = 0;
    for (int r = 0; r < reps; ++r) {
      const std::int64_t count = sample(stream, Poisson{n});
      if (count == 0) continue;
      const auto events = draw_events(scenario, count, stream);
      double p_hat;
      try {
        p_hat = estimate_weighted(events).p_hat;
      } catch (const DomainError&) {
        continue;  // all weights zero (x = 0 exactly); treat like an empty sample
      }
      sum += p_hat;
      sum2 += p_hat * p_hat;
      ++used;
    }
    BiasPoint point{n, std::numeric_limits<double>::quiet_NaN(),
                    std::numeric_limits<double>::quiet_NaN(), used};
    if (used > 1) {
      const double mean = sum.value() / used;
      const double var = (sum2.value() - used * mean * mean) / (used - 1);
      point.mean_p_hat = mean;
      point.std_error = std::sqrt(std::max(0.0, var) / used);
    }
    curve.push_back(point);
  }
  return curve;
}

}  // namespace effstat
