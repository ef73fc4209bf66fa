#include "effstat/coverage.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "effstat/error.hpp"
#include "effstat/parallel.hpp"
#include "effstat/probability.hpp"
#include "effstat/summation.hpp"
#include "effstat/variance.hpp"

namespace effstat {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void require_level(double level) {
  if (!(level > 0 && level < 1)) throw DomainError("confidence level must lie in (0, 1)");
}

void require_p(double p) {
  if (!(p >= 0 && p <= 1)) throw DomainError("true efficiency outside [0, 1]");
}

// Poisson probabilities for k = 0..kmax, allowing a zero mean.
std::vector<double> poisson_row(double mu, std::int64_t kmax) {
  if (mu == 0) {
    std::vector<double> row(static_cast<std::size_t>(kmax + 1), 0.0);
    row[0] = 1;
    return row;
  }
  return poisson_pmf_row(mu, kmax);
}

std::int64_t integral_n(double n) {
  if (!(n >= 1) || n != std::floor(n) || n > 1e9)
    throw DomainError("binomial sampling needs a positive integer n");
  return static_cast<std::int64_t>(n);
}

// Runs `reps` replicas in fixed-size chunks, chunk c drawing from
// family.derive(c). Partial results are reduced in chunk order so the outcome
// is independent of the thread count.
template <class Acc, class Chunk>
Acc run_chunks(std::int64_t reps, std::int64_t chunk_size, const RngStream& family,
               unsigned threads, Chunk chunk) {
  const auto chunks = static_cast<std::size_t>((reps + chunk_size - 1) / chunk_size);
  std::vector<Acc> partial(chunks);
  parallel_for(chunks, threads, [&](std::size_t c) {
    RngStream stream = family.derive(c);
    const std::int64_t first = static_cast<std::int64_t>(c) * chunk_size;
    const std::int64_t count = std::min(chunk_size, reps - first);
    partial[c] = chunk(stream, count);
  });
  Acc total{};
  for (const auto& acc : partial) total += acc;
  return total;
}

}  // namespace

std::string to_string(Sampling sampling) {
  return sampling == Sampling::Binomial ? "binomial" : "poisson";
}

Sampling parse_sampling(std::string_view text) {
  if (text == "binomial") return Sampling::Binomial;
  if (text == "poisson") return Sampling::Poisson;
  throw DomainError("unknown sampling '" + std::string(text) + "'");
}

CountMethod count_method(std::string_view name) {
  const std::string label(name);
  if (name == "wilson") return {label, [](const EfficiencyCounts& c, double l) { return wilson(c, l); }};
  if (name == "clopper-pearson")
    return {label, [](const EfficiencyCounts& c, double l) { return clopper_pearson(c, l); }};
  if (name == "normal")
    return {label, [](const EfficiencyCounts& c, double l) { return normal_approx(c, l); }};
  if (name == "bayes-uniform")
    return {label, [](const EfficiencyCounts& c, double l) {
              return bayesian(c, l, PriorKind::Uniform);
            }};
  if (name == "bayes-jeffreys")
    return {label, [](const EfficiencyCounts& c, double l) {
              return bayesian(c, l, PriorKind::JeffreysBinomial);
            }};
  if (name.starts_with("wilson-poisson")) {
    FnMode mode = FnMode::blend();
    if (name.size() > 14) {
      if (name[14] != ':') throw DomainError("unknown interval method '" + label + "'");
      mode = parse_fn_mode(name.substr(15));
    }
    return {label, [mode](const EfficiencyCounts& c, double l) { return wilson_poisson(c, l, mode); }};
  }
  throw DomainError("unknown interval method '" + label + "'");
}

std::vector<std::string> count_method_names() {
  return {"wilson",          "wilson-poisson:large-n", "wilson-poisson:exact",
          "wilson-poisson:blend", "clopper-pearson", "normal",
          "bayes-uniform",   "bayes-jeffreys"};
}

IntervalTable::IntervalTable(CountMethod method, double level)
    : method_(std::move(method)), level_(level) {
  require_level(level);
  rows_.emplace_back();  // n = 0 has no interval
}

void IntervalTable::prepare(std::int64_t n_max) {
  for (auto n = static_cast<std::int64_t>(rows_.size()); n <= n_max; ++n) {
    std::vector<std::pair<double, double>> row(static_cast<std::size_t>(n + 1));
    for (std::int64_t k = 0; k <= n; ++k) {
      const Interval iv = method_.build({k, n - k}, level_);
      row[static_cast<std::size_t>(k)] = {iv.lower, iv.upper};
    }
    rows_.push_back(std::move(row));
  }
}

const std::vector<std::pair<double, double>>& IntervalTable::row(std::int64_t n) {
  if (n < 1) throw DomainError("interval table rows start at n = 1");
  prepare(n);
  return rows_[static_cast<std::size_t>(n)];
}

const std::vector<std::pair<double, double>>& IntervalTable::row(std::int64_t n) const {
  if (n < 1 || n >= static_cast<std::int64_t>(rows_.size()))
    throw DomainError("interval table row not prepared");
  return rows_[static_cast<std::size_t>(n)];
}

double coverage_binomial(const IntervalTable& table, double p, std::int64_t n) {
  require_p(p);
  const auto& bounds = table.row(n);
  CompensatedSum total;
  for (std::int64_t k = 0; k <= n; ++k) {
    const auto [lo, hi] = bounds[static_cast<std::size_t>(k)];
    if (lo <= p && p <= hi) total += pmf_binomial(k, n, p);
  }
  return std::clamp(total.value(), 0.0, 1.0);
}

double coverage_binomial(IntervalTable& table, double p, std::int64_t n) {
  table.prepare(n);
  return coverage_binomial(std::as_const(table), p, n);
}

double coverage_binomial(const CountMethod& method, double p, std::int64_t n, double level) {
  if (n < 1) throw DomainError("binomial coverage needs n >= 1");
  IntervalTable table(method, level);
  table.prepare(n);
  return coverage_binomial(std::as_const(table), p, n);
}

std::int64_t poisson_enumeration_limit(double n) {
  if (!(n > 0)) throw DomainError("Poisson coverage needs n > 0");
  return std::max<std::int64_t>(1, poisson_upper_cut(n, kPoissonTail));
}

PoissonCoverage coverage_poisson(const IntervalTable& table, double p, double n) {
  require_p(p);
  if (!(n > 0)) throw DomainError("Poisson coverage needs n > 0");
  double dropped = 0;
  const std::int64_t kmax = std::max<std::int64_t>(1, poisson_upper_cut(n, kPoissonTail, &dropped));
  // Pois(k; pn) Pois(m - k; (1-p) n) = Pois(m; n) B(k; m, p).
  const auto pass = poisson_row(p * n, kmax);
  const auto fail = poisson_row((1 - p) * n, kmax);
  CompensatedSum total;
  for (std::int64_t m = 1; m <= kmax; ++m) {
    const auto& bounds = table.row(m);
    for (std::int64_t k = 0; k <= m; ++k) {
      const auto [lo, hi] = bounds[static_cast<std::size_t>(k)];
      if (lo <= p && p <= hi)
        total += pass[static_cast<std::size_t>(k)] * fail[static_cast<std::size_t>(m - k)];
    }
  }
  const double norm = -std::expm1(-n);
  return {std::clamp(total.value() / norm, 0.0, 1.0), dropped / norm, kmax};
}

PoissonCoverage coverage_poisson(IntervalTable& table, double p, double n) {
  table.prepare(poisson_enumeration_limit(n));
  return coverage_poisson(std::as_const(table), p, n);
}

PoissonCoverage coverage_poisson(const CountMethod& method, double p, double n, double level) {
  IntervalTable table(method, level);
  table.prepare(poisson_enumeration_limit(n));
  return coverage_poisson(std::as_const(table), p, n);
}

double average_coverage(const IntervalTable& table, double n, int grid, Sampling sampling) {
  if (grid < 100) throw DomainError("average coverage needs at least 100 grid cells");
  CompensatedSum total;
  for (int i = 0; i < grid; ++i) {
    const double p = (i + 0.5) / grid;
    total += sampling == Sampling::Binomial ? coverage_binomial(table, p, integral_n(n))
                                            : coverage_poisson(table, p, n).coverage;
  }
  return total.value() / grid;
}

double average_coverage(const CountMethod& method, double n, double level, int grid,
                        Sampling sampling) {
  IntervalTable table(method, level);
  table.prepare(sampling == Sampling::Binomial ? integral_n(n) : poisson_enumeration_limit(n));
  return average_coverage(std::as_const(table), n, grid, sampling);
}

namespace {

// One prepared table per method, or the error that prevented building it.
struct PreparedMethod {
  std::unique_ptr<IntervalTable> table;
  std::string error;
};

std::vector<PreparedMethod> prepare_tables(std::span<const CountMethod> methods,
                                           std::span<const double> n_grid, double level,
                                           Sampling sampling, unsigned threads) {
  std::int64_t n_max = 1;
  for (const double n : n_grid) {
    try {
      n_max = std::max(n_max, sampling == Sampling::Binomial ? integral_n(n)
                                                             : poisson_enumeration_limit(n));
    } catch (const DomainError&) {
      // reported per cell
    }
  }
  std::vector<PreparedMethod> prepared(methods.size());
  parallel_for(methods.size(), threads, [&](std::size_t i) {
    try {
      prepared[i].table = std::make_unique<IntervalTable>(methods[i], level);
      prepared[i].table->prepare(n_max);
    } catch (const std::exception& e) {
      prepared[i].table.reset();
      prepared[i].error = e.what();
    }
  });
  return prepared;
}

}  // namespace

std::vector<CoverageCell> scan_grid(std::span<const CountMethod> methods,
                                    std::span<const double> p_grid,
                                    std::span<const double> n_grid, double level,
                                    Sampling sampling, unsigned threads) {
  if (methods.empty() || p_grid.empty() || n_grid.empty())
    throw DomainError("coverage scan needs non-empty method, p and n grids");
  require_level(level);
  const auto prepared = prepare_tables(methods, n_grid, level, sampling, threads);

  const std::size_t per_method = p_grid.size() * n_grid.size();
  std::vector<CoverageCell> cells(methods.size() * per_method);
  parallel_for(cells.size(), threads, [&](std::size_t idx) {
    const std::size_t m = idx / per_method;
    const std::size_t ip = (idx % per_method) / n_grid.size();
    const std::size_t in = idx % n_grid.size();
    CoverageCell& cell = cells[idx];
    cell.method = methods[m].name;
    cell.p = p_grid[ip];
    cell.n = n_grid[in];
    cell.level = level;
    cell.sampling = sampling;
    if (!prepared[m].table) {
      cell.coverage = kNaN;
      cell.error = prepared[m].error;
      return;
    }
    const IntervalTable& table = *prepared[m].table;
    try {
      if (sampling == Sampling::Binomial) {
        cell.coverage = coverage_binomial(table, cell.p, integral_n(cell.n));
      } else {
        const auto result = coverage_poisson(table, cell.p, cell.n);
        cell.coverage = result.coverage;
        cell.truncation_bound = result.truncation_bound;
      }
    } catch (const std::exception& e) {
      cell.coverage = kNaN;
      cell.error = e.what();
    }
  });
  return cells;
}

std::vector<AverageCell> average_scan(std::span<const CountMethod> methods,
                                      std::span<const double> n_grid, double level,
                                      Sampling sampling, int grid, unsigned threads) {
  if (methods.empty() || n_grid.empty())
    throw DomainError("average scan needs non-empty method and n grids");
  require_level(level);
  const auto prepared = prepare_tables(methods, n_grid, level, sampling, threads);
  std::vector<AverageCell> cells(methods.size() * n_grid.size());
  parallel_for(cells.size(), threads, [&](std::size_t idx) {
    const std::size_t m = idx / n_grid.size();
    AverageCell& cell = cells[idx];
    cell.method = methods[m].name;
    cell.n = n_grid[idx % n_grid.size()];
    cell.level = level;
    cell.sampling = sampling;
    cell.grid = grid;
    if (!prepared[m].table) {
      cell.average = kNaN;
      cell.error = prepared[m].error;
      return;
    }
    try {
      cell.average = average_coverage(std::as_const(*prepared[m].table), cell.n, grid, sampling);
    } catch (const std::exception& e) {
      cell.average = kNaN;
      cell.error = e.what();
    }
  });
  return cells;
}

// ---------------------------------------------------------------------------

namespace {

struct PoissonTrialAcc {
  CompensatedSum sq;
  CompensatedSum quad;
  std::int64_t used = 0;
  std::int64_t skipped = 0;

  PoissonTrialAcc& operator+=(const PoissonTrialAcc& o) {
    sq += o.sq;
    quad += o.quad;
    used += o.used;
    skipped += o.skipped;
    return *this;
  }
};

}  // namespace

PoissonTrialStudy simulate_poisson_trials(double p, double n, std::int64_t reps, RngStream& rng,
                                          unsigned threads) {
  require_p(p);
  if (!(n > 0)) throw DomainError("expected trial count must be positive");
  if (reps < 1) throw DomainError("need at least one repetition");
  const RngStream family = rng.derive(rng());
  const auto acc = run_chunks<PoissonTrialAcc>(
      reps, 1 << 14, family, threads, [p, n](RngStream& stream, std::int64_t count) {
        PoissonTrialAcc a;
        for (std::int64_t r = 0; r < count; ++r) {
          const std::int64_t total = sample(stream, Poisson{n});
          if (total == 0) {
            ++a.skipped;
            continue;
          }
          const std::int64_t pass = sample(stream, Binomial{total, p});
          const double d = static_cast<double>(pass) / static_cast<double>(total) - p;
          a.sq += d * d;
          a.quad += d * d * d * d;
          ++a.used;
        }
        return a;
      });
  PoissonTrialStudy study;
  study.reps_used = acc.used;
  study.skipped = acc.skipped;
  study.predicted = var_poisson_trials(p, n, FnMode::exact());
  if (acc.used > 1) {
    const auto used = static_cast<double>(acc.used);
    study.mc_variance = acc.sq.value() / used;
    const double m4 = acc.quad.value() / used;
    study.std_error = std::sqrt(std::max(0.0, m4 - study.mc_variance * study.mc_variance) / used);
  }
  return study;
}

std::string to_string(WeightedEstimator e) {
  switch (e) {
    case WeightedEstimator::Unity: return "unity";
    case WeightedEstimator::LargeNCount: return "large_n_count";
    case WeightedEstimator::LargeNEffective: return "large_n_eff";
    case WeightedEstimator::BlendEffective: return "blend_eff";
  }
  return "unknown";
}

namespace {

struct WeightedAcc {
  CompensatedSum sq;
  CompensatedSum quad;
  CompensatedSum p_hat;
  std::array<CompensatedSum, kWeightedEstimators> est;
  double min_ratio = std::numeric_limits<double>::infinity();
  double max_ratio = -std::numeric_limits<double>::infinity();
  std::int64_t used = 0;
  std::int64_t skipped = 0;

  WeightedAcc& operator+=(const WeightedAcc& o) {
    sq += o.sq;
    quad += o.quad;
    p_hat += o.p_hat;
    for (std::size_t i = 0; i < kWeightedEstimators; ++i) est[i] += o.est[i];
    min_ratio = std::min(min_ratio, o.min_ratio);
    max_ratio = std::max(max_ratio, o.max_ratio);
    used += o.used;
    skipped += o.skipped;
    return *this;
  }
};

void require_weight_mean(const Distribution& weights) {
  validate(weights);
  if (!(mean(weights) > 0)) throw DomainError("weight distribution must have a positive mean");
}

// One weighted sample of size n-hat ~ Poisson(n). Returns false for n-hat = 0
// or zero total weight.
bool draw_weighted(const Distribution& weights, double p, double n, RngStream& stream,
                   WeightedObservations& events, std::int64_t& total) {
  total = sample(stream, Poisson{n});
  if (total == 0) return false;
  events.resize(static_cast<std::size_t>(total));
  for (auto& e : events) {
    e.weight = sample(stream, weights);
    e.success = sample(stream, Bernoulli{p});
  }
  return true;
}

}  // namespace

WeightedStudy simulate_weighted_variance(const Distribution& weights, double p, double n,
                                         std::int64_t reps, RngStream& rng, unsigned threads) {
  require_p(p);
  require_weight_mean(weights);
  if (!(n > 0)) throw DomainError("expected trial count must be positive");
  if (reps < 10000) throw DomainError("weighted study needs at least 10000 repetitions");
  const RngStream family = rng.derive(rng());
  const auto acc = run_chunks<WeightedAcc>(
      reps, 1024, family, threads, [&](RngStream& stream, std::int64_t count) {
        WeightedAcc a;
        WeightedObservations events;
        for (std::int64_t r = 0; r < count; ++r) {
          std::int64_t total = 0;
          if (!draw_weighted(weights, p, n, stream, events, total)) {
            ++a.skipped;
            continue;
          }
          WeightedEstimate est;
          try {
            est = estimate_weighted(events);
          } catch (const DomainError&) {
            ++a.skipped;
            continue;
          }
          const double d = est.p_hat - p;
          a.sq += d * d;
          a.quad += d * d * d * d;
          a.p_hat += est.p_hat;
          const double q = std::clamp(est.p_hat, 0.0, 1.0);
          const double base = q * (1 - q) / est.n_eff_hat;
          a.est[0] += base;
          a.est[1] += base * f_large_n(static_cast<double>(total));
          a.est[2] += base * f_large_n(est.n_eff_hat);
          a.est[3] += base * f_approx(est.n_eff_hat);
          const double ratio = est.n_eff_hat / static_cast<double>(total);
          a.min_ratio = std::min(a.min_ratio, ratio);
          a.max_ratio = std::max(a.max_ratio, ratio);
          ++a.used;
        }
        return a;
      });
  WeightedStudy study;
  study.reps_used = acc.used;
  study.skipped = acc.skipped;
  if (acc.used < 2) throw DomainError("too few usable repetitions in weighted study");
  const auto used = static_cast<double>(acc.used);
  study.mc_variance = acc.sq.value() / used;
  study.mc_variance_se =
      std::sqrt(std::max(0.0, acc.quad.value() / used - study.mc_variance * study.mc_variance) / used);
  study.mean_p_hat = acc.p_hat.value() / used;
  for (std::size_t i = 0; i < kWeightedEstimators; ++i) study.mean_estimate[i] = acc.est[i].value() / used;
  study.min_neff_ratio = acc.min_ratio;
  study.max_neff_ratio = acc.max_ratio;
  return study;
}

namespace {

struct CoverAcc {
  std::int64_t covered = 0;
  std::int64_t used = 0;
  CoverAcc& operator+=(const CoverAcc& o) {
    covered += o.covered;
    used += o.used;
    return *this;
  }
};

}  // namespace

double coverage_weighted_mc(const Distribution& weights, double p, double n, double level,
                            std::int64_t reps, RngStream& rng, unsigned threads) {
  require_p(p);
  require_level(level);
  require_weight_mean(weights);
  if (!(n > 0)) throw DomainError("expected trial count must be positive");
  if (reps < 1) throw DomainError("need at least one repetition");
  const RngStream family = rng.derive(rng());
  const auto acc = run_chunks<CoverAcc>(
      reps, 1024, family, threads, [&](RngStream& stream, std::int64_t count) {
        CoverAcc a;
        WeightedObservations events;
        for (std::int64_t r = 0; r < count; ++r) {
          std::int64_t total = 0;
          if (!draw_weighted(weights, p, n, stream, events, total)) continue;
          try {
            if (wilson_weighted(estimate_weighted(events), level).contains(p)) ++a.covered;
            ++a.used;
          } catch (const DomainError&) {
          }
        }
        return a;
      });
  if (acc.used == 0) throw DomainError("no usable repetitions in weighted coverage study");
  return static_cast<double>(acc.covered) / static_cast<double>(acc.used);
}

ScenarioExtra ScenarioExtra::with_background(double n, double p, double fraction,
                                             std::int64_t reps) {
  if (!(fraction >= 0)) throw DomainError("background fraction must be non-negative");
  const double sigma = std::sqrt(fraction * n);
  return {n, p, sigma, sigma, reps};
}

namespace {

struct ExtraAcc {
  CompensatedSum p_hat;
  CompensatedSum p_hat2;
  CompensatedSum var;
  CompensatedSum var_corrected;
  std::int64_t covered = 0;
  std::int64_t intervals = 0;
  std::int64_t degenerate = 0;
  std::int64_t redraws = 0;
  std::int64_t used = 0;

  ExtraAcc& operator+=(const ExtraAcc& o) {
    p_hat += o.p_hat;
    p_hat2 += o.p_hat2;
    var += o.var;
    var_corrected += o.var_corrected;
    covered += o.covered;
    intervals += o.intervals;
    degenerate += o.degenerate;
    redraws += o.redraws;
    used += o.used;
    return *this;
  }
};

double draw_noisy_count(double mean_count, double sigma, RngStream& stream,
                        std::int64_t& redraws) {
  for (int attempt = 0; attempt < 100; ++attempt) {
    double value = static_cast<double>(sample(stream, Poisson{mean_count}));
    if (sigma > 0) value += sample(stream, Normal{0.0, sigma});
    if (value >= 0) return value;
    ++redraws;
  }
  throw DomainError("noisy count stayed negative after 100 redraws");
}

}  // namespace

ExtraStudy simulate_extra(const ScenarioExtra& s, double level, RngStream& rng, unsigned threads) {
  require_p(s.p);
  require_level(level);
  if (!(s.n > 0)) throw DomainError("expected total must be positive");
  if (!(s.bkg_sigma1 >= 0 && s.bkg_sigma2 >= 0))
    throw DomainError("background spreads must be non-negative");
  if (s.reps < 10000) throw DomainError("extra-fluctuation study needs at least 10000 repetitions");
  const double s1sq = s.bkg_sigma1 * s.bkg_sigma1;
  const double s2sq = s.bkg_sigma2 * s.bkg_sigma2;
  const RngStream family = rng.derive(rng());
  const auto acc = run_chunks<ExtraAcc>(
      s.reps, 1024, family, threads, [&](RngStream& stream, std::int64_t count) {
        ExtraAcc a;
        for (std::int64_t r = 0; r < count; ++r) {
          const double n1 = draw_noisy_count(s.p * s.n, s.bkg_sigma1, stream, a.redraws);
          const double n2 = draw_noisy_count((1 - s.p) * s.n, s.bkg_sigma2, stream, a.redraws);
          const double total = n1 + n2;
          if (!(total > 0)) continue;
          const double p_hat = n1 / total;
          const auto inputs = ExtraFluctuationInputs::from_n1_n2(n1, n2, n1 + s1sq, n2 + s2sq);
          a.p_hat += p_hat;
          a.p_hat2 += p_hat * p_hat;
          a.var += var_extra(inputs).value;
          a.var_corrected += p_hat * (1 - p_hat) / total * f_approx(total) +
                             (p_hat * p_hat * s2sq + (1 - p_hat) * (1 - p_hat) * s1sq) /
                                 (total * total);
          try {
            if (wilson_extra(inputs, level).contains(s.p)) ++a.covered;
            ++a.intervals;
          } catch (const DegenerateInterval&) {
            ++a.degenerate;
          }
          ++a.used;
        }
        return a;
      });
  if (acc.used < 2) throw DomainError("too few usable repetitions in extra-fluctuation study");
  ExtraStudy study;
  const auto used = static_cast<double>(acc.used);
  study.mean_p_hat = acc.p_hat.value() / used;
  const double ss = acc.p_hat2.value() - used * study.mean_p_hat * study.mean_p_hat;
  study.mc_sd = std::sqrt(std::max(0.0, ss) / (used - 1));
  study.formula_sd = std::sqrt(acc.var.value() / used);
  study.corrected_sd = std::sqrt(acc.var_corrected.value() / used);
  study.wilson_extra_coverage =
      acc.intervals > 0 ? static_cast<double>(acc.covered) / static_cast<double>(acc.intervals) : kNaN;
  study.degenerate_intervals = acc.degenerate;
  study.redraws = acc.redraws;
  study.reps_used = acc.used;
  return study;
}

namespace {

struct XdepAcc {
  CompensatedSum p_hat;
  CompensatedSum p_hat2;
  CompensatedSum binned;
  CompensatedSum bootstrap;
  CompensatedSum wrong;
  std::int64_t binned_used = 0;
  std::int64_t binned_failures = 0;
  std::int64_t used = 0;

  XdepAcc& operator+=(const XdepAcc& o) {
    p_hat += o.p_hat;
    p_hat2 += o.p_hat2;
    binned += o.binned;
    bootstrap += o.bootstrap;
    wrong += o.wrong;
    binned_used += o.binned_used;
    binned_failures += o.binned_failures;
    used += o.used;
    return *this;
  }
};

// Binned finite-sample estimate of the covariate-dependent variance.
double binned_variance(const XScenario& s, const WeightedObservations& events, int bins) {
  std::vector<std::int64_t> counts(static_cast<std::size_t>(bins), 0);
  std::vector<std::int64_t> passes(static_cast<std::size_t>(bins), 0);
  std::vector<double> weights(static_cast<std::size_t>(bins), 0.0);
  const double width = (s.hi - s.lo) / bins;
  for (const auto& e : events) {
    const double x = e.x.value_or(s.lo);
    auto b = static_cast<std::int64_t>(std::floor((x - s.lo) / width));
    b = std::clamp<std::int64_t>(b, 0, bins - 1);
    const auto i = static_cast<std::size_t>(b);
    ++counts[i];
    if (e.success) ++passes[i];
    weights[i] += e.weight;
  }
  std::vector<CovariateBin> summary;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (counts[i] == 0) continue;
    const auto c = static_cast<double>(counts[i]);
    summary.push_back({static_cast<double>(passes[i]) / c, weights[i] / c, counts[i]});
  }
  return var_xdep(summary, static_cast<double>(events.size()));
}

}  // namespace

XdepStudy simulate_xdep(const XScenario& scenario, double n, std::int64_t reps, RngStream& rng,
                        const XdepOptions& options, unsigned threads) {
  if (!(n > 0)) throw DomainError("expected event count must be positive");
  if (reps < 500) throw DomainError("covariate study needs at least 500 repetitions");
  if (options.bins < 2) throw DomainError("covariate study needs at least two bins");
  const RngStream family = rng.derive(rng());
  const auto acc = run_chunks<XdepAcc>(
      reps, 8, family, threads, [&](RngStream& stream, std::int64_t count) {
        XdepAcc a;
        for (std::int64_t r = 0; r < count; ++r) {
          const std::int64_t total = sample(stream, Poisson{n});
          if (total < 2) continue;
          const auto events = draw_events(scenario, total, stream);
          WeightedEstimate est;
          try {
            est = estimate_weighted(events);
          } catch (const DomainError&) {
            continue;
          }
          a.p_hat += est.p_hat;
          a.p_hat2 += est.p_hat * est.p_hat;
          try {
            a.binned += binned_variance(scenario, events, options.bins);
            ++a.binned_used;
          } catch (const DomainError&) {
            ++a.binned_failures;
          }
          a.bootstrap += bootstrap_variance(events, options.bootstrap_replicas, stream);
          a.wrong += var_weighted(std::clamp(est.p_hat, 0.0, 1.0), est.n_eff_hat, FnMode::large_n());
          ++a.used;
        }
        return a;
      });
  if (acc.used < 2) throw DomainError("too few usable repetitions in covariate study");
  XdepStudy study;
  const auto used = static_cast<double>(acc.used);
  study.p_bar = effective_efficiency_target(scenario);
  study.mean_p_hat = acc.p_hat.value() / used;
  const double ss = acc.p_hat2.value() - used * study.mean_p_hat * study.mean_p_hat;
  study.mc_variance = std::max(0.0, ss) / (used - 1);
  study.se_mean_p_hat = std::sqrt(study.mc_variance / used);
  study.mean_binned = acc.binned_used > 0 ? acc.binned.value() / static_cast<double>(acc.binned_used) : kNaN;
  study.mean_bootstrap = acc.bootstrap.value() / used;
  study.mean_wrong = acc.wrong.value() / used;
  study.reps_used = acc.used;
  study.binned_failures = acc.binned_failures;
  return study;
}

}  // namespace effstat
