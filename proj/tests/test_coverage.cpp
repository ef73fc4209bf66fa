#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "effstat/coverage.hpp"
#include "effstat/error.hpp"
#include "effstat/probability.hpp"
#include "effstat/variance.hpp"

using namespace effstat;
using doctest::Approx;

namespace {

constexpr double kLevel = 0.6827;

}  // namespace

TEST_CASE("method lookup") {
  for (const auto& name : count_method_names()) CHECK(count_method(name).name == name);
  CHECK_THROWS_AS(count_method("agresti"), DomainError);
  CHECK_THROWS_AS(count_method("wilson-poissonx"), DomainError);
  CHECK_THROWS_AS(count_method("wilson-poisson:taylor"), DomainError);
  const auto m = count_method("wilson-poisson:large-n");
  const auto iv = m.build({5, 5}, kLevel);
  CHECK(iv.lower == wilson_poisson({5, 5}, kLevel, FnMode::large_n()).lower);
}

TEST_CASE("binomial coverage by enumeration") {
  const auto wilson_m = count_method("wilson");
  CHECK(coverage_binomial(wilson_m, 0.5, 10, kLevel) == Approx(0.65625).epsilon(1e-12));
  // by hand: covered k are those whose interval contains p
  double manual = 0;
  for (std::int64_t k = 0; k <= 10; ++k)
    if (wilson({k, 10 - k}, kLevel).contains(0.5)) manual += pmf_binomial(k, 10, 0.5);
  CHECK(manual == 0.65625);

  for (const auto& name : count_method_names()) {
    const auto m = count_method(name);
    const double at_zero = coverage_binomial(m, 0.0, 7, kLevel);
    CHECK(at_zero == (m.build({0, 7}, kLevel).lower == 0.0 ? 1.0 : 0.0));
  }
}

TEST_CASE("clopper-pearson never undercovers") {
  const auto cp = count_method("clopper-pearson");
  IntervalTable table(cp, kLevel);
  table.prepare(100);
  for (std::int64_t n = 1; n <= 100; ++n)
    for (int i = 1; i <= 99; ++i) REQUIRE(coverage_binomial(std::as_const(table), i / 100.0, n) >= kLevel);
  CHECK(coverage_poisson(count_method("clopper-pearson"), 0.5, 5, 0.95).coverage >= 0.95);
}

TEST_CASE("poisson coverage") {
  const auto w = count_method("wilson");
  // fixed-n coverage oscillates with n at this p; compare with its local mean
  const auto far = coverage_poisson(w, 0.5, 400, kLevel);
  double local = 0;
  for (std::int64_t n = 380; n <= 420; ++n) local += coverage_binomial(w, 0.5, n, kLevel);
  CHECK(std::abs(far.coverage - local / 41) < 0.01);
  CHECK(far.truncation_bound < 1e-10);

  const auto j = coverage_poisson(count_method("bayes-jeffreys"), 0.999, 5, kLevel);
  CHECK(j.coverage < 0.05);

  // convex combination of fixed-n coverages, n-hat = 0 excluded
  IntervalTable table(w, kLevel);
  const auto res = coverage_poisson(table, 0.3, 4.5);
  double mix = 0;
  double lo = 1, hi = 0;
  for (std::int64_t m = 1; m <= res.n_hat_max; ++m) {
    const double c = coverage_binomial(std::as_const(table), 0.3, m);
    mix += pmf_poisson(m, 4.5) * c;
    lo = std::min(lo, c);
    hi = std::max(hi, c);
  }
  CHECK(res.coverage == Approx(mix / -std::expm1(-4.5)).epsilon(1e-12));
  CHECK(res.coverage >= lo);
  CHECK(res.coverage <= hi);
  CHECK_THROWS_AS(coverage_poisson(w, 0.3, 0.0, kLevel), DomainError);
}

TEST_CASE("average coverage") {
  const double cp = average_coverage(count_method("clopper-pearson"), 20, kLevel, 1000, Sampling::Binomial);
  const double na = average_coverage(count_method("normal"), 20, kLevel, 1000, Sampling::Binomial);
  const double wi = average_coverage(count_method("wilson"), 20, kLevel, 1000, Sampling::Binomial);
  CHECK(cp > kLevel);
  CHECK(na < kLevel);
  CHECK(std::abs(wi - kLevel) < std::abs(cp - kLevel));
  CHECK(std::abs(wi - kLevel) < std::abs(na - kLevel));
  CHECK(average_coverage(count_method("normal"), 10, kLevel, 1000, Sampling::Poisson) < kLevel);
  // grid density barely matters
  const double coarse = average_coverage(count_method("wilson"), 20, kLevel, 500, Sampling::Binomial);
  CHECK(std::abs(coarse - wi) < 1e-3);
  CHECK_THROWS_AS(average_coverage(count_method("wilson"), 20, kLevel, 50, Sampling::Binomial), DomainError);
}

TEST_CASE("grid scans") {
  const std::vector<CountMethod> methods{count_method("wilson"), count_method("clopper-pearson"),
                                         count_method("bayes-jeffreys"),
                                         count_method("wilson-poisson:large-n")};
  std::vector<double> p_grid, n_grid;
  for (int i = 1; i <= 50; ++i) p_grid.push_back(i / 51.0);
  for (int i = 1; i <= 30; ++i) n_grid.push_back(i);
  const auto one = scan_grid(methods, p_grid, n_grid, kLevel, Sampling::Poisson, 1);
  const auto many = scan_grid(methods, p_grid, n_grid, kLevel, Sampling::Poisson, 8);
  REQUIRE(one.size() == methods.size() * p_grid.size() * n_grid.size());
  for (std::size_t i = 0; i < one.size(); ++i) {
    REQUIRE(one[i].coverage == many[i].coverage);
    REQUIRE(one[i].error.empty());
  }
  // row-major order and mirror symmetry
  CHECK(one[0].method == "wilson");
  CHECK(one[0].p == p_grid[0]);
  CHECK(one[1].n == n_grid[1]);
  for (std::size_t ip = 0; ip < p_grid.size(); ++ip) {
    const std::size_t mirror = p_grid.size() - 1 - ip;
    for (std::size_t in = 0; in < n_grid.size(); ++in)
      CHECK(one[ip * n_grid.size() + in].coverage ==
            Approx(one[mirror * n_grid.size() + in].coverage).epsilon(1e-12));
  }
  // single-point scan equals the direct call
  const std::vector<double> p1{0.3}, n1{7};
  const auto cell = scan_grid(std::span(methods).first(1), p1, n1, kLevel, Sampling::Binomial);
  CHECK(cell[0].coverage == coverage_binomial(methods[0], 0.3, 7, kLevel));
  // errors stay in their cell
  const std::vector<double> bad{2.5, 3};
  const auto mixed = scan_grid(std::span(methods).first(1), p1, bad, kLevel, Sampling::Binomial);
  CHECK_FALSE(mixed[0].error.empty());
  CHECK(mixed[1].error.empty());
}

TEST_CASE("large-n generalized wilson avoids deep undercoverage at small n") {
  const auto exact = count_method("wilson-poisson:exact");
  const auto large = count_method("wilson-poisson:large-n");
  IntervalTable te(exact, kLevel), tl(large, kLevel);
  int exact_bad = 0, large_bad = 0;
  for (int n = 1; n <= 10; ++n) {
    for (int i = 1; i <= 99; ++i) {
      const double p = i / 100.0;
      if (coverage_poisson(te, p, n).coverage < kLevel - 0.02) ++exact_bad;
      if (coverage_poisson(tl, p, n).coverage < kLevel - 0.02) ++large_bad;
    }
  }
  CHECK(exact_bad > 0);
  CHECK(large_bad == 0);
}

TEST_CASE("poisson trial study") {
  RngStream rng(5);
  const auto s = simulate_poisson_trials(0.3, 4, 200000, rng, 2);
  CHECK(std::abs(s.mc_variance - s.predicted) < 4 * s.std_error);
  CHECK(s.skipped > 0);
  RngStream a(5), b(5);
  CHECK(simulate_poisson_trials(0.3, 4, 50000, a, 1).mc_variance ==
        simulate_poisson_trials(0.3, 4, 50000, b, 3).mc_variance);
}

TEST_CASE("weighted study") {
  RngStream rng(1);
  const auto unit = simulate_weighted_variance(Constant{1.0}, 0.5, 100, 20000, rng);
  for (std::size_t e = 0; e < kWeightedEstimators; ++e) {
    CAPTURE(e);
    CHECK(unit.ratio(static_cast<WeightedEstimator>(e)) == Approx(1.0).epsilon(0.03));
  }
  const auto exp5 = simulate_weighted_variance(Exponential{5.0}, 0.5, 5, 40000, rng);
  CHECK(std::abs(exp5.ratio(WeightedEstimator::LargeNEffective) - 1) <
        std::abs(exp5.ratio(WeightedEstimator::Unity) - 1));
  const auto tight = simulate_weighted_variance(Normal{10, 0.1}, 0.5, 100, 10000, rng);
  CHECK(tight.min_neff_ratio >= 0.99);
  CHECK(tight.max_neff_ratio <= 1.0 + 1e-12);
  CHECK_THROWS_AS(simulate_weighted_variance(Uniform{-2, 1}, 0.5, 10, 10000, rng), DomainError);
  CHECK_THROWS_AS(simulate_weighted_variance(Constant{1.0}, 0.5, 10, 100, rng), DomainError);

  RngStream a(9), b(9);
  const auto x = simulate_weighted_variance(Exponential{5.0}, 0.5, 20, 10000, a, 1);
  const auto y = simulate_weighted_variance(Exponential{5.0}, 0.5, 20, 10000, b, 4);
  CHECK(x.mc_variance == y.mc_variance);
  CHECK(x.mean_estimate == y.mean_estimate);
}

TEST_CASE("weighted coverage") {
  RngStream rng(3);
  const double c = coverage_weighted_mc(Constant{1.0}, 0.4, 50, kLevel, 20000, rng);
  CHECK(c == Approx(kLevel).epsilon(0.05));
}

TEST_CASE("extra-fluctuation study") {
  RngStream rng(4);
  const auto none = simulate_extra({1000, 0.5, 0, 0, 20000}, kLevel, rng);
  CHECK(none.formula_sd == Approx(none.mc_sd).epsilon(0.03));
  CHECK(none.redraws == 0);
  const auto bkg = simulate_extra(ScenarioExtra::with_background(1000, 0.3, 0.2, 20000), kLevel, rng);
  CHECK(bkg.formula_sd == Approx(bkg.mc_sd).epsilon(0.1));
  CHECK(bkg.wilson_extra_coverage == Approx(kLevel).epsilon(0.05));
  CHECK(bkg.degenerate_intervals == 0);
  CHECK_THROWS_AS(simulate_extra({1000, 0.5, 0, 0, 10}, kLevel, rng), DomainError);
}

TEST_CASE("covariate study with constant curves") {
  RngStream rng(6);
  XdepOptions options;
  options.bootstrap_replicas = 100;
  const auto s = simulate_xdep(XScenario::constant(0.4, 2.0), 400, 500, rng, options, 2);
  CHECK(s.p_bar == Approx(0.4));
  CHECK(s.mean_binned == Approx(s.mc_variance).epsilon(0.15));
  CHECK(s.mean_bootstrap == Approx(s.mc_variance).epsilon(0.15));
  CHECK(s.mean_wrong == Approx(s.mc_variance).epsilon(0.15));
  CHECK(s.mean_binned == Approx(s.mean_wrong).epsilon(0.1));
  CHECK_THROWS_AS(simulate_xdep(XScenario::constant(0.4), 400, 100, rng), DomainError);
}
