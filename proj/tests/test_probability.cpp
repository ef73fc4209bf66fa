#include <doctest.h>

#include <cmath>

#include "effstat/error.hpp"
#include "effstat/probability.hpp"
#include "oracles.hpp"

using namespace effstat;
using doctest::Approx;

TEST_CASE("poisson pmf") {
  CHECK(pmf_poisson(0, 1.0) == Approx(std::exp(-1.0)).epsilon(1e-14));
  CHECK(pmf_poisson(1, 3.0) == Approx(3 * std::exp(-3.0)).epsilon(1e-14));
  const double big = pmf_poisson(100, 100.0);
  CHECK(big == Approx(0.0398610).epsilon(1e-5));
  // recurrence from k = 0
  double term = std::exp(-100.0);
  for (int k = 1; k <= 100; ++k) term *= 100.0 / k;
  CHECK(big == Approx(term).epsilon(1e-12));
  CHECK_THROWS_AS(pmf_poisson(1, 0.0), DomainError);
  CHECK_THROWS_AS(pmf_poisson(1, std::nan("")), DomainError);
  CHECK_THROWS_AS(pmf_poisson(1, -1.0), DomainError);
}

TEST_CASE("poisson normalization") {
  for (const double mu : {0.1, 1.0, 7.5, 100.0, 1000.0}) {
    const auto kmax = static_cast<std::int64_t>(std::ceil(mu + 20 * std::sqrt(mu)));
    double sum = 0;
    for (const double v : poisson_pmf_row(mu, kmax)) sum += v;
    CHECK(sum >= 1 - 1e-9);
    CHECK(sum <= 1 + 1e-12);
  }
}

TEST_CASE("poisson upper cut") {
  double dropped = 0;
  const auto cut = poisson_upper_cut(10.0, 1e-10, &dropped);
  CHECK(dropped < 1e-10);
  double tail = 0;
  for (std::int64_t k = cut + 1; k < 200; ++k) tail += pmf_poisson(k, 10.0);
  CHECK(tail == Approx(dropped).epsilon(1e-6));
  CHECK(tail + pmf_poisson(cut, 10.0) >= 1e-10);
}

TEST_CASE("binomial pmf") {
  CHECK(pmf_binomial(5, 10, 0.5) == Approx(252.0 / 1024).epsilon(1e-14));
  CHECK(pmf_binomial(0, 7, 0.0) == 1.0);
  CHECK(pmf_binomial(3, 3, 1.0) == 1.0);
  CHECK(pmf_binomial(2, 3, 1.0) == 0.0);
  CHECK_THROWS_AS(pmf_binomial(4, 3, 0.5), DomainError);
  for (const std::int64_t n : {1, 5, 20, 21, 77, 200}) {
    for (const double p : {0.0, 0.01, 0.3, 0.5, 0.99, 1.0}) {
      double sum = 0;
      for (const double v : binomial_pmf_row(n, p)) sum += v;
      CHECK(sum == Approx(1.0).epsilon(1e-12));
    }
  }
  CHECK(pmf_binomial(500, 1000, 0.5) ==
        Approx(std::exp(std::lgamma(1001.0) - 2 * std::lgamma(501.0) - 1000 * std::log(2.0)))
            .epsilon(1e-10));
}

TEST_CASE("incomplete beta against boost") {
  for (const double a : {0.5, 1.0, 2.5, 11.0, 150.0}) {
    for (const double b : {0.5, 1.0, 3.0, 40.0}) {
      for (const double x : {0.001, 0.1, 0.37, 0.5, 0.8, 0.999}) {
        CAPTURE(a);
        CAPTURE(b);
        CAPTURE(x);
        CHECK(incomplete_beta(x, a, b) == Approx(oracle::beta_cdf(x, a, b)).epsilon(1e-12));
      }
    }
  }
  CHECK(incomplete_beta(0.0, 2, 3) == 0.0);
  CHECK(incomplete_beta(1.0, 2, 3) == 1.0);
}

TEST_CASE("beta quantile") {
  CHECK(quantile_beta(0.5, 1, 1) == Approx(0.5).epsilon(1e-14));
  CHECK(quantile_beta(0.975, 1, 10) == Approx(1 - std::pow(0.025, 0.1)).epsilon(1e-12));
  for (const double a : {0.5, 1.0, 6.0, 10.5, 300.0}) {
    for (const double b : {0.5, 2.0, 11.0, 250.0}) {
      for (const double q : {1e-6, 0.025, 0.158, 0.5, 0.841, 0.975, 1 - 1e-6}) {
        CAPTURE(a);
        CAPTURE(b);
        CAPTURE(q);
        const double x = quantile_beta(q, a, b);
        CHECK(x == Approx(oracle::beta_quantile(q, a, b)).epsilon(1e-10));
        CHECK(incomplete_beta(x, a, b) == Approx(q).epsilon(1e-8));
        CHECK(x == Approx(1 - quantile_beta(1 - q, b, a)).epsilon(1e-9));
      }
    }
  }
  CHECK(quantile_beta(0.0, 2, 3) == 0.0);
  CHECK(quantile_beta(1.0, 2, 3) == 1.0);
  CHECK_THROWS_AS(quantile_beta(1.5, 2, 3), DomainError);
}

TEST_CASE("normal quantile and level conversion") {
  for (const double p : {1e-12, 1e-5, 0.02, 0.3, 0.5, 0.77, 0.999, 1 - 1e-9}) {
    CAPTURE(p);
    const double z = normal_quantile(p);
    CHECK(z == Approx(boost::math::quantile(boost::math::normal(), p)).epsilon(1e-13));
    CHECK(normal_cdf(z) == Approx(p).epsilon(1e-12));
  }
  CHECK(z_from_level(std::erf(1 / std::sqrt(2.0))) == Approx(1.0).epsilon(1e-13));
  CHECK(z_from_level(0.6826895) == Approx(1.0).epsilon(1e-6));
  CHECK(z_from_level(0.95) == Approx(1.959964).epsilon(1e-6));
  CHECK(z_from_level(0.5) == Approx(0.6744898).epsilon(1e-6));
  CHECK(z_from_level(0.95) == Approx(oracle::z_for(0.95)).epsilon(1e-13));
  CHECK_THROWS_AS(z_from_level(0.0), DomainError);
  CHECK_THROWS_AS(z_from_level(1.0), DomainError);
}
