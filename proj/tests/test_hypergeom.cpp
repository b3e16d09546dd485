#include <doctest.h>

#include <thread>

#include "stiefeldp/error.hpp"
#include "stiefeldp/hypergeom.hpp"
#include "support.hpp"

using namespace stiefeldp;

TEST_CASE("zero argument") {
  CHECK(log_0f1(1.5, Concentration::zeros(1)) == 0.0);
  CHECK(log_0f1(2.5, Concentration::zeros(3)) == 0.0);
}

TEST_CASE("p = 1, d = 3 matches log(sinh k / k)") {
  for (double k : {0.1, 1.0, 2.0, 5.0, 10.0, 20.0}) {
    CAPTURE(k);
    CHECK(std::abs(log_0f1(1.5, Concentration{k}) - testing::log_sinhc(k)) <= 1e-8);
  }
  CHECK(std::exp(log_0f1(1.5, Concentration{2.0})) == doctest::Approx(1.81343).epsilon(1e-5));
}

TEST_CASE("p = 1, d = 4 and 5 match the scalar Bessel series") {
  for (int d : {4, 5})
    for (double k : {0.5, 3.0, 10.0, 25.0}) {
      CAPTURE(d);
      CAPTURE(k);
      CHECK(std::abs(log_0f1(0.5 * d, Concentration{k}) - testing::scalar_log_0f1(0.5 * d, k * k / 4.0)) <= 1e-8);
    }
}

TEST_CASE("p = 2, d = 3 agrees with the Monte Carlo normalizer") {
  Rng rng(21);
  const Concentration k{5.0, 2.0};
  const auto mc = mc_normalizer(3, k, sample_haar(3, 2, rng), 1000000, rng);
  CHECK(std::abs(std::exp(log_0f1(1.5, k)) - mc.estimate) <= 3 * mc.std_error);
}

TEST_CASE("p = 3, d = 4 agrees with the Monte Carlo normalizer") {
  Rng rng(22);
  const Concentration k{3.0, 2.0, 1.0};
  const auto mc = mc_normalizer(4, k, sample_haar(4, 3, rng), 1000000, rng);
  CHECK(std::abs(std::exp(log_0f1(2.0, k)) - mc.estimate) <= 3 * mc.std_error);
}

TEST_CASE("mc_normalizer") {
  Rng rng(23);
  const auto zero = mc_normalizer(3, Concentration::zeros(2), sample_haar(3, 2, rng), 1000, rng);
  CHECK(zero.estimate == 1.0);
  CHECK(zero.std_error == 0.0);

  const auto five = mc_normalizer(3, Concentration{5.0}, sample_haar(3, 1, rng), 200000, rng);
  CHECK(std::abs(five.estimate - std::sinh(5.0) / 5.0) <= 3 * five.std_error);

  const Concentration k{4.0, 3.0};
  const auto a = mc_normalizer(3, k, sample_haar(3, 2, rng), 200000, rng);
  const auto b = mc_normalizer(3, k, sample_haar(3, 2, rng), 200000, rng);
  CHECK(std::abs(a.estimate - b.estimate) <= 3 * std::hypot(a.std_error, b.std_error));

  CHECK_THROWS_AS(mc_normalizer(3, k, sample_haar(3, 2, rng), 999, rng), Error);
}

TEST_CASE("mean coefficient") {
  const auto u2 = mean_coefficient_matrix(3, Concentration{2.0});
  const double coth2 = 1.0 / std::tanh(2.0);
  CHECK(u2.u(0, 0) == doctest::Approx((coth2 - 0.5) / 2.0).epsilon(1e-6));
  CHECK(u2.u(0, 0) == doctest::Approx(0.26866).epsilon(1e-4));
  CHECK_FALSE(u2.near_uniform);

  const auto u5 = mean_coefficient_matrix(3, Concentration{5.0});
  CHECK(5.0 * u5.u(0, 0) == doctest::Approx(1.0 / std::tanh(5.0) - 0.2).epsilon(1e-6));

  const auto tiny = mean_coefficient_matrix(3, Concentration{1e-5, 2.0});
  CHECK(tiny.near_uniform);
  CHECK(tiny.u(0, 1) == 0.0);
}

TEST_CASE("strictly increasing in each coordinate") {
  for (int fixed = 0; fixed <= 10; ++fixed) {
    double last_a = -1.0, last_b = -1.0;
    for (int v = 0; v <= 10; ++v) {
      const double a = log_0f1(1.5, Concentration{double(v), double(fixed)});
      const double b = log_0f1(1.5, Concentration{double(fixed), double(v)});
      REQUIRE(a > last_a);
      REQUIRE(b > last_b);
      last_a = a;
      last_b = b;
    }
  }
}

TEST_CASE("permutation symmetry") {
  const double ref = log_0f1(2.0, Concentration{3.0, 7.0, 1.5});
  for (auto k : {Concentration{7.0, 3.0, 1.5}, Concentration{1.5, 3.0, 7.0}, Concentration{3.0, 1.5, 7.0}})
    CHECK(std::abs(log_0f1(2.0, k) - ref) <= 1e-12);
  CHECK(std::abs(log_0f1(1.5, Concentration{9.0, 4.0}) - log_0f1(1.5, Concentration{4.0, 9.0})) <= 1e-12);
}

TEST_CASE("normalizer is bounded by exp(sum kappa) / prod kappa up to a constant") {
  auto scaled = [](double k) { return std::exp(2.0 * k - 2.0 * std::log(k) - log_0f1(1.5, Concentration{k, k})); };
  const double base = scaled(5.0);
  for (double k : {10.0, 20.0, 40.0}) CHECK(scaled(k) <= 10.0 * base);
}

TEST_CASE("large arguments escalate the order; unreachable ones throw") {
  const auto v = log_0f1_detailed(1.5, Concentration{80.0, 80.0});
  CHECK(v.order > 60);
  CHECK(std::isfinite(v.log_value));
  try {
    log_0f1(2.0, Concentration{900.0, 900.0, 900.0});
    FAIL("expected a truncation error");
  } catch (const TruncationError& e) {
    CHECK(e.code() == ErrorCode::kTruncationInsufficient);
    CHECK(e.order_reached() == max_truncation_order(3));
  }
}

TEST_CASE("argument checks") {
  CHECK_THROWS_AS(log_0f1(0.5, Concentration{1.0, 1.0}), Error);
  CHECK_THROWS_AS(Concentration{-1.0}, Error);
  CHECK_THROWS_AS(Concentration(Vector(0)), Error);
}

TEST_CASE("cache is transparent and thread safe") {
  clear_hypergeom_cache();
  const Concentration k{6.5, 2.25};
  const double uncached = log_0f1_uncached(1.5, k).log_value;
  std::vector<double> results(8);
  std::vector<std::thread> workers;
  for (int t = 0; t < 8; ++t)
    workers.emplace_back([&, t] { results[t] = log_0f1(1.5, Concentration{6.5 + 0.0 * t, 2.25}); });
  for (auto& w : workers) w.join();
  for (double r : results) CHECK(r == uncached);
  CHECK(hypergeom_cache_size() >= 1);
}
