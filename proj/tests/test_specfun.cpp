#include <doctest.h>

#include <cmath>
#include <numbers>

#include "cnmc/error.hpp"
#include "cnmc/specfun.hpp"

using namespace cnmc;

TEST_SUITE("specfun") {
  TEST_CASE("gamma matches the standard library") {
    for (double x : {0.1, 0.5, 1.0, 1.7, 3.25, 10.5, -0.5, -1.3, -2.7})
      CHECK(gamma_fn(x) == doctest::Approx(std::tgamma(x)).epsilon(1e-13));
    for (double x : {0.3, 2.0, 7.5, 40.0}) CHECK(log_gamma(x) == doctest::Approx(std::lgamma(x)).epsilon(1e-13));
  }

  TEST_CASE("gamma poles raise PoleError") {
    for (double x : {0.0, -1.0, -2.0, -7.0}) CHECK_THROWS_AS(gamma_fn(x), PoleError);
  }

  TEST_CASE("sphere and ball measures") {
    CHECK(sphere_area(2) == doctest::Approx(2.0 * std::numbers::pi));
    CHECK(sphere_area(3) == doctest::Approx(4.0 * std::numbers::pi));
    CHECK(ball_volume(2) == doctest::Approx(std::numbers::pi));
    CHECK(ball_volume(3) == doctest::Approx(4.0 * std::numbers::pi / 3.0));
  }

  TEST_CASE("eigenvalues") {
    const FracParams p = make_params(2, 0.5);
    CHECK(lambda_k(p, 0) == 0.0);
    CHECK(lambda_k(p, 1) == doctest::Approx(3.7081493546027424).epsilon(1e-14));
    for (int N : {2, 3})
      for (double a : {0.25, 0.5, 0.75}) {
        const FracParams q = make_params(N, a);
        for (int k = 1; k < 12; ++k) CHECK(lambda_k(q, k + 1) > lambda_k(q, k));
      }
  }

  TEST_CASE("eigenvalue growth rate") {
    for (int N : {2, 3}) {
      const FracParams p = make_params(N, 0.5);
      const double k = 4000.0;
      CHECK(lambda_k(p, static_cast<int>(k)) / std::pow(k, 1.5) ==
            doctest::Approx(lambda_asymptotic_constant(p)).epsilon(2e-3));
    }
  }

  TEST_CASE("classical limit gap shrinks as alpha -> 1") {
    for (int N : {2, 3}) {
      const double g1 = std::abs(classical_limit_gap(make_params(N, 0.99, 0.995), 3));
      const double g2 = std::abs(classical_limit_gap(make_params(N, 0.999, 0.9995), 3));
      CHECK(g2 < g1);
    }
  }

  TEST_CASE("parameter validation") {
    CHECK_THROWS_AS(make_params(4, 0.5), ValidationError);
    CHECK_THROWS_AS(make_params(2, 0.0), ValidationError);
    CHECK_THROWS_AS(make_params(2, 1.0), ValidationError);
    CHECK_THROWS_AS(make_params(2, 0.5, 0.4), ValidationError);
    CHECK_THROWS_AS(lambda_k(make_params(2, 0.5), -1), ValidationError);
    CHECK(make_params(3, 0.25).beta == doctest::Approx(0.625));
  }
}
