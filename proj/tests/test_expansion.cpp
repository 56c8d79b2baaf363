#include <doctest.h>

#include <cmath>
#include <numbers>

#include "cnmc/error.hpp"
#include "cnmc/expansion.hpp"

using namespace cnmc;

TEST_SUITE("expansion") {
  TEST_CASE("square lattice constants") {
    const FracParams p = make_params(2, 0.5);
    const ExpansionData d = kappa_constants(p, make_lattice({{1, 0}, {0, 1}}, 2));
    CHECK(d.kappa0 == doctest::Approx(-d.phi.Phi0 / (p.alpha * d.lambda1)).epsilon(1e-14));
    CHECK(d.Psi0 == doctest::Approx(d.kappa0));
    CHECK(d.kappa0 == doctest::Approx(12.9101).epsilon(1e-5));
    CHECK(d.kappa1 == doctest::Approx(2.85934).epsilon(1e-5));
    CHECK(d.kappa2 == doctest::Approx(18.6356).epsilon(1e-5));
    CHECK(d.consistency < 1e-12);
    REQUIRE(d.kappa_tilde1.has_value());
    CHECK(*d.kappa_tilde1 == doctest::Approx(d.kappa1 / 2.0 * d.phi.sum_s2).epsilon(1e-13));
  }

  TEST_CASE("closed-form kappa1") {
    for (int N : {2, 3}) {
      const FracParams p = make_params(N, 0.3);
      const double s = N + p.alpha;
      std::vector<std::vector<double>> basis(static_cast<std::size_t>(N), std::vector<double>(static_cast<std::size_t>(N), 0.0));
      for (int i = 0; i < N; ++i) basis[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] = 1.0 + i;
      const ExpansionData d = kappa_constants(p, make_lattice(basis, N));
      CHECK(d.kappa1 == doctest::Approx(sphere_area(N) * s * (s + 2) / (2.0 * N * (d.lambda2 - d.lambda1))).epsilon(1e-13));
      REQUIRE(d.mu.has_value());
      CHECK(d.mu->size() == static_cast<std::size_t>(N));
    }
  }

  TEST_CASE("line lattice: mu_1 is 2 zeta(s+2)") {
    const FracParams p = make_params(2, 0.5);
    const ExpansionData d = kappa_constants(p, make_lattice({{1}}, 2));
    REQUIRE(d.mu.has_value());
    CHECK(d.mu->at(0) == doctest::Approx(2.0 * std::riemann_zeta(4.5)).epsilon(1e-10));
  }

  TEST_CASE("predicted shape matches the pointwise prediction") {
    const FracParams p = make_params(2, 0.5);
    const ExpansionData d = kappa_constants(p, make_lattice({{1}}, 2));
    const Shape s = predicted_shape(50.0, d, 8);
    const ShapeField f(s);
    for (double t : {0.0, 0.4, 1.3}) CHECK(f.value(circle_point(t)) == doctest::Approx(predicted_value(50.0, d, circle_point(t))).epsilon(1e-12));
    CHECK(s.get(0, 0) < 0.0);
  }

  TEST_CASE("non-constancy certificate") {
    const FracParams p = make_params(2, 0.5);
    CHECK(nonconstancy_certificate(make_lattice({{1}}, 2), p).nonconstant);
    CHECK_FALSE(nonconstancy_certificate(make_lattice({{1, 0}, {0, 1}}, 2), p).nonconstant);
    // full-rank lattices carry no certificate; anisotropy still shows in f~
    const auto rect = nonconstancy_certificate(make_lattice({{1, 0}, {0, 3}}, 2), p);
    CHECK_FALSE(rect.nonconstant);
    CHECK(rect.f_parallel > 2.0 * rect.f_perp);
  }

  TEST_CASE("Phi2 profile") {
    const FracParams p = make_params(2, 0.5);
    const PhiProfiles phi = phi_profiles(p, make_lattice({{1, 0}, {0, 1}}, 2));
    CHECK(phi.Phi2(circle_point(0.0)) == doctest::Approx(phi.Phi2(circle_point(0.9))).epsilon(1e-12));
    CHECK(phi.Phi0 == doctest::Approx(-0.5 * std::numbers::pi * phi.sum_s).epsilon(1e-14));
  }
}
