#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "cnmc/error.hpp"
#include "cnmc/linop.hpp"

using namespace cnmc;

TEST_SUITE("linop") {
  TEST_CASE("PV integral on harmonics") {
    for (int N : {2, 3}) {
      const FracParams p = make_params(N, 0.5);
      for (int k : {1, 2, 4}) {
        Shape y = Shape::zero(N, k, false);
        y.set(k, 0, 1.0);
        const Vec3 th = N == 2 ? Vec3(0.6, 0.8, 0.0) : Vec3(0.36, 0.48, 0.8);
        CHECK(l_alpha_pv(p, y, th, 1e-10) == doctest::Approx(lambda_k(p, k) * harmonic_eval(N, k, 0, th)).epsilon(1e-9));
      }
    }
  }

  TEST_CASE("Dh(0) solve and apply are inverse") {
    const FracParams p = make_params(3, 0.4);
    Shape s = Shape::zero(3, 4);
    for (std::size_t i = 0; i < s.size(); ++i) s.coeffs[i] = 0.1 * (i + 1);
    const Shape back = dh0_apply(dh0_solve(s, p), p);
    for (std::size_t i = 0; i < s.size(); ++i) CHECK(back.coeffs[i] == doctest::Approx(s.coeffs[i]).epsilon(1e-14));
    const auto d = dh0_diagonal(p, 4);
    CHECK(d[0] == doctest::Approx(-0.4 * lambda_k(p, 1)));
  }

  TEST_CASE("odd right-hand sides are rejected") {
    Shape s = Shape::zero(2, 3, false);
    s.set(1, 0, 1e-3);
    CHECK_THROWS_AS(dh0_solve(s, make_params(2, 0.5)), ValidationError);
  }

  TEST_CASE("spectrum at the sphere is the diagonal") {
    const FracParams p = make_params(2, 0.5);
    const Lattice L = make_lattice({{1, 0}, {0, 1}}, 2);
    const Spectrum sp = linearization_spectrum(p, 0.0, Shape::zero(2, 4), build_grid(2, 32), L, 1e-4, 1e-11);
    auto d = dh0_diagonal(p, 4);
    std::sort(d.begin(), d.end());
    REQUIRE(sp.eigenvalues.size() == d.size());
    for (std::size_t i = 0; i < d.size(); ++i) CHECK(sp.eigenvalues[i] == doctest::Approx(d[i]).epsilon(1e-5));
    CHECK(sp.negative == 1);
    CHECK_THROWS_AS(linearization_spectrum(p, 0.0, Shape::zero(2, 4), build_grid(2, 32), L, 1e-2, 1e-11), ValidationError);
  }
}
