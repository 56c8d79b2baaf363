#include <doctest.h>

#include <cmath>

#include "cnmc/error.hpp"
#include "cnmc/parallel.hpp"
#include "cnmc/solver.hpp"

using namespace cnmc;

TEST_SUITE("solver") {
  TEST_CASE("tau = 0 keeps the sphere") {
    const FracParams p = make_params(2, 0.5);
    const Lattice L = make_lattice({{1, 0}, {0, 1}}, 2);
    const BranchPoint bp = newton_solve(p, 0.0, Shape::zero(2, 4), build_grid(2, 32), L);
    CHECK(bp.newton_iters == 0);
    CHECK(bp.residual_sup < 1e-9);
    CHECK(std::isinf(bp.r));
  }

  TEST_CASE("short Z^2 branch converges and shrinks") {
    const FracParams p = make_params(2, 0.5);
    const Lattice L = make_lattice({{1, 0}, {0, 1}}, 2);
    const SphereGrid grid = build_grid(2, 64);
    const ExpansionData d = kappa_constants(p, L);
    SolverOptions o;
    o.spectrum = true;
    const BranchTrace tr = trace_branch(p, {60, 30}, grid, L, 6, d, o);
    REQUIRE_FALSE(tr.failed_r.has_value());
    REQUIRE(tr.points.size() == 2);
    for (const auto& pt : tr.points) {
      CHECK(pt.residual_sup <= o.tol);
      CHECK(pt.shape.get(0, 0) < 0.0);
      CHECK(pt.odd_residual < 1e-12);
      REQUIRE(pt.negative_eigenvalues.has_value());
      CHECK(*pt.negative_eigenvalues == 1);
    }
    const auto rows = verify_expansion(tr.points, d, grid);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].e0_ratio.has_value());
    CHECK_FALSE(rows[1].e0_ratio.has_value());
    CHECK(std::abs(rows[0].e0) < 0.1);
  }

  TEST_CASE("the solve is independent of the thread count") {
    const FracParams p = make_params(2, 0.5);
    const Lattice L = make_lattice({{1}}, 2);
    const SphereGrid grid = build_grid(2, 32);
    const Shape init = predicted_shape(40.0, kappa_constants(p, L), 4);
    set_num_threads(1);
    const BranchPoint a = newton_solve(p, 1.0 / 40, init, grid, L);
    set_num_threads(5);
    const BranchPoint b = newton_solve(p, 1.0 / 40, init, grid, L);
    set_num_threads(0);
    CHECK(a.shape.coeffs == b.shape.coeffs);
  }

  TEST_CASE("bad continuation requests") {
    const FracParams p = make_params(2, 0.5);
    const Lattice L = make_lattice({{1, 0}, {0, 1}}, 2);
    const SphereGrid grid = build_grid(2, 32);
    const ExpansionData d = kappa_constants(p, L);
    CHECK_THROWS_AS(trace_branch(p, {20, 40}, grid, L, 4, d), ValidationError);
    CHECK_THROWS_AS(trace_branch(p, {}, grid, L, 4, d), ValidationError);
    CHECK_THROWS_AS(trace_branch(p, {40, 2}, grid, L, 4, d), ValidationError);
    SolverOptions o;
    o.max_iters = 0;
    CHECK_THROWS_AS(newton_solve(p, 0.05, Shape::zero(2, 4), grid, L, o), ConvergenceError);
  }
}
