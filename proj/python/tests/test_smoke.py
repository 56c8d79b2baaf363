import json
import math

import numpy as np
import pytest

import cnmc


@pytest.fixture(scope="module")
def square():
    return cnmc.Lattice([[1, 0], [0, 1]], 2)


@pytest.fixture(scope="module")
def params():
    return cnmc.FracParams(2, 0.5)


def test_version():
    assert cnmc.__version__.startswith("v")


def test_eigenvalues(params):
    assert cnmc.lambda_k(params, 0) == 0.0
    assert cnmc.lambda_k(params, 1) == pytest.approx(3.7081493546027424, rel=1e-14)


def test_validation_errors(square):
    with pytest.raises(cnmc.ValidationError):
        cnmc.FracParams(4, 0.5)
    with pytest.raises(ValueError):
        cnmc.Lattice([[1, 0], [2, 0]], 2)
    with pytest.raises(cnmc.ValidationError):
        cnmc.lattice_sum(square, 2.0)


def test_lattice_sum_zeta():
    line = cnmc.Lattice([[1]], 2)
    r = cnmc.lattice_sum(line, 4.5, tol=1e-13)
    assert r["value"] == pytest.approx(2 * 1.0547075107614543, rel=1e-12)
    assert r["tail_bound"] <= 1e-13


def test_sphere_nmc(params):
    grid = cnmc.SphereGrid(2, 32)
    assert grid.nodes.shape == (32, 2)
    assert grid.weights.sum() == pytest.approx(2 * math.pi)
    h = cnmc.h_nmc(params, cnmc.Shape(2, 0), grid)
    assert np.max(np.abs(h - cnmc.lambda_k(params, 1))) < 1e-8


def test_script_h_even_in_tau(params, square):
    grid = cnmc.SphereGrid(2, 32)
    s = cnmc.Shape(2, 4)
    s.set(2, 0, 0.02)
    a = cnmc.script_h(params, 0.05, s, grid, square)
    b = cnmc.script_h(params, -0.05, s, grid, square)
    assert np.array_equal(a["H"], b["H"])


def test_constants(params, square):
    d = cnmc.kappa_constants(params, square)
    assert d.kappa0 == pytest.approx(-d.Phi0 / (0.5 * d.lambda1))
    assert d.to_dict()["kappa1"] == pytest.approx(d.kappa1)


def test_branch_and_verify(params, square):
    grid = cnmc.SphereGrid(2, 64)
    data = cnmc.kappa_constants(params, square)
    tr = cnmc.trace_branch(params, [60, 30], grid, square, 6, data)
    assert tr["failed_r"] is None
    pts = tr["points"]
    assert [p.r for p in pts] == [60, 30]
    assert all(p.residual_sup <= 1e-9 for p in pts)
    assert all(p.shape.get(0, 0) < 0 for p in pts)
    rows = cnmc.verify_expansion(pts, data, grid)
    assert rows[0]["e0_ratio"] is not None
    shape_json = json.dumps(pts[0].shape.to_dict())
    assert cnmc.Shape.from_json(shape_json).coeffs == pts[0].shape.coeffs


def test_spectrum_at_sphere(params, square):
    sp = cnmc.linearization_spectrum(params, 0.0, cnmc.Shape(2, 4), cnmc.SphereGrid(2, 32), square)
    assert sp["negative"] == 1
    assert sp["eigenvalues"][0] == pytest.approx(-0.5 * cnmc.lambda_k(params, 1), abs=1e-5)


def test_nonconvergence(params, square):
    opts = cnmc.SolverOptions(max_iters=0)
    with pytest.raises(cnmc.ConvergenceError):
        cnmc.newton_solve(params, 0.05, cnmc.Shape(2, 4), cnmc.SphereGrid(2, 32), square, opts)
