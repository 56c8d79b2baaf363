"""Nonlocal mean curvature of perturbed-sphere lattices."""

from ._core import (
    BranchPoint,
    ConvergenceError,
    ExpansionData,
    FracParams,
    Lattice,
    Shape,
    SolverOptions,
    SphereGrid,
    ValidationError,
    __version__,
    classical_limit_gap,
    d_coeff,
    default_resolution,
    gamma,
    h_nmc,
    kappa_constants,
    l_alpha_pv,
    lambda_asymptotic_constant,
    lambda_k,
    lattice_sum,
    linearization_spectrum,
    newton_solve,
    num_threads,
    predicted_shape,
    script_h,
    set_num_threads,
    sphere_area,
    trace_branch,
    verify_expansion,
)

__all__ = [name for name in dir() if not name.startswith("_")] + ["__version__"]
