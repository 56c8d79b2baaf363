#pragma once

#include <Eigen/Dense>
#include <vector>

#include "cnmc/lattice.hpp"
#include "cnmc/sphere.hpp"
#include "cnmc/specfun.hpp"

namespace cnmc {

/// Principal value  PV int_S (phi(theta) - phi(sigma)) |theta - sigma|^{-(N+alpha)} dV(sigma),
/// symmetrised around the singular point (t <-> -t for N=2, beta <-> beta+pi
/// for N=3) and integrated with Gauss-Jacobi, doubled until stable to
/// tol * max(1, |value|).
double l_alpha_pv(const FracParams& params, const Shape& shape, const Vec3& theta, double tol);

/// Dh(0) = alpha (L_alpha - lambda_1), diagonal in the harmonic basis.
Shape dh0_apply(const Shape& shape, const FracParams& params);

/// Inverse of Dh(0) on the even space. Throws ValidationError when the input
/// carries odd-degree content above odd_tol (degree 1 is the kernel).
Shape dh0_solve(const Shape& rhs, const FracParams& params, double odd_tol = 1e-12);

/// Diagonal entries alpha (lambda_k - lambda_1) in the basis order of basis_indices(N, K, true).
std::vector<double> dh0_diagonal(const FracParams& params, int K);

/// Central finite-difference Jacobian of x -> analyze(script_h(tau, x)) on the
/// even coefficients of `shape`.
Eigen::MatrixXd fd_jacobian(const FracParams& params, double tau, const Shape& shape, const SphereGrid& grid,
                            const Lattice& L, double fd_step, double tol);

struct Spectrum {
  std::vector<double> eigenvalues;  // real parts, ascending
  double max_imag = 0.0;
  int negative = 0;
  Eigen::MatrixXd jacobian;
};

/// Eigenvalues of the finite-difference linearisation on even harmonics <= K.
Spectrum linearization_spectrum(const FracParams& params, double tau, const Shape& shape,
                                const SphereGrid& grid, const Lattice& L, double fd_step, double tol);

}  // namespace cnmc
