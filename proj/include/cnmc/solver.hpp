#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cnmc/expansion.hpp"
#include "cnmc/lattice.hpp"
#include "cnmc/sphere.hpp"
#include "cnmc/specfun.hpp"

namespace cnmc {

struct SolverOptions {
  double tol = 1e-9;        // sup-norm of H(tau, phi) - lambda_1 over the grid nodes
  int max_iters = 40;
  double quad_tol = 1e-11;  // quadrature / lattice tolerance for each H evaluation
  double fd_step = 1e-4;    // used by the full-Jacobian fallback and the spectrum
  bool spectrum = false;    // attach the Morse count to each branch point
};

struct BranchPoint {
  double r = 0.0;
  double tau = 0.0;
  Shape shape;
  double residual_sup = 0.0;
  double residual_coeff = 0.0;  // l2 norm of the even coefficients <= K of the residual
  double odd_residual = 0.0;    // L2 norm of the odd part of the residual
  int newton_iters = 0;
  bool full_jacobian = false;   // the frozen-Jacobian iteration was abandoned
  double kbar_min = 1.0;
  std::optional<int> negative_eigenvalues;
  std::vector<double> spectrum;
};

/// Solves H(tau, phi) = lambda_1 for even phi of degree <= K (K from `initial`).
/// Quasi-Newton with the frozen diagonal Dh(0); switches to a finite-difference
/// Jacobian when the residual contracts by less than a factor 2 per step.
BranchPoint newton_solve(const FracParams& params, double tau, const Shape& initial, const SphereGrid& grid,
                         const Lattice& L, const SolverOptions& opts = {});

struct BranchTrace {
  std::vector<BranchPoint> points;
  std::optional<double> failed_r;
  std::string message;
};

/// Continuation over descending r: cold start from the predicted shape at the
/// largest r, warm starts afterwards. Stops at the first failure and keeps the
/// partial branch.
BranchTrace trace_branch(const FracParams& params, const std::vector<double>& r_values, const SphereGrid& grid,
                         const Lattice& L, int K, const ExpansionData& data, const SolverOptions& opts = {});

struct ExpansionRow {
  double r = 0.0;
  double e0 = 0.0;
  double e2 = 0.0;
  double c2_norm = 0.0;                 // l2 norm of the degree-2 coefficients of phi_r
  // Diagnostic: e0 minus the exactly known O(r^{-s}) term coming from the
  // quadratic self-interaction of the constant mode, c (Phi0/lambda1)^2 r^{-s}
  // with c = (alpha + 1 + 2N) / (2 alpha^2).
  double e0_quadratic = 0.0;
  double e0_corrected = 0.0;
  std::optional<double> e0_ratio;      // e0(r) / e0(r/2) when r/2 is on the branch
  std::optional<double> e2_ratio;
  std::optional<double> c2_ratio;
  std::optional<double> e0_corrected_ratio;
};

/// e0(r) = r^s mean(phi_r) + kappa0,
/// e2(r) = sup_theta |r^{s+2}(phi_r + kappa0 r^{-s}) - (kappa1 f~ - kappa2)|.
std::vector<ExpansionRow> verify_expansion(const std::vector<BranchPoint>& branch, const ExpansionData& data,
                                           const SphereGrid& grid);

}  // namespace cnmc
