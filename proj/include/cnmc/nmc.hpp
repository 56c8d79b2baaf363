#pragma once

#include <vector>

#include "cnmc/lattice.hpp"
#include "cnmc/sphere.hpp"
#include "cnmc/specfun.hpp"

namespace cnmc {

/// Geometry of the perturbed sphere S_phi = {(1+phi(s)) s} at one point.
struct SurfaceFrame {
  Vec3 position;   // F_phi(sigma)
  Vec3 grad;       // tangential gradient of phi
  Vec3 normal;     // outward unit normal
  double area_element = 1.0;  // J_phi
};

SurfaceFrame surface_frame(const ShapeField& phi, const Vec3& sigma);

/// Regularising pieces of the NMC integrand at (theta, sigma), psi = 1 + phi.
struct KernelTriple {
  double lambda1 = 0.0;  // psi(theta) - psi(sigma) - (theta - sigma) . grad psi(sigma)
  double lambda2 = 0.0;  // (psi(theta) - psi(sigma))^2
  double kbar = 1.0;     // ((psi(theta)-psi(sigma))^2/|theta-sigma|^2 + psi(sigma)psi(theta))^{-(N+alpha)/2}
};

KernelTriple kernel_triple(const FracParams& params, const ShapeField& phi, const Vec3& sigma,
                           const Vec3& theta);

double default_nmc_tol(int N);

struct HResult {
  std::vector<double> values;
  double error_estimate = 0.0;  // largest last-refinement change over the targets
  double kbar_min = 1.0;        // smallest K-bar met by the quadrature (diagnostic)
  int max_order = 0;            // largest quadrature order used
};

/// h(phi) at arbitrary unit vectors: the regularised three-term form of the
/// NMC, scaled so that h(0) = lambda_1. Gauss-Jacobi quadrature around the
/// singular point, doubled until successive values differ by < tol.
/// `check_grid` (when given) is used for the sup|phi| < 1 admissibility test.
HResult h_nmc_at(const FracParams& params, const Shape& shape, const std::vector<Vec3>& targets,
                 double tol, const SphereGrid* check_grid = nullptr);

HResult h_nmc(const FracParams& params, const Shape& shape, const SphereGrid& grid, double tol);

/// Interaction with the sphere translated by p/tau, polar form:
///   G_p = -alpha int_S int_0^1 psi(s)^N rho^{N-1} |tau(rho psi(s) s - psi(t) t) + p|^{-(N+alpha)} drho dV.
std::vector<double> g_single(const FracParams& params, double tau, const Shape& shape, const Vec3& p,
                             const SphereGrid& grid, int radial_order = 16);

struct GResult {
  std::vector<double> values;
  double kernel_error = 0.0;  // certified bound of the lattice-kernel truncation
  double near_radius = 0.0;
};

/// G = sum_p G_p over the lattice, through the interaction kernel.
GResult g_total(const FracParams& params, double tau, const Shape& shape, const SphereGrid& grid,
                const Lattice& L, double tol, int radial_order = 16);

struct ScriptHResult {
  std::vector<double> h;
  std::vector<double> G;
  std::vector<double> H;  // h + |tau|^{N+alpha} G
  double h_error = 0.0;
  double kbar_min = 1.0;
};

ScriptHResult script_h(const FracParams& params, double tau, const Shape& shape, const SphereGrid& grid,
                       const Lattice& L, double tol);

/// |tau| must stay below c0/4.
void check_tau(const Lattice& L, double tau);

}  // namespace cnmc
