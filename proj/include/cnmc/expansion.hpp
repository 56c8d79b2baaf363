#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "cnmc/lattice.hpp"
#include "cnmc/sphere.hpp"
#include "cnmc/specfun.hpp"

namespace cnmc {

/// tau-derivatives of G(tau, 0) at tau = 0:
///   Phi0 = -(alpha |S| / N) sum |p|^{-s},
///   Phi2(theta) = a1 sum |p|^{-(s+2)} - a2 theta^T M theta,   M = sum p p^T |p|^{-(s+4)},
/// with s = N + alpha.
struct PhiProfiles {
  double a1 = 0.0, a2 = 0.0;
  double sum_s = 0.0;   // sum |p|^{-s}
  double sum_s2 = 0.0;  // sum |p|^{-(s+2)}
  Eigen::Matrix3d moment = Eigen::Matrix3d::Zero();
  double Phi0 = 0.0;
  double tail = 0.0;  // largest certified tail among the sums

  [[nodiscard]] double Phi2(const Vec3& theta) const;
  /// f~(theta) = sum (theta . p)^2 |p|^{-(s+4)}
  [[nodiscard]] double directional(const Vec3& theta) const { return theta.dot(moment * theta); }
};

PhiProfiles phi_profiles(const FracParams& params, const Lattice& L, double tol = 1e-10);

struct ExpansionData {
  FracParams params;
  PhiProfiles phi;
  double lambda1 = 0.0, lambda2 = 0.0;
  double Psi0 = 0.0;  // -Phi0 / (alpha lambda1), equal to kappa0
  double kappa0 = 0.0, kappa1 = 0.0, kappa2 = 0.0;
  std::optional<std::vector<double>> mu;      // rectangular lattices
  std::optional<double> kappa_tilde1;         // square lattices
  double consistency = 0.0;  // residual of the diagonal inversion checks
};

/// Expansion constants, using
///   phi_r = -tau^s (Psi0 + tau^2/2 Psi2) + O(tau^{2s}),  Psi_j = Dh(0)^{-1} Phi_j,
/// which gives kappa1 = |S| s (s+2) / (2 N (lambda2 - lambda1)) and the matching kappa2.
ExpansionData kappa_constants(const FracParams& params, const Lattice& L, double tol = 1e-10);

/// Psi2 = Dh(0)^{-1} Phi2 as an even shape (degrees 0 and 2).
Shape psi2_shape(const ExpansionData& data, int K);

/// phi_r(theta) ~ r^{-s} (-kappa0 + r^{-2} (kappa1 f~(theta) - kappa2)), projected onto harmonics <= K.
Shape predicted_shape(double r, const ExpansionData& data, int K);

/// Value of the two-term prediction at one point.
double predicted_value(double r, const ExpansionData& data, const Vec3& theta);

struct NonconstancyCertificate {
  double f_parallel = 0.0;  // f~(e_1)
  double f_perp = 0.0;      // f~(e_N)
  bool nonconstant = false;
};

NonconstancyCertificate nonconstancy_certificate(const Lattice& L, const FracParams& params, double tol = 1e-10);

}  // namespace cnmc
