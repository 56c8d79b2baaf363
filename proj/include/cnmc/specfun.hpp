#pragma once

namespace cnmc {

/// Global problem parameters: ambient dimension, fractional order and the
/// Hoelder index of the function spaces (bookkeeping only).
struct FracParams {
  int N = 2;
  double alpha = 0.5;
  double beta = 0.75;

  /// Throws ValidationError unless 2 <= N <= 3 and 0 < alpha < beta < 1.
  void validate() const;
};

/// Convenience constructor; beta defaults to the midpoint of (alpha, 1).
FracParams make_params(int N, double alpha);
FracParams make_params(int N, double alpha, double beta);

/// Gamma function on the real line. Lanczos (g=7, 9 terms) for x >= 0.5 and
/// the reflection formula below. Throws PoleError at 0, -1, -2, ...
double gamma_fn(double x);

/// log|Gamma(x)| for x > 0.
double log_gamma(double x);

/// Surface measure |S^{n-1}| of the unit sphere in R^n (n >= 1).
double sphere_area(int n);

/// Volume |B^n| of the unit ball in R^n (n >= 0).
double ball_volume(int n);

/// The normalising constant d_{N,alpha} = (1-alpha) Gamma((N+1)/2) / ((N-1) pi^{(N-1)/2}).
double d_coeff(const FracParams& params);

/// Eigenvalue of the spherical fractional operator L_alpha on degree-k
/// harmonics. lambda_0 is returned as an exact zero.
double lambda_k(const FracParams& params, int k);

/// The constant C with lambda_k ~ C k^{1+alpha} as k -> infinity.
double lambda_asymptotic_constant(const FracParams& params);

/// 2 d_{N,alpha} lambda_k - k(k+N-2)/(N-1): deviation from the classical
/// Jacobi eigenvalue of the sphere.
double classical_limit_gap(const FracParams& params, int k);

}  // namespace cnmc
