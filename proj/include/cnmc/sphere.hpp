#pragma once

#include <Eigen/Dense>
#include <vector>

#include "cnmc/lattice.hpp"
#include "cnmc/specfun.hpp"

namespace cnmc {

/// (degree k, index m). N=2: m=0 -> cos kt, m=1 -> sin kt (k=0 has m=0 only).
/// N=3: m in [-k, k]; m>0 -> cos(m phi), m<0 -> sin(|m| phi), m=0 zonal.
/// Degree-1 functions are multiples of the coordinates: N=2 (m=0, 1) -> (x, y);
/// N=3 (m=1, -1, 0) -> (x, y, z).
struct HarmonicIndex {
  int k = 0;
  int m = 0;
  bool operator==(const HarmonicIndex&) const = default;
};

int harmonic_dim(int N, int k);
std::vector<HarmonicIndex> basis_indices(int N, int K, bool even_only);

/// A truncated real-harmonic expansion, orthonormal on S^{N-1}. With
/// even_only (the default) only even degrees are stored.
struct Shape {
  int N = 2;
  int K = 0;
  bool even_only = true;
  std::vector<double> coeffs;

  static Shape zero(int N, int K, bool even_only = true);

  [[nodiscard]] std::vector<HarmonicIndex> indices() const { return basis_indices(N, K, even_only); }
  [[nodiscard]] std::size_t size() const { return coeffs.size(); }
  /// Position of (k, m) in coeffs, or -1 when absent.
  [[nodiscard]] long position(int k, int m) const;
  [[nodiscard]] double get(int k, int m) const;
  void set(int k, int m, double c);
  /// Same function with cutoff K2 >= K (or truncated when K2 < K).
  [[nodiscard]] Shape with_cutoff(int K2) const;
  [[nodiscard]] Shape as_general() const;
};
using EvenShape = Shape;

/// Single orthonormal real harmonic. Throws ValidationError on a bad index.
double harmonic_eval(int N, int k, int m, const Vec3& theta);

/// All basis functions of basis_indices(N, K, even_only) at one point, with
/// tangential gradients.
class HarmonicBasis {
 public:
  HarmonicBasis(int N, int K, bool even_only);

  [[nodiscard]] std::size_t size() const { return idx_.size(); }
  [[nodiscard]] const std::vector<HarmonicIndex>& indices() const { return idx_; }
  void values(const Vec3& theta, double* out) const;
  void values_and_gradients(const Vec3& theta, double* out, Vec3* grad) const;

 private:
  int N_, K_;
  bool even_only_;
  std::vector<HarmonicIndex> idx_;
  std::vector<double> norm_;  // N=3 normalisation per basis function
};

/// Increments of an N=2 field between t0 and t0+u, evaluated without the
/// cancellation of a plain difference (delta ~ u, lambda1 ~ u^2 as u -> 0).
struct CircleIncrement {
  double value = 0.0;    // phi(t0 + u)
  double deriv = 0.0;    // phi'(t0 + u)
  double delta = 0.0;    // phi(t0) - phi(t0 + u)
  double lambda1 = 0.0;  // phi(t0) - phi(t0 + u) + phi'(t0 + u) sin u
};

struct FieldValue {
  double value = 0.0;
  Vec3 grad = Vec3::Zero();  // tangential gradient
};

/// Fast pointwise evaluation of a Shape.
class ShapeField {
 public:
  explicit ShapeField(const Shape& shape);

  [[nodiscard]] double value(const Vec3& theta) const;
  [[nodiscard]] FieldValue eval(const Vec3& theta) const;
  /// N=2 only.
  [[nodiscard]] CircleIncrement circle_increment(double t0, double u) const;
  [[nodiscard]] const Shape& shape() const { return shape_; }
  [[nodiscard]] bool is_zero() const { return zero_; }

 private:
  Shape shape_;
  HarmonicBasis basis_;
  bool zero_ = true;
  // N=2 fast path: per-degree (cos, sin) coefficients
  std::vector<double> ca_, sa_;
};

std::vector<double> synthesize(const Shape& shape, const std::vector<Vec3>& targets);

/// Quadrature grid on S^{N-1}. N=2: `resolution` equispaced angles. N=3:
/// `resolution` Gauss-Legendre polar nodes x 2*resolution azimuths.
struct SphereGrid {
  int N = 2;
  int resolution = 0;
  int n_polar = 0;
  int n_azimuth = 0;
  std::vector<Vec3> nodes;
  std::vector<double> weights;
  int max_exact_degree = 0;

  [[nodiscard]] std::size_t size() const { return nodes.size(); }
  /// Index of the antipode of node i.
  [[nodiscard]] std::size_t antipode(std::size_t i) const;
};

SphereGrid build_grid(int N, int resolution);
SphereGrid build_grid(const FracParams& params, int resolution);
int default_resolution(int N);

struct Analysis {
  Shape shape;
  double odd_residual = 0.0;         // L2 norm of the odd part (antipodal split of the node values)
  double truncation_residual = 0.0;  // L2 norm of everything the cutoff/parity discards
};

/// Discrete projection of node values onto harmonics of degree <= K. Needs
/// 2K + 2 <= max_exact_degree + 1 so the basis stays orthonormal on the grid.
Analysis analyze(const SphereGrid& grid, const std::vector<double>& values, int K,
                 bool even_only = true);

/// sup |phi| on a grid 4x denser than `grid`.
double dense_sup(const Shape& shape, const SphereGrid& grid);

/// Throws ValidationError unless sup |phi| < 1 on the dense check grid.
/// Returns the measured sup.
double check_admissible(const Shape& shape, const SphereGrid& grid);

/// The rotated shape phi o R^{-1} (exact for the truncated expansion).
Shape rotate(const Shape& shape, const Eigen::Matrix3d& R);

/// Point of S^1 at angle t.
inline Vec3 circle_point(double t) { return {std::cos(t), std::sin(t), 0.0}; }

}  // namespace cnmc
