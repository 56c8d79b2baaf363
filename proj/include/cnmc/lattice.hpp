#pragma once

#include <Eigen/Dense>
#include <array>
#include <map>
#include <variant>
#include <vector>

#include "cnmc/specfun.hpp"

namespace cnmc {

/// Points of R^N (N <= 3) are stored zero-padded in R^3.
using Vec3 = Eigen::Vector3d;

/// An M-dimensional Bravais lattice spanned by a_1..a_M in R^M, embedded in
/// R^N by zero padding. Immutable after construction.
struct Lattice {
  int N = 2;
  int M = 2;
  std::vector<Vec3> basis;   // embedded basis vectors
  Eigen::MatrixXd basis_m;   // M x M, row i = a_i in R^M
  double c0 = 0.0;           // min |p| over nonzero lattice points
  double covolume = 0.0;     // |det basis_m|
  double gram_min_eig = 0.0; // smallest eigenvalue of the Gram matrix
  double cell_radius = 0.0;  // (1/2) sum |a_i|: covering radius of the basis cell
  double dual_min_norm = 0.0;
  bool is_rectangular = false;
  bool is_square = false;
};

/// Build a lattice from M basis vectors of dimension M (1 <= M <= N).
/// Throws ValidationError on a degenerate basis or bad dimensions.
Lattice make_lattice(const std::vector<std::vector<double>>& basis, int N);

/// All p in L* with |p| <= R, sorted by |p| then by integer coordinates.
std::vector<Vec3> enumerate_shell(const Lattice& L, double R);

struct LatticeSumResult {
  double value = 0.0;
  double truncation_radius = 0.0;
  double tail_bound = 0.0;  // bound on |exact - value|
  long terms_used = 0;
};

struct UnitWeight {};
struct DirectionalWeight {
  Vec3 theta;  // unit vector in R^N
};
using SumWeight = std::variant<UnitWeight, DirectionalWeight>;

enum class SumMethod {
  /// Gaussian-regularised near sum + closed-form continuum; converges like
  /// exp(-R^2/w^2) and reaches 1e-12 with a few hundred points.
  accelerated,
  /// Plain partial sum over |p| <= R, R doubled from 8 c0 until the
  /// certified tail bound falls below tol.
  direct,
};

/// sum_{p in L*} weight(p) |p|^{-s}, weight = 1 or (theta . p)^2.
LatticeSumResult weighted_sum(const Lattice& L, double s, const SumWeight& weight, double tol,
                              SumMethod method = SumMethod::accelerated);

/// Exponent triple of a monomial x^a y^b z^c.
using Multi = std::array<int, 3>;

/// All moment sums sum_{p in L*} p^beta |p|^{-sigma} with |beta| even and
/// |beta| <= max_order. Requires sigma - max_order > M.
std::map<Multi, LatticeSumResult> moment_sums(const Lattice& L, double sigma, int max_order,
                                              double tol);

/// Certified bound for sum_{|p|>R} f(|p|) with f(u) = u^{-q}, q > M.
double power_tail_bound(const Lattice& L, double R, double q);

/// mu_j = sum_{p in L*} p_j^2 |p|^{-(N+alpha+4)}, j = 1..M. Rectangular lattices only.
std::vector<double> mu_coefficients(const Lattice& L, const FracParams& params, double tol = 1e-12);

/// The interaction kernel F(z) = sum_{p in L*} |p + z|^{-s} on |z| <= z_max
/// (z_max < c0). Near points |p| <= R_near are summed exactly in +-p pairs,
/// so F(-z) == F(z) bit for bit; the remainder is an even Taylor polynomial
/// whose coefficients are far-field moment sums.
class InteractionKernel {
 public:
  InteractionKernel(const Lattice& L, double s, double z_max, double tol);

  [[nodiscard]] double operator()(const Vec3& z) const;
  /// Contribution of a single lattice point: |p + z|^{-s}.
  [[nodiscard]] double single(const Vec3& p, const Vec3& z) const;

  [[nodiscard]] double exponent() const { return s_; }
  [[nodiscard]] double z_max() const { return z_max_; }
  [[nodiscard]] double near_radius() const { return r_near_; }
  [[nodiscard]] int degree() const { return degree_; }
  /// Certified truncation bound. Bottoms out near 1e-12 (the rounding floor of
  /// the far-field moment sums) however small tol is.
  [[nodiscard]] double error_bound() const { return error_bound_; }
  [[nodiscard]] std::size_t near_pairs() const { return half_.size(); }

 private:
  struct Term {
    Multi e;
    double c;
  };
  double s_;
  double z_max_;
  double r_near_ = 0.0;
  int degree_ = 0;
  double error_bound_ = 0.0;
  std::vector<Vec3> half_;  // one representative of each +-p pair
  std::vector<Term> poly_;
};

}  // namespace cnmc
