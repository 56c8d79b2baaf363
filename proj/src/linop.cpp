#include "cnmc/linop.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "cnmc/error.hpp"
#include "cnmc/nmc.hpp"
#include "cnmc/parallel.hpp"
#include "cnmc/quadrature.hpp"

namespace cnmc {

namespace {

constexpr double kPi = std::numbers::pi;

double pv_2d(const ShapeField& f, const Vec3& theta, double alpha, int n) {
  const auto rule = endpoint_singular_rule(n, alpha, kPi);
  const double t0 = std::atan2(theta[1], theta[0]);
  double acc = 0.0;
  for (std::size_t j = 0; j < rule->size(); ++j) {
    const double t = rule->nodes[j];
    const double d = 2.0 * std::sin(0.5 * t);
    // 2 phi(t0) - phi(t0+t) - phi(t0-t), cancellation-free
    const double num = f.circle_increment(t0, t).delta + f.circle_increment(t0, -t).delta;
    acc += rule->weights[j] * num / (t * t) * std::pow(d / t, -2.0 - alpha);
  }
  return acc;
}

double pv_3d(const ShapeField& f, const Vec3& theta, double alpha, int n) {
  const auto rule = endpoint_singular_rule(n, alpha, kPi);
  const int nb = 2 * n;
  const Vec3 ref = std::abs(theta[2]) < 0.9 ? Vec3::UnitZ() : Vec3::UnitX();
  const Vec3 e1 = ref.cross(theta).normalized();
  const Vec3 e2 = theta.cross(e1);
  const double ft = f.value(theta);
  double acc = 0.0;
  for (std::size_t j = 0; j < rule->size(); ++j) {
    const double w = rule->nodes[j];
    const double d = 2.0 * std::sin(0.5 * w);
    double ring = 0.0;
    for (int b = 0; b < nb; ++b) {
      const double beta = kPi * b / nb;
      const Vec3 dir = std::cos(beta) * e1 + std::sin(beta) * e2;
      const Vec3 sp = std::cos(w) * theta + std::sin(w) * dir;
      const Vec3 sm = std::cos(w) * theta - std::sin(w) * dir;
      ring += (ft - f.value(sp)) + (ft - f.value(sm));
    }
    ring *= kPi / nb;
    // sin w d^{-3-alpha} = d^{-2-alpha} cos(w/2)
    acc += rule->weights[j] * ring / (w * w) * std::pow(d / w, -2.0 - alpha) * std::cos(0.5 * w);
  }
  return acc;
}

}  // namespace

double l_alpha_pv(const FracParams& params, const Shape& shape, const Vec3& theta, double tol) {
  params.validate();
  if (shape.N != params.N) throw ValidationError("shape dimension does not match N");
  if (!(tol > 0.0)) throw ValidationError("quadrature tolerance must be positive");
  const ShapeField f(shape);
  const double a = params.alpha;
  auto eval = [&](int n) { return params.N == 2 ? pv_2d(f, theta, a, n) : pv_3d(f, theta, a, n); };
  int n = params.N == 2 ? 16 : 8;
  const int n_max = params.N == 2 ? 1024 : 256;
  double prev = eval(n);
  while (true) {
    n *= 2;
    const double cur = eval(n);
    if (std::abs(cur - prev) < tol * std::max(1.0, std::abs(cur))) return cur;
    prev = cur;
    if (n >= n_max) throw ConvergenceError("L_alpha quadrature did not reach the requested tolerance");
  }
}

std::vector<double> dh0_diagonal(const FracParams& params, int K) {
  params.validate();
  const double l1 = lambda_k(params, 1);
  std::vector<double> d;
  for (const auto& h : basis_indices(params.N, K, true)) d.push_back(params.alpha * (lambda_k(params, h.k) - l1));
  return d;
}

Shape dh0_apply(const Shape& shape, const FracParams& params) {
  params.validate();
  const double l1 = lambda_k(params, 1);
  Shape out = shape;
  const auto idx = shape.indices();
  for (std::size_t i = 0; i < idx.size(); ++i) out.coeffs[i] *= params.alpha * (lambda_k(params, idx[i].k) - l1);
  return out;
}

Shape dh0_solve(const Shape& rhs, const FracParams& params, double odd_tol) {
  params.validate();
  const auto idx = rhs.indices();
  double odd2 = 0.0;
  for (std::size_t i = 0; i < idx.size(); ++i)
    if (idx[i].k % 2 != 0) odd2 += rhs.coeffs[i] * rhs.coeffs[i];
  if (std::sqrt(odd2) > odd_tol) throw ValidationError("dh0_solve: right-hand side has odd-degree content");
  const double l1 = lambda_k(params, 1);
  Shape out = Shape::zero(rhs.N, rhs.K - rhs.K % 2, true);
  const auto even = out.indices();
  for (std::size_t i = 0; i < even.size(); ++i)
    out.coeffs[i] = rhs.get(even[i].k, even[i].m) / (params.alpha * (lambda_k(params, even[i].k) - l1));
  return out;
}

Eigen::MatrixXd fd_jacobian(const FracParams& params, double tau, const Shape& shape, const SphereGrid& grid,
                            const Lattice& L, double fd_step, double tol) {
  if (!(fd_step > 0.0)) throw ValidationError("finite-difference step must be positive");
  if (!shape.even_only) throw ValidationError("the linearisation acts on even shapes");
  const auto n = static_cast<Eigen::Index>(shape.size());
  Eigen::MatrixXd J(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    Shape xp = shape, xm = shape;
    xp.coeffs[j] += fd_step;
    xm.coeffs[j] -= fd_step;
    const auto rp = analyze(grid, script_h(params, tau, xp, grid, L, tol).H, shape.K).shape.coeffs;
    const auto rm = analyze(grid, script_h(params, tau, xm, grid, L, tol).H, shape.K).shape.coeffs;
    for (Eigen::Index i = 0; i < n; ++i) J(i, j) = (rp[i] - rm[i]) / (2.0 * fd_step);
  }
  return J;
}

Spectrum linearization_spectrum(const FracParams& params, double tau, const Shape& shape,
                                const SphereGrid& grid, const Lattice& L, double fd_step, double tol) {
  if (fd_step < 1e-5 || fd_step > 1e-3) throw ValidationError("fd_step must lie in [1e-5, 1e-3]");
  Spectrum sp;
  sp.jacobian = fd_jacobian(params, tau, shape, grid, L, fd_step, tol);
  Eigen::EigenSolver<Eigen::MatrixXd> es(sp.jacobian, false);
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    sp.eigenvalues.push_back(es.eigenvalues()(i).real());
    sp.max_imag = std::max(sp.max_imag, std::abs(es.eigenvalues()(i).imag()));
  }
  std::sort(sp.eigenvalues.begin(), sp.eigenvalues.end());
  sp.negative = static_cast<int>(std::count_if(sp.eigenvalues.begin(), sp.eigenvalues.end(), [](double v) { return v < 0.0; }));
  return sp;
}

}  // namespace cnmc
