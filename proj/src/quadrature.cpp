#include "cnmc/quadrature.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <map>
#include <mutex>
#include <tuple>

#include "cnmc/error.hpp"
#include "cnmc/specfun.hpp"

namespace cnmc {

namespace {

QuadRule golub_welsch(const Eigen::VectorXd& diag, const Eigen::VectorXd& offdiag, double mu0) {
  const auto n = diag.size();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(diag, offdiag, Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success) throw ConvergenceError("Golub-Welsch eigen-decomposition failed");
  QuadRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    rule.nodes[i] = solver.eigenvalues()(i);
    const double v0 = solver.eigenvectors()(0, i);
    rule.weights[i] = mu0 * v0 * v0;
  }
  return rule;
}

}  // namespace

QuadRule gauss_jacobi(int n, double a, double b) {
  if (n < 1) throw ValidationError("quadrature rule needs n >= 1");
  if (!(a > -1.0 && b > -1.0)) throw ValidationError("Jacobi exponents must exceed -1");
  Eigen::VectorXd diag(n);
  Eigen::VectorXd off(n > 1 ? n - 1 : 0);
  const double ab = a + b;
  for (int k = 0; k < n; ++k) {
    const double s = 2.0 * k + ab;
    if (k == 0) {
      diag(k) = (b - a) / (ab + 2.0);
    } else {
      diag(k) = (b * b - a * a) / (s * (s + 2.0));
    }
  }
  for (int k = 1; k < n; ++k) {
    const double s = 2.0 * k + ab;
    double beta;
    if (k == 1) {
      beta = 4.0 * (1.0 + a) * (1.0 + b) / ((2.0 + ab) * (2.0 + ab) * (3.0 + ab));
    } else {
      beta = 4.0 * k * (k + a) * (k + b) * (k + ab) / (s * s * (s + 1.0) * (s - 1.0));
    }
    off(k - 1) = std::sqrt(beta);
  }
  const double mu0 = std::exp((ab + 1.0) * std::log(2.0) + log_gamma(a + 1.0) + log_gamma(b + 1.0) -
                              log_gamma(ab + 2.0));
  return golub_welsch(diag, off, mu0);
}

QuadRule gauss_legendre(int n) {
  static std::mutex mutex;
  static std::map<int, QuadRule> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  QuadRule rule = gauss_jacobi(n, 0.0, 0.0);
  // symmetrise: the Legendre rule is exactly antisymmetric in its nodes
  for (int i = 0; i < n / 2; ++i) {
    const int j = n - 1 - i;
    const double x = 0.5 * (rule.nodes[j] - rule.nodes[i]);
    const double w = 0.5 * (rule.weights[i] + rule.weights[j]);
    rule.nodes[i] = -x;
    rule.nodes[j] = x;
    rule.weights[i] = rule.weights[j] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  cache.emplace(n, rule);
  return rule;
}

QuadRule gauss_legendre_on(int n, double lo, double hi) {
  QuadRule rule = gauss_legendre(n);
  const double half = 0.5 * (hi - lo);
  const double mid = 0.5 * (hi + lo);
  for (std::size_t i = 0; i < rule.size(); ++i) {
    rule.nodes[i] = mid + half * rule.nodes[i];
    rule.weights[i] *= half;
  }
  return rule;
}

std::shared_ptr<const QuadRule> endpoint_singular_rule(int n, double s, double L) {
  if (!(s < 1.0)) throw ValidationError("endpoint singularity u^{-s} must have s < 1");
  static std::mutex mutex;
  static std::map<std::tuple<int, double, double>, std::shared_ptr<const QuadRule>> cache;
  std::lock_guard<std::mutex> lock(mutex);
  const auto key = std::make_tuple(n, s, L);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  // u = L (1+x)/2,  u^{-s} du = (L/2)^{1-s} (1+x)^{-s} dx
  QuadRule base = gauss_jacobi(n, 0.0, -s);
  const double scale = std::pow(0.5 * L, 1.0 - s);
  for (std::size_t i = 0; i < base.size(); ++i) {
    base.nodes[i] = 0.5 * L * (1.0 + base.nodes[i]);
    base.weights[i] *= scale;
  }
  auto rule = std::make_shared<const QuadRule>(std::move(base));
  cache.emplace(key, rule);
  return rule;
}

}  // namespace cnmc
