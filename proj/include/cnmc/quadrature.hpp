#pragma once

#include <memory>
#include <vector>

namespace cnmc {

/// Nodes and weights of a one-dimensional quadrature rule.
struct QuadRule {
  std::vector<double> nodes;
  std::vector<double> weights;

  [[nodiscard]] std::size_t size() const { return nodes.size(); }
};

/// n-point Gauss-Legendre rule on [-1, 1].
QuadRule gauss_legendre(int n);

/// n-point Gauss-Jacobi rule on [-1, 1] for the weight (1-x)^a (1+x)^b,
/// a, b > -1 (Golub-Welsch on the Jacobi matrix).
QuadRule gauss_jacobi(int n, double a, double b);

/// Rule for  int_0^L u^{-s} f(u) du  with the u^{-s} factor folded into the
/// weights: sum_i w_i f(u_i). Requires s < 1. Rules are cached; the returned
/// pointer stays valid for the life of the process.
std::shared_ptr<const QuadRule> endpoint_singular_rule(int n, double s, double L);

/// Gauss-Legendre rule mapped to [lo, hi] (cached by n, mapped on each call).
QuadRule gauss_legendre_on(int n, double lo, double hi);

}  // namespace cnmc
