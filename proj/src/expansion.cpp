#include "cnmc/expansion.hpp"

#include <cmath>
#include <functional>

#include "cnmc/error.hpp"
#include "cnmc/linop.hpp"

namespace cnmc {

namespace {

// Exact projection of a low-degree function onto even harmonics <= K.
Shape project(int N, int K, const std::function<double(const Vec3&)>& f) {
  int res = N == 2 ? 2 * K + 4 : K + 4;
  res = std::max(8, res + res % 2);
  const SphereGrid g = build_grid(N, res);
  std::vector<double> v;
  v.reserve(g.size());
  for (const auto& t : g.nodes) v.push_back(f(t));
  return analyze(g, v, K).shape;
}

}  // namespace

double PhiProfiles::Phi2(const Vec3& theta) const { return a1 * sum_s2 - a2 * directional(theta); }

PhiProfiles phi_profiles(const FracParams& params, const Lattice& L, double tol) {
  params.validate();
  if (L.N != params.N) throw ValidationError("lattice dimension does not match N");
  const int N = params.N;
  const double a = params.alpha, s = N + a, S = sphere_area(N);
  PhiProfiles ph;
  ph.a1 = a * s * (N - a) * S / (N * (N + 2.0));
  ph.a2 = a * s * (s + 2.0) * S / N;
  const auto m0 = moment_sums(L, s, 0, tol);
  const auto m2 = moment_sums(L, s + 2.0, 0, tol);
  const auto m4 = moment_sums(L, s + 4.0, 2, tol);
  ph.sum_s = m0.at({0, 0, 0}).value;
  ph.sum_s2 = m2.at({0, 0, 0}).value;
  ph.tail = std::max(m0.at({0, 0, 0}).tail_bound, m2.at({0, 0, 0}).tail_bound);
  for (const auto& [e, r] : m4) {
    if (e[0] + e[1] + e[2] != 2) continue;
    int i = -1, j = -1;
    for (int c = 0; c < 3; ++c)
      for (int t = 0; t < e[c]; ++t) (i < 0 ? i : j) = c;
    ph.moment(i, j) = ph.moment(j, i) = r.value;
    ph.tail = std::max(ph.tail, r.tail_bound);
  }
  ph.Phi0 = -a * S / N * ph.sum_s;
  return ph;
}

ExpansionData kappa_constants(const FracParams& params, const Lattice& L, double tol) {
  ExpansionData d;
  d.params = params;
  d.phi = phi_profiles(params, L, tol);
  const int N = params.N;
  const double a = params.alpha, s = N + a, S = sphere_area(N);
  d.lambda1 = lambda_k(params, 1);
  d.lambda2 = lambda_k(params, 2);
  const double gap = d.lambda2 - d.lambda1;
  d.Psi0 = -d.phi.Phi0 / (a * d.lambda1);
  d.kappa0 = S / (N * d.lambda1) * d.phi.sum_s;
  d.kappa1 = S * s * (s + 2.0) / (2.0 * N * gap);
  d.kappa2 = 0.5 * S *
             (s * (s + 2.0) / (N * N * gap) + 2.0 * s * (N + 1.0) * (a + 2.0) / (N * N * (N + 2.0) * d.lambda1)) *
             d.phi.sum_s2;
  if (L.is_rectangular) {
    d.mu = mu_coefficients(L, params, tol);
    if (L.is_square) d.kappa_tilde1 = d.kappa1 / L.M * d.phi.sum_s2;
  }

  // consistency: Dh(0) Psi_j = Phi_j, diagonally, and the kappas against Psi2
  const int K = 2;
  const Shape phi2 = project(N, K, [&](const Vec3& t) { return d.phi.Phi2(t); });
  const Shape psi2 = dh0_solve(phi2, params);
  const Shape back = dh0_apply(psi2, params);
  double c = std::abs(d.Psi0 * (-a * d.lambda1) - d.phi.Phi0);
  for (std::size_t i = 0; i < back.size(); ++i) c = std::max(c, std::abs(back.coeffs[i] - phi2.coeffs[i]));
  // tau^{s+2} coefficient of phi is -Psi2/2 = kappa1 f~ - kappa2
  const Shape pred = project(N, K, [&](const Vec3& t) { return d.kappa1 * d.phi.directional(t) - d.kappa2; });
  for (std::size_t i = 0; i < pred.size(); ++i) c = std::max(c, std::abs(pred.coeffs[i] + 0.5 * psi2.coeffs[i]));
  d.consistency = c;
  if (!(d.kappa0 > 0.0 && d.kappa1 > 0.0 && d.kappa2 > 0.0)) throw Error("expansion constants lost their sign");
  return d;
}

Shape psi2_shape(const ExpansionData& data, int K) {
  const Shape phi2 = project(data.params.N, K, [&](const Vec3& t) { return data.phi.Phi2(t); });
  return dh0_solve(phi2, data.params);
}

double predicted_value(double r, const ExpansionData& data, const Vec3& theta) {
  const double s = data.params.N + data.params.alpha;
  return std::pow(r, -s) * (-data.kappa0 + (data.kappa1 * data.phi.directional(theta) - data.kappa2) / (r * r));
}

Shape predicted_shape(double r, const ExpansionData& data, int K) {
  if (!(r > 0.0)) throw ValidationError("r must be positive");
  if (K < 2 || K % 2 != 0) throw ValidationError("cutoff degree must be even and >= 2");
  return project(data.params.N, K, [&](const Vec3& t) { return predicted_value(r, data, t); });
}

NonconstancyCertificate nonconstancy_certificate(const Lattice& L, const FracParams& params, double tol) {
  const PhiProfiles ph = phi_profiles(params, L, tol);
  NonconstancyCertificate c;
  Vec3 e1 = Vec3::Zero(), eN = Vec3::Zero();
  e1[0] = 1.0;
  eN[params.N - 1] = 1.0;
  c.f_parallel = ph.directional(e1);
  c.f_perp = ph.directional(eN);
  c.nonconstant = L.M <= params.N - 1 && c.f_perp == 0.0 && c.f_parallel > 0.0;
  return c;
}

}  // namespace cnmc
