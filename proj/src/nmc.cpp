#include "cnmc/nmc.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <tuple>

#include "cnmc/error.hpp"
#include "cnmc/parallel.hpp"
#include "cnmc/quadrature.hpp"

namespace cnmc {

namespace {

constexpr double kPi = std::numbers::pi;

// Orthonormal tangent pair at theta (N=3).
void tangent_frame(const Vec3& theta, Vec3& e1, Vec3& e2) {
  const Vec3 ref = std::abs(theta[2]) < 0.9 ? Vec3::UnitZ() : Vec3::UnitX();
  e1 = ref.cross(theta).normalized();
  e2 = theta.cross(e1);
}

struct Integrand {
  double s;  // N + alpha
  int N;
  double kbar_min = 1.0;

  // psi^{N-2}(s) Kbar (Lambda2/d^2 - psi(t) Lambda1/d^2 + psi(t) psi(s)/2); the caller supplies d^{2-N-alpha} dV
  double operator()(double psi_t, double psi_s, double delta, double lambda1, double d) {
    const double d2 = d * d;
    const double q = delta * delta / d2;
    const double kb = std::pow(q + psi_s * psi_t, -0.5 * s);
    kbar_min = std::min(kbar_min, kb);
    const double pre = N == 3 ? psi_s * kb : kb;
    return pre * (q - psi_t * lambda1 / d2 + 0.5 * psi_t * psi_s);
  }
};

// One target, fixed order: N=2. sigma = theta rotated by +-v.
double h_point_2d(const ShapeField& phi, const Vec3& theta, double psi_t, double alpha, int n,
                  Integrand& I) {
  const auto rule = endpoint_singular_rule(n, alpha, kPi);
  const double t0 = std::atan2(theta[1], theta[0]);
  double total = 0.0;
  for (int side = -1; side <= 1; side += 2) {
    double acc = 0.0;
    for (std::size_t j = 0; j < rule->size(); ++j) {
      const double v = rule->nodes[j];
      const auto inc = phi.circle_increment(t0, side * v);
      const double d = 2.0 * std::sin(0.5 * v);
      acc += rule->weights[j] * std::pow(d / v, -alpha) * I(psi_t, 1.0 + inc.value, inc.delta, inc.lambda1, d);
    }
    total += acc;
  }
  return total;
}

// One target, fixed order: N=3, theta rotated to the pole.
double h_point_3d(const ShapeField& phi, const Vec3& theta, double psi_t, double alpha, int n,
                  Integrand& I) {
  const auto rule = endpoint_singular_rule(n, alpha, kPi);
  const int nb = 2 * n;
  Vec3 e1, e2;
  tangent_frame(theta, e1, e2);
  double total = 0.0;
  for (std::size_t j = 0; j < rule->size(); ++j) {
    const double w = rule->nodes[j];
    const double d = 2.0 * std::sin(0.5 * w);
    const double radial = std::pow(d / w, -alpha) * std::cos(0.5 * w);
    double ring = 0.0;
    for (int b = 0; b < nb; ++b) {
      const double beta = 2.0 * kPi * b / nb;
      const Vec3 sigma = std::cos(w) * theta + std::sin(w) * (std::cos(beta) * e1 + std::sin(beta) * e2);
      const FieldValue f = phi.eval(sigma);
      const double delta = psi_t - 1.0 - f.value;
      ring += I(psi_t, 1.0 + f.value, delta, delta - (theta - sigma).dot(f.grad), d);
    }
    total += rule->weights[j] * radial * ring * (2.0 * kPi / nb);
  }
  return total;
}

struct KernelKey {
  int N;
  std::vector<double> basis;
  double s, z_max, tol;
  bool operator<(const KernelKey& o) const {
    return std::tie(N, basis, s, z_max, tol) < std::tie(o.N, o.basis, o.s, o.z_max, o.tol);
  }
};

std::shared_ptr<const InteractionKernel> cached_kernel(const Lattice& L, double s, double z_max, double tol) {
  static std::mutex mu;
  static std::map<KernelKey, std::shared_ptr<const InteractionKernel>> cache;
  KernelKey key{L.N, std::vector<double>(L.basis_m.data(), L.basis_m.data() + L.basis_m.size()), s, z_max, tol};
  {
    std::lock_guard lock(mu);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
  }
  auto k = std::make_shared<const InteractionKernel>(L, s, z_max, tol);
  std::lock_guard lock(mu);
  if (cache.size() > 64) cache.clear();
  cache.emplace(key, k);
  return k;
}

void check_shape_dim(const FracParams& params, const Shape& shape) {
  params.validate();
  if (shape.N != params.N) throw ValidationError("shape dimension does not match N");
}

}  // namespace

double default_nmc_tol(int N) { return N == 2 ? 1e-8 : 1e-5; }

void check_tau(const Lattice& L, double tau) {
  if (!std::isfinite(tau) || !(std::abs(tau) < 0.25 * L.c0))
    throw ValidationError("|tau| must be below c0/4");
}

SurfaceFrame surface_frame(const ShapeField& phi, const Vec3& sigma) {
  const FieldValue f = phi.eval(sigma);
  const double psi = 1.0 + f.value;
  const int N = phi.shape().N;
  SurfaceFrame fr;
  fr.position = psi * sigma;
  fr.grad = f.grad;
  const double root = std::sqrt(psi * psi + f.grad.squaredNorm());
  fr.normal = (psi * sigma - f.grad) / root;
  fr.area_element = std::pow(psi, N - 2) * root;
  return fr;
}

KernelTriple kernel_triple(const FracParams& params, const ShapeField& phi, const Vec3& sigma,
                           const Vec3& theta) {
  const FieldValue fs = phi.eval(sigma);
  const double psi_s = 1.0 + fs.value;
  const double psi_t = 1.0 + phi.value(theta);
  const double delta = psi_t - psi_s;
  KernelTriple k;
  k.lambda1 = delta - (theta - sigma).dot(fs.grad);
  k.lambda2 = delta * delta;
  const double d2 = (theta - sigma).squaredNorm();
  k.kbar = std::pow(k.lambda2 / d2 + psi_s * psi_t, -0.5 * (params.N + params.alpha));
  return k;
}

HResult h_nmc_at(const FracParams& params, const Shape& shape, const std::vector<Vec3>& targets,
                 double tol, const SphereGrid* check_grid) {
  check_shape_dim(params, shape);
  if (!(tol > 0.0)) throw ValidationError("quadrature tolerance must be positive");
  if (check_grid) {
    check_admissible(shape, *check_grid);
  } else {
    check_admissible(shape, build_grid(params.N, params.N == 2 ? 64 : 16));
  }
  const ShapeField phi(shape);
  const double alpha = params.alpha;
  const int n0 = params.N == 2 ? 16 : 8;
  const int n_max = params.N == 2 ? 1024 : 256;

  HResult out;
  out.values.assign(targets.size(), 0.0);
  std::vector<double> err(targets.size(), 0.0), kmin(targets.size(), 1.0);
  std::vector<int> order(targets.size(), 0);
  parallel_for(targets.size(), [&](std::size_t i) {
    const Vec3& theta = targets[i];
    const double psi_t = 1.0 + phi.value(theta);
    Integrand I{params.N + alpha, params.N};
    auto eval = [&](int n) {
      return params.N == 2 ? h_point_2d(phi, theta, psi_t, alpha, n, I) : h_point_3d(phi, theta, psi_t, alpha, n, I);
    };
    int n = n0;
    double prev = eval(n);
    while (true) {
      n *= 2;
      const double cur = eval(n);
      const double diff = std::abs(cur - prev);
      prev = cur;
      if (diff < tol) {
        err[i] = diff;
        break;
      }
      if (n >= n_max) throw ConvergenceError("h quadrature did not reach the requested tolerance");
    }
    out.values[i] = prev;
    kmin[i] = I.kbar_min;
    order[i] = n;
  });
  for (std::size_t i = 0; i < targets.size(); ++i) {
    out.error_estimate = std::max(out.error_estimate, err[i]);
    out.kbar_min = std::min(out.kbar_min, kmin[i]);
    out.max_order = std::max(out.max_order, order[i]);
  }
  return out;
}

HResult h_nmc(const FracParams& params, const Shape& shape, const SphereGrid& grid, double tol) {
  return h_nmc_at(params, shape, grid.nodes, tol, &grid);
}

std::vector<double> g_single(const FracParams& params, double tau, const Shape& shape, const Vec3& p,
                             const SphereGrid& grid, int radial_order) {
  check_shape_dim(params, shape);
  if (p.norm() == 0.0) throw ValidationError("g_single needs a nonzero lattice point");
  if (!(std::abs(tau) < 0.25 * p.norm())) throw ValidationError("|tau| must be below c0/4");
  if (radial_order < 1) throw ValidationError("radial order must be positive");
  check_admissible(shape, grid);
  const auto psi = synthesize(shape, grid.nodes);
  const QuadRule rad = gauss_legendre_on(radial_order, 0.0, 1.0);
  const int N = params.N;
  const double s = N + params.alpha;
  std::vector<double> out(grid.size());
  parallel_for(grid.size(), [&](std::size_t i) {
    const Vec3 ti = (1.0 + psi[i]) * grid.nodes[i];
    double acc = 0.0;
    for (std::size_t j = 0; j < grid.size(); ++j) {
      const double pj = 1.0 + psi[j];
      const Vec3 sj = pj * grid.nodes[j];
      double inner = 0.0;
      for (std::size_t r = 0; r < rad.size(); ++r) {
        const double rho = rad.nodes[r];
        const Vec3 z = tau * (rho * sj - ti);
        inner += rad.weights[r] * std::pow(rho, N - 1) * std::pow((z + p).squaredNorm(), -0.5 * s);
      }
      acc += grid.weights[j] * std::pow(pj, N) * inner;
    }
    out[i] = -params.alpha * acc;
  });
  return out;
}

GResult g_total(const FracParams& params, double tau, const Shape& shape, const SphereGrid& grid,
                const Lattice& L, double tol, int radial_order) {
  check_shape_dim(params, shape);
  if (L.N != params.N) throw ValidationError("lattice dimension does not match N");
  check_tau(L, tau);
  if (!(tol > 0.0)) throw ValidationError("lattice tolerance must be positive");
  const double sup = check_admissible(shape, grid);
  const double s = params.N + params.alpha;
  // |z| <= |tau| (psi(sigma) + psi(theta)); round the bound up so kernels are reused
  const double z_max = 2.0 * std::abs(tau) * (1.0 + std::ceil(16.0 * sup) / 16.0);
  const auto F = cached_kernel(L, s, z_max, 0.1 * tol);

  const auto psi = synthesize(shape, grid.nodes);
  const QuadRule rad = gauss_legendre_on(radial_order, 0.0, 1.0);
  const int N = params.N;
  std::vector<double> rw(rad.size());
  for (std::size_t r = 0; r < rad.size(); ++r) rw[r] = rad.weights[r] * std::pow(rad.nodes[r], N - 1);

  GResult out;
  out.values.assign(grid.size(), 0.0);
  out.kernel_error = F->error_bound();
  out.near_radius = F->near_radius();
  parallel_for(grid.size(), [&](std::size_t i) {
    const Vec3 ti = (1.0 + psi[i]) * grid.nodes[i];
    double acc = 0.0;
    for (std::size_t j = 0; j < grid.size(); ++j) {
      const double pj = 1.0 + psi[j];
      const Vec3 sj = pj * grid.nodes[j];
      double inner = 0.0;
      for (std::size_t r = 0; r < rad.size(); ++r) inner += rw[r] * (*F)(tau * (rad.nodes[r] * sj - ti));
      acc += grid.weights[j] * std::pow(pj, N) * inner;
    }
    out.values[i] = -params.alpha * acc;
  });
  return out;
}

ScriptHResult script_h(const FracParams& params, double tau, const Shape& shape, const SphereGrid& grid,
                       const Lattice& L, double tol) {
  check_tau(L, tau);
  ScriptHResult out;
  const HResult h = h_nmc(params, shape, grid, tol);
  out.h = h.values;
  out.h_error = h.error_estimate;
  out.kbar_min = h.kbar_min;
  const double scale = std::pow(std::abs(tau), params.N + params.alpha);
  const double tol_g = scale > 0.0 ? std::min(1e-6, tol / scale) : 1e-6;
  out.G = g_total(params, tau, shape, grid, L, tol_g).values;
  out.H.resize(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) out.H[i] = out.h[i] + scale * out.G[i];
  return out;
}

}  // namespace cnmc
