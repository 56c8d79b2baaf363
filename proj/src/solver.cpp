#include "cnmc/solver.hpp"

#include <algorithm>
#include <cmath>

#include "cnmc/error.hpp"
#include "cnmc/linop.hpp"
#include "cnmc/nmc.hpp"

namespace cnmc {

namespace {

struct Residual {
  double sup = 0.0;
  Analysis analysis;
  double kbar_min = 1.0;
};

Residual residual(const FracParams& params, double tau, const Shape& x, const SphereGrid& grid, const Lattice& L,
                  double quad_tol, double lambda1) {
  const ScriptHResult H = script_h(params, tau, x, grid, L, quad_tol);
  std::vector<double> r(H.H.size());
  Residual out;
  for (std::size_t i = 0; i < r.size(); ++i) {
    r[i] = H.H[i] - lambda1;
    out.sup = std::max(out.sup, std::abs(r[i]));
  }
  out.analysis = analyze(grid, r, x.K);
  out.kbar_min = H.kbar_min;
  return out;
}

double l2(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace

BranchPoint newton_solve(const FracParams& params, double tau, const Shape& initial, const SphereGrid& grid,
                         const Lattice& L, const SolverOptions& opts) {
  params.validate();
  check_tau(L, tau);
  if (!initial.even_only) throw ValidationError("newton_solve works on even shapes");
  if (!(opts.tol > 0.0) || opts.max_iters < 0) throw ValidationError("invalid solver options");
  const double lambda1 = lambda_k(params, 1);
  const std::vector<double> diag = dh0_diagonal(params, initial.K);

  BranchPoint bp;
  bp.tau = tau;
  bp.r = tau == 0.0 ? INFINITY : 1.0 / std::abs(tau);
  Shape x = initial;
  bool full = false;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu;
  double prev_sup = INFINITY;
  for (int it = 0;; ++it) {
    const Residual res = residual(params, tau, x, grid, L, opts.quad_tol, lambda1);
    bp.residual_sup = res.sup;
    bp.residual_coeff = l2(res.analysis.shape.coeffs);
    bp.odd_residual = res.analysis.odd_residual;
    bp.kbar_min = res.kbar_min;
    bp.newton_iters = it;
    if (res.sup <= opts.tol) break;
    if (it >= opts.max_iters) throw ConvergenceError("Newton iteration did not converge");
    if (!full && it > 0 && res.sup > 0.5 * prev_sup) {
      full = true;
      lu.compute(fd_jacobian(params, tau, x, grid, L, opts.fd_step, opts.quad_tol));
    }
    prev_sup = res.sup;
    const auto& rc = res.analysis.shape.coeffs;
    if (full) {
      const Eigen::VectorXd step = lu.solve(Eigen::Map<const Eigen::VectorXd>(rc.data(), static_cast<Eigen::Index>(rc.size())));
      for (std::size_t i = 0; i < rc.size(); ++i) x.coeffs[i] -= step[static_cast<Eigen::Index>(i)];
    } else {
      for (std::size_t i = 0; i < rc.size(); ++i) x.coeffs[i] -= rc[i] / diag[i];
    }
    check_admissible(x, grid);
  }
  bp.shape = x;
  bp.full_jacobian = full;
  if (opts.spectrum) {
    const Spectrum sp = linearization_spectrum(params, tau, x, grid, L, opts.fd_step, opts.quad_tol);
    bp.negative_eigenvalues = sp.negative;
    bp.spectrum = sp.eigenvalues;
  }
  return bp;
}

BranchTrace trace_branch(const FracParams& params, const std::vector<double>& r_values, const SphereGrid& grid,
                         const Lattice& L, int K, const ExpansionData& data, const SolverOptions& opts) {
  if (r_values.empty()) throw ValidationError("trace_branch needs at least one r");
  for (std::size_t i = 0; i < r_values.size(); ++i) {
    if (!(r_values[i] > 0.0)) throw ValidationError("r values must be positive");
    check_tau(L, 1.0 / r_values[i]);
    if (i > 0 && !(r_values[i] < r_values[i - 1])) throw ValidationError("r values must be strictly descending");
  }
  BranchTrace trace;
  Shape start = predicted_shape(r_values.front(), data, K);
  for (double r : r_values) {
    try {
      BranchPoint bp = newton_solve(params, 1.0 / r, start, grid, L, opts);
      bp.r = r;
      start = bp.shape;
      trace.points.push_back(std::move(bp));
    } catch (const Error& e) {
      trace.failed_r = r;
      trace.message = e.what();
      break;
    }
  }
  return trace;
}

std::vector<ExpansionRow> verify_expansion(const std::vector<BranchPoint>& branch, const ExpansionData& data,
                                           const SphereGrid& grid) {
  const int N = data.params.N;
  const double s = N + data.params.alpha;
  const double area = sphere_area(N);
  const SphereGrid dense = build_grid(N, 4 * grid.resolution);
  std::vector<double> ftilde;
  for (const auto& t : dense.nodes) ftilde.push_back(data.kappa1 * data.phi.directional(t) - data.kappa2);

  std::vector<ExpansionRow> rows;
  for (const auto& bp : branch) {
    ExpansionRow row;
    row.r = bp.r;
    const double mean = bp.shape.get(0, 0) / std::sqrt(area);
    row.e0 = std::pow(bp.r, s) * mean + data.kappa0;
    const double a = data.params.alpha;
    const double q = data.phi.Phi0 / data.lambda1;
    row.e0_quadratic = (a + 1.0 + 2.0 * N) / (2.0 * a * a) * q * q * std::pow(bp.r, -s);
    row.e0_corrected = row.e0 - row.e0_quadratic;
    const ShapeField f(bp.shape);
    for (std::size_t i = 0; i < dense.size(); ++i) {
      const double v = std::pow(bp.r, s + 2.0) * (f.value(dense.nodes[i]) + data.kappa0 * std::pow(bp.r, -s));
      row.e2 = std::max(row.e2, std::abs(v - ftilde[i]));
    }
    double c2 = 0.0;
    const auto idx = bp.shape.indices();
    for (std::size_t i = 0; i < idx.size(); ++i)
      if (idx[i].k == 2) c2 += bp.shape.coeffs[i] * bp.shape.coeffs[i];
    row.c2_norm = std::sqrt(c2);
    rows.push_back(row);
  }
  for (auto& row : rows)
    for (const auto& other : rows)
      if (std::abs(other.r - 0.5 * row.r) < 1e-9 * row.r) {
        row.e0_ratio = row.e0 / other.e0;
        row.e2_ratio = row.e2 / other.e2;
        if (other.c2_norm > 0.0) row.c2_ratio = row.c2_norm / other.c2_norm;
        row.e0_corrected_ratio = row.e0_corrected / other.e0_corrected;
      }
  return rows;
}

}  // namespace cnmc
