// Acceptance suite: one PASS/FAIL line per criterion.
//   cnmc_acceptance            run all criteria
//   cnmc_acceptance 3 9        run selected criteria
// Exit status is nonzero when any selected criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "cnmc/error.hpp"
#include "cnmc/expansion.hpp"
#include "cnmc/lattice.hpp"
#include "cnmc/linop.hpp"
#include "cnmc/nmc.hpp"
#include "cnmc/solver.hpp"
#include "cnmc/specfun.hpp"
#include "cnmc/sphere.hpp"

using namespace cnmc;

namespace {

constexpr double kPi = std::numbers::pi;

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

Vec3 random_unit(std::mt19937_64& rng, int N) {
  std::normal_distribution<double> g;
  Vec3 v = Vec3::Zero();
  for (int i = 0; i < N; ++i) v[i] = g(rng);
  return v.normalized();
}

Lattice square() { return make_lattice({{1, 0}, {0, 1}}, 2); }
Lattice line() { return make_lattice({{1}}, 2); }

// Z^2 branch shared by criteria 8, 9, 11, 12.
struct Branch {
  FracParams params = make_params(2, 0.5);
  Lattice L;
  SphereGrid grid;
  ExpansionData data;
  BranchTrace trace;
};

const Branch& square_branch() {
  static const Branch b = [] {
    Branch out;
    out.L = square();
    out.grid = build_grid(out.params, default_resolution(2));
    out.data = kappa_constants(out.params, out.L, 1e-10);
    out.trace = trace_branch(out.params, {80, 40, 20}, out.grid, out.L, 8, out.data);
    return out;
  }();
  return b;
}

const BranchPoint* point_at(const Branch& b, double r) {
  for (const auto& p : b.trace.points)
    if (p.r == r) return &p;
  return nullptr;
}

// 1. PV quadrature of L_alpha on random degree-k harmonics against lambda_k.
Verdict eigenvalue_oracle() {
  std::mt19937_64 rng(20240601);
  std::normal_distribution<double> g;
  double worst = 0.0;
  std::string where;
  for (int N : {2, 3}) {
    for (double alpha : {0.25, 0.5, 0.75}) {
      const FracParams p = make_params(N, alpha);
      for (int k = 0; k <= 5; ++k) {
        Shape y = Shape::zero(N, k, false);
        const auto idx = y.indices();
        double nrm = 0.0;
        for (std::size_t i = 0; i < idx.size(); ++i)
          if (idx[i].k == k) {
            y.coeffs[i] = g(rng);
            nrm += y.coeffs[i] * y.coeffs[i];
          }
        for (auto& c : y.coeffs) c /= std::sqrt(nrm);
        const ShapeField f(y);
        const double lk = lambda_k(p, k);
        for (int t = 0; t < 8; ++t) {
          const Vec3 th = random_unit(rng, N);
          const double err = std::abs(l_alpha_pv(p, y, th, 1e-9) - lk * f.value(th)) / (1.0 + lk);
          if (err > worst) {
            worst = err;
            where = fmt("N=%d alpha=%.2f k=%d", N, alpha, k);
          }
        }
      }
    }
  }
  return {worst <= 1e-6, fmt("max |L Y - lambda_k Y| / (1+lambda_k) = %.2e at %s (tol 1e-6)", worst, where.c_str())};
}

// 2. alpha -> 1 limit of 2 d lambda_k.
Verdict classical_limit() {
  double worst = 0.0;
  for (int N : {2, 3}) {
    const FracParams p = make_params(N, 0.999, 0.9995);
    for (int k = 1; k <= 4; ++k) {
      const double cl = k * (k + N - 2.0) / (N - 1.0);
      worst = std::max(worst, std::abs(2.0 * d_coeff(p) * lambda_k(p, k) - cl) / cl);
    }
  }
  return {worst <= 0.01, fmt("max relative deviation %.2e (tol 1e-2)", worst)};
}

// 3. h(0) = lambda_1 on the grid.
Verdict sphere_constant() {
  double err[2] = {0.0, 0.0};
  for (int N : {2, 3}) {
    const FracParams p = make_params(N, 0.5);
    const SphereGrid grid = build_grid(p, default_resolution(N));
    const HResult h = h_nmc(p, Shape::zero(N, 0), grid, N == 2 ? 1e-10 : 1e-7);
    for (double v : h.values) err[N - 2] = std::max(err[N - 2], std::abs(v - lambda_k(p, 1)));
  }
  return {err[0] <= 1e-6 && err[1] <= 1e-4,
          fmt("N=2 (res 128): %.2e (tol 1e-6); N=3 (res 32): %.2e (tol 1e-4)", err[0], err[1])};
}

// 4. h(c) = (1+c)^{-alpha} lambda_1 for constant shapes.
Verdict dilation() {
  const FracParams p = make_params(2, 0.5);
  const SphereGrid grid = build_grid(p, 32);
  double worst = 0.0;
  for (double c : {-0.3, 0.3}) {
    Shape s = Shape::zero(2, 0);
    s.set(0, 0, c * std::sqrt(sphere_area(2)));
    const HResult h = h_nmc(p, s, grid, 1e-10);
    for (double v : h.values) worst = std::max(worst, std::abs(v - std::pow(1.0 + c, -p.alpha) * lambda_k(p, 1)));
  }
  return {worst <= 1e-6, fmt("max error %.2e (tol 1e-6)", worst)};
}

// 5. Central differences of h at 0 along each even harmonic, Richardson over eps = 1e-2, 5e-3.
Verdict linearization() {
  const FracParams p = make_params(2, 0.5);
  const double l1 = lambda_k(p, 1);
  std::vector<Vec3> targets;
  for (int i = 0; i < 12; ++i) targets.push_back(circle_point(2.0 * kPi * (i + 0.37) / 12));
  const auto idx = basis_indices(2, 6, true);
  double worst = 0.0;
  std::string where;
  for (const auto& h : idx) {
    auto diff = [&](double eps) {
      Shape sp = Shape::zero(2, 6), sm = Shape::zero(2, 6);
      sp.set(h.k, h.m, eps);
      sm.set(h.k, h.m, -eps);
      const auto a = h_nmc_at(p, sp, targets, 1e-13).values;
      const auto b = h_nmc_at(p, sm, targets, 1e-13).values;
      std::vector<double> d(a.size());
      for (std::size_t i = 0; i < a.size(); ++i) d[i] = (a[i] - b[i]) / (2.0 * eps);
      return d;
    };
    const auto d1 = diff(1e-2), d2 = diff(5e-3);
    const double mult = p.alpha * (lambda_k(p, h.k) - l1);
    for (std::size_t i = 0; i < targets.size(); ++i) {
      const double rich = (4.0 * d2[i] - d1[i]) / 3.0;
      const double err = std::abs(rich - mult * harmonic_eval(2, h.k, h.m, targets[i]));
      if (err > worst) {
        worst = err;
        where = fmt("(k=%d, m=%d)", h.k, h.m);
      }
    }
  }
  return {worst <= 1e-4, fmt("max error %.2e at %s over degrees 0..6 (tol 1e-4)", worst, where.c_str())};
}

// 6. Phi0 against G(0, 0) and Phi2 against a Richardson second tau-difference of G(., 0).
Verdict phi_oracle() {
  const FracParams p = make_params(2, 0.5);
  const SphereGrid grid = build_grid(p, 64);
  double worst0 = 0.0, worst2 = 0.0;
  for (const Lattice& L : {line(), square()}) {
    const PhiProfiles phi = phi_profiles(p, L, 1e-13);
    const Shape zero = Shape::zero(2, 0);
    const GResult g0 = g_total(p, 0.0, zero, grid, L, 1e-13);
    for (double v : g0.values) worst0 = std::max(worst0, std::abs(v - phi.Phi0) / std::abs(phi.Phi0));
    auto second = [&](double t) {
      const auto gp = g_total(p, t, zero, grid, L, 1e-13).values;
      const auto gm = g_total(p, -t, zero, grid, L, 1e-13).values;
      std::vector<double> d(gp.size());
      for (std::size_t i = 0; i < d.size(); ++i) d[i] = (gp[i] - 2.0 * g0.values[i] + gm[i]) / (t * t);
      return d;
    };
    const auto s1 = second(0.05), s2 = second(0.025);
    for (std::size_t j = 0; j < 8; ++j) {
      const std::size_t i = j * grid.size() / 8 + 3;
      const double rich = (4.0 * s2[i] - s1[i]) / 3.0;
      const double ref = phi.Phi2(grid.nodes[i]);
      worst2 = std::max(worst2, std::abs(rich - ref) / std::abs(ref));
    }
  }
  return {worst0 <= 1e-8 && worst2 <= 1e-4,
          fmt("Phi0 rel err %.2e (tol 1e-8); Phi2 rel err %.2e at 8 nodes (tol 1e-4); Z^1 and Z^2", worst0, worst2)};
}

// 7. Z^1 sums against 2 zeta(s); partial sums at R and 2R inside the certified tail bound.
Verdict lattice_sums() {
  double zeta_err = 0.0;
  for (double s : {2.5, 4.5, 6.5}) {
    const double v = weighted_sum(line(), s, UnitWeight{}, 1e-13).value;
    const double z = 2.0 * std::riemann_zeta(s);
    zeta_err = std::max(zeta_err, std::abs(v - z) / z);
  }
  const std::vector<std::pair<std::vector<std::vector<double>>, int>> lattices = {
      {{{1}}, 2},
      {{{1, 0}, {0, 1}}, 2},
      {{{1, 0}, {0.5, std::sqrt(3.0) / 2}}, 2},
      {{{1, 0}, {0.3, 1.7}}, 2},
      {{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}, 3},
  };
  bool doubling = true;
  double worst_use = 0.0;
  for (const auto& [basis, N] : lattices) {
    const Lattice L = make_lattice(basis, N);
    const double s = L.M + 1.5;
    const double exact = weighted_sum(L, s, UnitWeight{}, 1e-13).value;
    for (double R : {4.0 * L.c0, 8.0 * L.c0}) {
      auto partial = [&](double rad) {
        double acc = 0.0;
        for (const auto& q : enumerate_shell(L, rad)) {
          const double n = q.norm();
          if (n > 0.0) acc += std::pow(n, -s);
        }
        return acc;
      };
      const double sR = partial(R), s2R = partial(2.0 * R);
      const double bound = power_tail_bound(L, R, s);
      const double missing = exact - sR;
      doubling = doubling && missing >= -1e-12 && missing <= bound && s2R - sR <= bound;
      worst_use = std::max(worst_use, missing / bound);
    }
  }
  return {zeta_err <= 1e-8 && doubling,
          fmt("zeta rel err %.2e (tol 1e-8); doubling test on 5 lattices %s (largest missing/bound %.2f)", zeta_err,
              doubling ? "ok" : "violated", worst_use)};
}

// 8. Z^2 branch at r = 80, 40, 20.
Verdict branch_solve() {
  const Branch& b = square_branch();
  if (b.trace.failed_r) return {false, fmt("branch failed at r=%g: %s", *b.trace.failed_r, b.trace.message.c_str())};
  bool ok = b.trace.points.size() == 3;
  double worst_res = 0.0, prev_sup = 0.0;
  int worst_it = 0;
  bool mono = true, negative_mean = true;
  for (const auto& pt : b.trace.points) {
    worst_res = std::max(worst_res, pt.residual_sup);
    worst_it = std::max(worst_it, pt.newton_iters);
    const double sup = dense_sup(pt.shape, b.grid);
    mono = mono && sup > prev_sup;  // r descends, so sup|phi| must grow
    prev_sup = sup;
    negative_mean = negative_mean && pt.shape.get(0, 0) < 0.0;
  }
  ok = ok && worst_res <= 1e-9 && worst_it <= 8 && mono && negative_mean;
  return {ok, fmt("max residual %.2e (tol 1e-9), max iterations %d (cap 8), sup|phi| decreasing in r: %s, mean < 0: %s",
                  worst_res, worst_it, mono ? "yes" : "no", negative_mean ? "yes" : "no")};
}

// 9. e0 decays like r^{-2}; e2 decreases in r.
Verdict expansion() {
  const Branch& b = square_branch();
  if (b.trace.points.size() != 3) return {false, "branch incomplete"};
  const auto rows = verify_expansion(b.trace.points, b.data, b.grid);
  std::map<double, ExpansionRow> by_r;
  for (const auto& r : rows) by_r[r.r] = r;
  const double q1 = by_r[80].e0 / by_r[40].e0, q2 = by_r[40].e0 / by_r[20].e0;
  const bool band = q1 >= 0.17 && q1 <= 0.33 && q2 >= 0.17 && q2 <= 0.33;
  const bool e2_dec = by_r[80].e2 < by_r[40].e2 && by_r[40].e2 < by_r[20].e2;
  return {band && e2_dec,
          fmt("e0(80)/e0(40) = %.4f, e0(40)/e0(20) = %.4f (band [0.17, 0.33]); e2 = %.2f, %.2f, %.2f at r = 80, 40, 20 "
              "(decreasing: %s); e0 less its quadratic constant-mode term: ratios %.4f, %.4f",
              q1, q2, by_r[80].e2, by_r[40].e2, by_r[20].e2, e2_dec ? "yes" : "no", *by_r[80].e0_corrected_ratio,
              *by_r[40].e0_corrected_ratio)};
}

// 10. Z^1 at r = 40: degree-2 content and the predicted anisotropy.
Verdict nonconstancy() {
  const FracParams p = make_params(2, 0.5);
  const Lattice L = line();
  const SphereGrid grid = build_grid(p, default_resolution(2));
  const ExpansionData d = kappa_constants(p, L, 1e-10);
  SolverOptions opts;
  const BranchTrace tr = trace_branch(p, {80, 40}, grid, L, 8, d, opts);
  if (tr.failed_r) return {false, fmt("solve failed at r=%g: %s", *tr.failed_r, tr.message.c_str())};
  const BranchPoint& pt = tr.points.back();
  const double c2 = std::hypot(pt.shape.get(2, 0), pt.shape.get(2, 1));
  const ShapeField f(pt.shape);
  const double s = p.N + p.alpha;
  const double ratio = (f.value(Vec3::UnitX()) - f.value(Vec3::UnitY())) / (std::pow(40.0, -s - 2.0) * d.kappa1 * d.mu->at(0));
  const bool ok = c2 > 10.0 * opts.tol && ratio >= 0.8 && ratio <= 1.2;
  return {ok, fmt("|c_2| = %.2e (> %.0e); anisotropy ratio %.4f (band [0.8, 1.2])", c2, 10.0 * opts.tol, ratio)};
}

// 11. Z^2: degree-2 coefficient between r = 40 and r = 80.
Verdict square_uniformity() {
  const Branch& b = square_branch();
  const BranchPoint* p40 = point_at(b, 40);
  const BranchPoint* p80 = point_at(b, 80);
  if (!p40 || !p80) return {false, "branch incomplete"};
  auto c2 = [](const BranchPoint& pt) { return std::hypot(pt.shape.get(2, 0), pt.shape.get(2, 1)); };
  const double bound = std::pow(2.0, -(2 + 0.5 + 2)) * 1.3;
  const double ratio = c2(*p80) / c2(*p40);
  // Rounding floor of the solved coefficients: below it the degree-2 content
  // cannot be told apart from an exact zero.
  const double floor80 = 1e3 * std::numeric_limits<double>::epsilon() * std::abs(p80->shape.get(0, 0));
  const double floor40 = 1e3 * std::numeric_limits<double>::epsilon() * std::abs(p40->shape.get(0, 0));
  const bool at_floor = c2(*p80) <= floor80 && c2(*p40) <= floor40;
  const bool ok = ratio < bound || at_floor;
  return {ok, fmt("|c_2|(80) = %.2e, |c_2|(40) = %.2e, ratio %.3g (bound %.4f)%s", c2(*p80), c2(*p40), ratio, bound,
                  at_floor ? "; both at the rounding floor (identically zero under the 90-degree symmetry)" : "")};
}

// 12. One negative eigenvalue on the branch; diagonal spectrum at (0, 0).
Verdict morse_index() {
  const Branch& b = square_branch();
  std::string detail;
  bool ok = true;
  for (double r : {40.0, 80.0}) {
    const BranchPoint* pt = point_at(b, r);
    if (!pt) return {false, "branch incomplete"};
    const Spectrum sp = linearization_spectrum(b.params, 1.0 / r, pt->shape, b.grid, b.L, 1e-4, 1e-11);
    ok = ok && sp.negative == 1;
    detail += fmt("r=%g: %d negative (lowest %.4f); ", r, sp.negative, sp.eigenvalues.front());
  }
  const Spectrum s0 = linearization_spectrum(b.params, 0.0, Shape::zero(2, 8), b.grid, b.L, 1e-4, 1e-11);
  std::vector<double> diag = dh0_diagonal(b.params, 8);
  std::sort(diag.begin(), diag.end());
  double err = 0.0;
  for (std::size_t i = 0; i < diag.size(); ++i) err = std::max(err, std::abs(s0.eigenvalues[i] - diag[i]));
  ok = ok && err <= 1e-4;
  detail += fmt("spectrum at (0, 0) vs alpha(lambda_k - lambda_1): %.2e (tol 1e-4)", err);
  return {ok, detail};
}

// 13. tau -> -tau symmetry, parity preservation, rotation equivariance.
Verdict symmetry() {
  const FracParams p = make_params(2, 0.5);
  const Lattice L = square();
  const SphereGrid grid = build_grid(p, 64);
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g;
  const double qtol = 1e-11;

  Shape even = Shape::zero(2, 6);
  for (auto& c : even.coeffs) c = 0.02 * g(rng);
  const auto hp = script_h(p, 0.05, even, grid, L, qtol).H;
  const auto hm = script_h(p, -0.05, even, grid, L, qtol).H;
  double tau_err = 0.0;
  for (std::size_t i = 0; i < hp.size(); ++i) tau_err = std::max(tau_err, std::abs(hp[i] - hm[i]));

  const double odd = analyze(grid, hp, 6).odd_residual;

  double rot_err = 0.0;
  for (int trial = 0; trial < 3; ++trial) {
    Shape s = Shape::zero(2, 6, false);
    for (auto& c : s.coeffs) c = 0.03 * g(rng);
    const double a = 2.0 * kPi * std::uniform_real_distribution<double>()(rng);
    Eigen::Matrix3d R = Eigen::Matrix3d::Identity();
    R.topLeftCorner<2, 2>() << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
    std::vector<Vec3> th, rth;
    for (int i = 0; i < 8; ++i) {
      th.push_back(random_unit(rng, 2));
      rth.push_back(R * th.back());
    }
    const auto h1 = h_nmc_at(p, s, th, qtol).values;
    const auto h2 = h_nmc_at(p, rotate(s, R), rth, qtol).values;
    for (std::size_t i = 0; i < h1.size(); ++i) rot_err = std::max(rot_err, std::abs(h1[i] - h2[i]));
  }
  const bool ok = tau_err <= 1e-14 && odd <= qtol && rot_err <= 2.0 * qtol;
  return {ok, fmt("|H(tau) - H(-tau)| = %.1e (tol 1e-14); odd residual %.1e (tol %.0e); rotation %.1e (tol %.0e)",
                  tau_err, odd, qtol, rot_err, 2.0 * qtol)};
}

struct Criterion {
  int id;
  const char* name;
  std::function<Verdict()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all = {
      {1, "eigenvalue oracle", eigenvalue_oracle},
      {2, "classical limit", classical_limit},
      {3, "sphere NMC constant", sphere_constant},
      {4, "dilation law", dilation},
      {5, "linearization oracle", linearization},
      {6, "Phi oracle", phi_oracle},
      {7, "lattice-sum oracle", lattice_sums},
      {8, "branch solve", branch_solve},
      {9, "expansion verification", expansion},
      {10, "non-constancy", nonconstancy},
      {11, "square-lattice uniformity", square_uniformity},
      {12, "Morse index", morse_index},
      {13, "evenness and symmetry", symmetry},
  };
  std::vector<int> pick;
  for (int i = 1; i < argc; ++i) pick.push_back(std::atoi(argv[i]));
  int failed = 0;
  for (const auto& c : all) {
    if (!pick.empty() && std::find(pick.begin(), pick.end(), c.id) == pick.end()) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("[%s] %2d %s: %s [%.1f s]\n", v.pass ? "PASS" : "FAIL", c.id, c.name, v.detail.c_str(), sec);
    std::fflush(stdout);
    if (!v.pass) ++failed;
  }
  return failed == 0 ? 0 : 1;
}
