#include "cnmc/lattice.hpp"

#include <algorithm>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <numbers>
#include <sstream>

#include "cnmc/error.hpp"
#include "cnmc/quadrature.hpp"

namespace cnmc {

namespace {

constexpr double kPi = std::numbers::pi;

// Integer coordinates k in the box |k_i| <= K, i < M, visited in lexicographic order.
template <class F>
void for_each_box_point(int M, long K, F&& f) {
  std::array<long, 3> k{0, 0, 0};
  for (int i = 0; i < M; ++i) k[i] = -K;
  while (true) {
    f(k);
    int i = M - 1;
    while (i >= 0 && k[i] == K) {
      k[i] = -K;
      --i;
    }
    if (i < 0) break;
    ++k[i];
  }
}

Vec3 combine(const Lattice& L, const std::array<long, 3>& k) {
  Vec3 p = Vec3::Zero();
  for (int i = 0; i < L.M; ++i) p += static_cast<double>(k[i]) * L.basis[i];
  return p;
}

double min_nonzero_norm(const Eigen::MatrixXd& rows) {
  const auto M = static_cast<int>(rows.rows());
  const Eigen::MatrixXd gram = rows * rows.transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
  const double lmin = es.eigenvalues()(0);
  double shortest = rows.row(0).norm();
  for (int i = 1; i < M; ++i) shortest = std::min(shortest, rows.row(i).norm());
  const long K = static_cast<long>(std::ceil(shortest / std::sqrt(lmin))) + 1;
  double best = shortest;
  for_each_box_point(M, K, [&](const std::array<long, 3>& k) {
    Eigen::VectorXd p = Eigen::VectorXd::Zero(M);
    bool zero = true;
    for (int i = 0; i < M; ++i) {
      if (k[i] != 0) zero = false;
      p += static_cast<double>(k[i]) * rows.row(i).transpose();
    }
    if (!zero) best = std::min(best, p.norm());
  });
  return best;
}

// Monomial p^e.
double monomial(const Vec3& p, const Multi& e) {
  double v = 1.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < e[i]; ++j) v *= p[i];
  return v;
}

// Integral of x^e over the unit sphere S^{M-1} of the lattice plane (first M coordinates).
double sphere_monomial_average(int M, const Multi& e) {
  int total = 0;
  for (int i = 0; i < 3; ++i) {
    if (i >= M && e[i] != 0) return 0.0;
    if (e[i] % 2 != 0) return 0.0;
    total += e[i];
  }
  double num = 2.0;
  for (int i = 0; i < M; ++i) num *= gamma_fn(0.5 * (e[i] + 1));
  return num / gamma_fn(0.5 * (total + M));
}

std::vector<Multi> multi_indices(int N, int order) {
  std::vector<Multi> out;
  for (int a = 0; a <= order; ++a)
    for (int b = 0; b <= order - a; ++b) {
      const int c = order - a - b;
      if (N < 3 && c != 0) continue;
      if (N < 2 && b != 0) continue;
      out.push_back({a, b, c});
    }
  return out;
}

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

// Certified bound: sum_{|p|>R} f(|p|) <= (|S^{M-1}|/covol) int_{R-2rho}^inf (u+rho)^{M-1} f(u) du
// for decreasing f; evaluated here for f(u) = u^{-q} Qreg(nu, u^2/w^2) (w = 0: pure power).
double decreasing_tail_bound(const Lattice& L, double R, double q, double nu, double w) {
  const double rho = L.cell_radius;
  const double a = R - 2.0 * rho;
  if (a <= 0.0) return std::numeric_limits<double>::infinity();
  const double pref = sphere_area(L.M) / L.covolume;
  if (w <= 0.0) {
    double total = 0.0;
    for (int j = 0; j <= L.M - 1; ++j) {
      const double binom = factorial(L.M - 1) / (factorial(j) * factorial(L.M - 1 - j));
      total += binom * std::pow(rho, L.M - 1 - j) * std::pow(a, j + 1 - q) / (q - j - 1);
    }
    return pref * total;
  }
  // Gaussian-damped integrand: integrate over [a, a + 12 w] on panels; beyond that the
  // integrand is below e^{-144} relative.
  double total = 0.0;
  const int panels = 24;
  const double span = 12.0 * w;
  for (int i = 0; i < panels; ++i) {
    const auto rule = gauss_legendre_on(16, a + span * i / panels, a + span * (i + 1) / panels);
    for (std::size_t k = 0; k < rule.size(); ++k) {
      const double u = rule.nodes[k];
      total += rule.weights[k] * std::pow(u + rho, L.M - 1) * std::pow(u, -q) *
               boost::math::gamma_q(nu, u * u / (w * w));
    }
  }
  return pref * total;
}

struct SplitSetup {
  double w;       // Gaussian width
  double nu;      // sigma / 2
};

SplitSetup split_setup(const Lattice& L, double sigma) {
  // exp(-pi^2 w^2 d0^2) = exp(-36) for the dropped dual-lattice terms
  return {6.0 / (kPi * L.dual_min_norm), 0.5 * sigma};
}

// Magnitude estimate of the dropped reciprocal-space terms for a weight of degree m.
double fourier_estimate(const Lattice& L, double sigma, int m, const SplitSetup& sp) {
  const double w = sp.w;
  double total = 0.0;
  // dual shells d0 .. 4 d0 dominate; count them on the dual lattice
  Eigen::MatrixXd dual = L.basis_m.inverse().transpose();
  const double d0 = L.dual_min_norm;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dual * dual.transpose());
  const long K = static_cast<long>(std::ceil(4.0 * d0 / std::sqrt(es.eigenvalues()(0)))) + 1;
  for_each_box_point(L.M, K, [&](const std::array<long, 3>& k) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(L.M);
    bool zero = true;
    for (int i = 0; i < L.M; ++i) {
      if (k[i] != 0) zero = false;
      v += static_cast<double>(k[i]) * dual.row(i).transpose();
    }
    if (zero) return;
    const double kn = v.norm();
    if (kn > 4.0 * d0) return;
    total += std::pow(w, -sigma) * std::pow(kPi * w * w, 0.5 * L.M) *
             std::exp(-kPi * kPi * w * w * kn * kn) *
             std::pow(1.0 + 2.0 * kPi * kn * w * w + w * w, m) / gamma_fn(0.5 * sigma);
  });
  return total / L.covolume;
}

// Accelerated evaluation of sum_{p in L*} g(p) |p|^{-sigma} for a family of homogeneous
// monomial weights of common degree handled by the caller through `accumulate`.
template <class Accumulate>
double accelerated_near(const Lattice& L, double sigma, int max_degree, double tol,
                        const SplitSetup& sp, Accumulate&& accumulate, long& terms) {
  double R = 4.0 * sp.w + 2.0 * L.cell_radius;
  double bound = 0.0;
  for (int iter = 0; iter < 40; ++iter) {
    bound = decreasing_tail_bound(L, R, sigma - max_degree, sp.nu, sp.w);
    if (bound <= 0.5 * tol) break;
    R += sp.w;
  }
  const auto pts = enumerate_shell(L, R);
  terms = static_cast<long>(pts.size());
  for (const auto& p : pts) {
    const double r2 = p.squaredNorm();
    const double base = std::pow(r2, -0.5 * sigma) * boost::math::gamma_q(sp.nu, r2 / (sp.w * sp.w));
    accumulate(p, base);
  }
  return R;
}

double continuum_term(const Lattice& L, double sigma, int degree, double sphere_avg,
                      const SplitSetup& sp) {
  const int M = L.M;
  double v = sphere_avg / L.covolume * std::pow(sp.w, M + degree - sigma) *
             gamma_fn(0.5 * (M + degree)) / ((sigma - degree - M) * gamma_fn(0.5 * sigma));
  // the smooth part is finite at p = 0, which the lattice sum excludes
  if (degree == 0) v -= std::pow(sp.w, -sigma) / gamma_fn(0.5 * sigma + 1.0);
  return v;
}

void check_convergent(const Lattice& L, double s_eff) {
  if (!(s_eff > L.M)) {
    std::ostringstream os;
    os << "lattice sum does not converge: effective exponent " << s_eff << " <= M=" << L.M;
    throw ValidationError(os.str());
  }
}

}  // namespace

Lattice make_lattice(const std::vector<std::vector<double>>& basis, int N) {
  if (N < 2 || N > 3) throw ValidationError("lattice ambient dimension must be 2 or 3");
  const int M = static_cast<int>(basis.size());
  if (M < 1 || M > N) throw ValidationError("lattice needs 1 <= M <= N basis vectors");
  Lattice L;
  L.N = N;
  L.M = M;
  L.basis_m.resize(M, M);
  for (int i = 0; i < M; ++i) {
    if (static_cast<int>(basis[i].size()) != M)
      throw ValidationError("lattice basis vectors must have dimension M");
    Vec3 v = Vec3::Zero();
    for (int j = 0; j < M; ++j) {
      if (!std::isfinite(basis[i][j])) throw ValidationError("lattice basis contains non-finite entries");
      L.basis_m(i, j) = basis[i][j];
      v[j] = basis[i][j];
    }
    L.basis.push_back(v);
  }
  const Eigen::MatrixXd gram = L.basis_m * L.basis_m.transpose();
  double norm_prod = 1.0;
  for (int i = 0; i < M; ++i) norm_prod *= gram(i, i);
  const double det = gram.determinant();
  if (!(det > 1e-12 * norm_prod)) throw ValidationError("degenerate lattice basis");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
  L.gram_min_eig = es.eigenvalues()(0);
  L.covolume = std::sqrt(det);
  L.cell_radius = 0.0;
  for (int i = 0; i < M; ++i) L.cell_radius += 0.5 * std::sqrt(gram(i, i));
  L.c0 = min_nonzero_norm(L.basis_m);
  L.dual_min_norm = min_nonzero_norm(L.basis_m.inverse().transpose());

  bool rect = true;
  bool equal = true;
  for (int i = 0; i < M; ++i)
    for (int j = 0; j < M; ++j) {
      if (i == j) continue;
      if (std::abs(gram(i, j)) > 1e-12 * std::sqrt(gram(i, i) * gram(j, j))) rect = false;
      if (std::abs(gram(i, i) - gram(j, j)) > 1e-12 * std::max(gram(i, i), gram(j, j))) equal = false;
    }
  L.is_rectangular = rect;
  L.is_square = rect && equal;
  return L;
}

std::vector<Vec3> enumerate_shell(const Lattice& L, double R) {
  if (!(R > 0.0)) throw ValidationError("shell radius must be positive");
  const long K = static_cast<long>(std::floor(R / std::sqrt(L.gram_min_eig))) + 1;
  const double R2 = R * R * (1.0 + 1e-12);
  struct Item {
    double r2;
    std::array<long, 3> k;
    Vec3 p;
  };
  std::vector<Item> items;
  for_each_box_point(L.M, K, [&](const std::array<long, 3>& k) {
    if (k[0] == 0 && k[1] == 0 && k[2] == 0) return;
    const Vec3 p = combine(L, k);
    const double r2 = p.squaredNorm();
    if (r2 <= R2) items.push_back({r2, k, p});
  });
  std::sort(items.begin(), items.end(), [](const Item& a, const Item& b) {
    if (a.r2 != b.r2) return a.r2 < b.r2;
    return a.k < b.k;
  });
  std::vector<Vec3> out;
  out.reserve(items.size());
  for (const auto& it : items) out.push_back(it.p);
  return out;
}

double power_tail_bound(const Lattice& L, double R, double q) {
  check_convergent(L, q);
  return decreasing_tail_bound(L, R, q, 0.0, 0.0);
}

LatticeSumResult weighted_sum(const Lattice& L, double s, const SumWeight& weight, double tol,
                              SumMethod method) {
  if (!(tol > 0.0)) throw ValidationError("lattice-sum tolerance must be positive");
  const bool directional = std::holds_alternative<DirectionalWeight>(weight);
  Vec3 theta = Vec3::Zero();
  if (directional) {
    theta = std::get<DirectionalWeight>(weight).theta;
    if (std::abs(theta.norm() - 1.0) > 1e-10) throw ValidationError("direction must be a unit vector");
  }
  const int degree = directional ? 2 : 0;
  check_convergent(L, s - degree);
  auto g = [&](const Vec3& p) {
    if (!directional) return 1.0;
    const double t = theta.dot(p);
    return t * t;
  };
  // sup of g(x)/|x|^degree on the unit sphere of the lattice plane
  Vec3 theta_par = Vec3::Zero();
  for (int i = 0; i < L.M; ++i) theta_par[i] = theta[i];
  const double sup_weight = directional ? theta_par.squaredNorm() : 1.0;

  LatticeSumResult res;
  if (method == SumMethod::direct) {
    double R = 8.0 * L.c0;
    for (int iter = 0;; ++iter) {
      res.tail_bound = sup_weight * power_tail_bound(L, R, s - degree);
      if (res.tail_bound <= tol) break;
      if (iter > 60 || std::pow(R / L.c0, L.M) > 4e7)
        throw ConvergenceError("direct lattice sum cannot reach the requested tolerance");
      R *= 2.0;
    }
    const auto pts = enumerate_shell(L, R);
    double acc = 0.0;
    // sum from the outside in: smallest terms first
    for (auto it = pts.rbegin(); it != pts.rend(); ++it) acc += g(*it) * std::pow(it->norm(), -s);
    res.value = acc;
    res.truncation_radius = R;
    res.terms_used = static_cast<long>(pts.size());
    return res;
  }

  const auto sp = split_setup(L, s);
  double near = 0.0;
  long terms = 0;
  std::vector<double> contributions;
  const double R = accelerated_near(L, s, degree, tol, sp,
                                    [&](const Vec3& p, double base) { contributions.push_back(g(p) * base); },
                                    terms);
  for (auto it = contributions.rbegin(); it != contributions.rend(); ++it) near += *it;
  double avg = sphere_area(L.M);
  if (directional) avg *= theta_par.squaredNorm() / L.M;
  res.value = near + continuum_term(L, s, degree, avg, sp);
  res.truncation_radius = R;
  res.terms_used = terms;
  res.tail_bound = sup_weight * decreasing_tail_bound(L, R, s - degree, sp.nu, sp.w) +
                   fourier_estimate(L, s, degree, sp);
  return res;
}

std::map<Multi, LatticeSumResult> moment_sums(const Lattice& L, double sigma, int max_order,
                                              double tol) {
  check_convergent(L, sigma - max_order);
  std::vector<Multi> idx;
  for (int m = 0; m <= max_order; m += 2)
    for (const auto& e : multi_indices(L.N, m)) idx.push_back(e);
  std::vector<double> acc(idx.size(), 0.0);
  const auto sp = split_setup(L, sigma);
  long terms = 0;
  std::vector<std::pair<Vec3, double>> stored;
  const double R = accelerated_near(L, sigma, max_order, tol, sp,
                                    [&](const Vec3& p, double base) { stored.emplace_back(p, base); },
                                    terms);
  for (auto it = stored.rbegin(); it != stored.rend(); ++it)
    for (std::size_t i = 0; i < idx.size(); ++i) acc[i] += monomial(it->first, idx[i]) * it->second;
  std::map<Multi, LatticeSumResult> out;
  for (std::size_t i = 0; i < idx.size(); ++i) {
    const int deg = idx[i][0] + idx[i][1] + idx[i][2];
    LatticeSumResult r;
    r.value = acc[i] + continuum_term(L, sigma, deg, sphere_monomial_average(L.M, idx[i]), sp);
    r.truncation_radius = R;
    r.terms_used = terms;
    r.tail_bound = decreasing_tail_bound(L, R, sigma - deg, sp.nu, sp.w) + fourier_estimate(L, sigma, deg, sp);
    out.emplace(idx[i], r);
  }
  return out;
}

std::vector<double> mu_coefficients(const Lattice& L, const FracParams& params, double tol) {
  params.validate();
  if (!L.is_rectangular) throw ValidationError("mu coefficients require a rectangular lattice");
  const auto moments = moment_sums(L, L.N + params.alpha + 4.0, 2, tol);
  std::vector<double> mu;
  for (int j = 0; j < L.M; ++j) {
    // coordinate along a_j: (d . p)^2 = sum_ab d_a d_b p_a p_b
    const Vec3 d = L.basis[j].normalized();
    double v = 0.0;
    for (const auto& [e, res] : moments) {
      if (e[0] + e[1] + e[2] != 2) continue;
      const bool mixed = e[0] != 2 && e[1] != 2 && e[2] != 2;
      double c = mixed ? 2.0 : 1.0;
      for (int a = 0; a < 3; ++a)
        for (int t = 0; t < e[a]; ++t) c *= d[a];
      v += c * res.value;
    }
    mu.push_back(v);
  }
  return mu;
}

InteractionKernel::InteractionKernel(const Lattice& L, double s, double z_max, double tol)
    : s_(s), z_max_(z_max) {
  if (!(z_max >= 0.0 && z_max < L.c0))
    throw ValidationError("interaction kernel needs |z| bounded below the minimal lattice norm");
  check_convergent(L, s);
  const double lambda = 0.5 * s;
  const int D = 8;
  degree_ = D;

  // Tail of the Gegenbauer series, |C_n^lambda(t)| <= C_n^lambda(1) = (2 lambda)_n / n!.
  auto series_tail = [&](double q) {
    double total = 0.0;
    double c = 1.0;  // C_n^lambda(1)
    for (int n = 1; n <= 400; ++n) {
      c *= (2.0 * lambda + n - 1) / n;
      if (n > D && n % 2 == 0) {
        const double term = c * std::pow(q, n);
        total += term;
        if (term < 1e-18 * total) break;
      }
    }
    return total;
  };

  const auto zeroth = moment_sums(L, s, 0, 1e-3 * tol);
  const double total_sum = zeroth.at({0, 0, 0}).value;

  // smallest near radius whose truncation error meets tol
  double R = std::max(L.c0, 2.0 * z_max);
  for (int iter = 0;; ++iter) {
    const double q = z_max / R;
    if (q < 1.0 && total_sum * series_tail(q) <= 0.5 * tol) break;
    if (iter > 200) throw ConvergenceError("interaction kernel: near radius did not converge");
    R *= 1.25;
  }
  r_near_ = R;
  const auto near = enumerate_shell(L, R);
  for (const auto& p : near) {
    // canonical representative: first nonzero coordinate positive
    for (int i = 0; i < 3; ++i) {
      if (p[i] > 0.0) {
        half_.push_back(p);
        break;
      }
      if (p[i] < 0.0) break;
    }
  }

  // Far-field Taylor polynomial.
  std::map<Multi, double> coeffs;
  double moment_err = 0.0;
  for (int q = 0; q <= D; ++q) {
    const double sigma = s + 2.0 * q;
    const auto moments = moment_sums(L, sigma, q, 1e-3 * tol);
    for (int j = 0; j <= q; ++j) {
      const int n = q + j;
      const int m = q - j;
      if (n > D || n % 2 != 0 || m < 0) continue;
      // (-1)^j (lambda)_{n-j} / (j! m!) 2^m
      double coef = (j % 2 == 0 ? 1.0 : -1.0) * std::pow(2.0, m) / (factorial(j) * factorial(m));
      for (int t = 0; t < n - j; ++t) coef *= lambda + t;
      for (const auto& beta : multi_indices(L.N, m)) {
        const auto& full = moments.at(beta);
        double near_part = 0.0;
        for (auto it = near.rbegin(); it != near.rend(); ++it)
          near_part += monomial(*it, beta) * std::pow(it->squaredNorm(), -0.5 * sigma);
        const double far = full.value - near_part;
        if (far == 0.0) continue;
        const double multinom = factorial(m) / (factorial(beta[0]) * factorial(beta[1]) * factorial(beta[2]));
        moment_err += std::abs(coef) * multinom * full.tail_bound * std::pow(z_max, n);
        // times |z|^{2j} = (x^2+y^2+z^2)^j, expanded multinomially
        for (int a = 0; a <= j; ++a)
          for (int b = 0; b <= j - a; ++b) {
            const int c = j - a - b;
            if (L.N < 3 && c != 0) continue;
            const double mj = factorial(j) / (factorial(a) * factorial(b) * factorial(c));
            Multi e{beta[0] + 2 * a, beta[1] + 2 * b, beta[2] + 2 * c};
            coeffs[e] += coef * multinom * far * mj;
          }
      }
    }
  }
  for (const auto& [e, c] : coeffs)
    if (c != 0.0) poly_.push_back({e, c});
  const double far_sum = total_sum - [&] {
    double acc = 0.0;
    for (auto it = near.rbegin(); it != near.rend(); ++it) acc += std::pow(it->squaredNorm(), -0.5 * s);
    return acc;
  }();
  error_bound_ = std::max(far_sum, 0.0) * series_tail(z_max / R) + moment_err;
}

double InteractionKernel::single(const Vec3& p, const Vec3& z) const {
  return std::pow((p + z).squaredNorm(), -0.5 * s_);
}

double InteractionKernel::operator()(const Vec3& z) const {
  double near = 0.0;
  const double e = -0.5 * s_;
  for (auto it = half_.rbegin(); it != half_.rend(); ++it) {
    // pair sums are commutative in floating point, so F(-z) == F(z) exactly
    near += std::pow((*it + z).squaredNorm(), e) + std::pow((*it - z).squaredNorm(), e);
  }
  std::array<std::array<double, 16>, 3> pw{};
  for (int i = 0; i < 3; ++i) {
    pw[i][0] = 1.0;
    for (int k = 1; k <= degree_ + 2 && k < 16; ++k) pw[i][k] = pw[i][k - 1] * z[i];
  }
  double far = 0.0;
  for (auto it = poly_.rbegin(); it != poly_.rend(); ++it)
    far += it->c * pw[0][it->e[0]] * pw[1][it->e[1]] * pw[2][it->e[2]];
  return near + far;
}

}  // namespace cnmc
