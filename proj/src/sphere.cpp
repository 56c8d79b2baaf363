#include "cnmc/sphere.hpp"

#include <cmath>
#include <numbers>

#include "cnmc/error.hpp"
#include "cnmc/quadrature.hpp"

namespace cnmc {

namespace {

constexpr double kPi = std::numbers::pi;

// Forward-mode dual number carrying the Cartesian gradient.
struct Dual {
  double v = 0.0;
  Vec3 g = Vec3::Zero();
};
inline Dual operator+(const Dual& a, const Dual& b) { return {a.v + b.v, a.g + b.g}; }
inline Dual operator-(const Dual& a, const Dual& b) { return {a.v - b.v, a.g - b.g}; }
inline Dual operator*(const Dual& a, const Dual& b) { return {a.v * b.v, a.v * b.g + b.v * a.g}; }
inline Dual operator*(double s, const Dual& a) { return {s * a.v, s * a.g}; }

// Regular solid harmonics C_l^m = r^l P_l^m(cos) cos(m phi), S_l^m = r^l P_l^m(cos) sin(m phi),
// no Condon-Shortley phase; stored at [l*(l+1)/2 + m].
template <class T>
void solid_harmonics(int K, const T& x, const T& y, const T& z, const T& r2, std::vector<T>& C,
                     std::vector<T>& S) {
  const auto at = [](int l, int m) { return static_cast<std::size_t>(l * (l + 1) / 2 + m); };
  const std::size_t n = at(K, K) + 1;
  C.assign(n, T{});
  S.assign(n, T{});
  T one{};
  if constexpr (std::is_same_v<T, double>) one = 1.0; else one.v = 1.0;
  C[at(0, 0)] = one;
  for (int m = 1; m <= K; ++m) {
    const T& c = C[at(m - 1, m - 1)];
    const T& s = S[at(m - 1, m - 1)];
    C[at(m, m)] = (2.0 * m - 1.0) * (x * c - y * s);
    S[at(m, m)] = (2.0 * m - 1.0) * (y * c + x * s);
  }
  for (int m = 0; m <= K; ++m) {
    for (int l = m + 1; l <= K; ++l) {
      const double a = (2.0 * l - 1.0) / (l - m);
      const double b = (l + m - 1.0) / (l - m);
      T c = a * (z * C[at(l - 1, m)]);
      T s = a * (z * S[at(l - 1, m)]);
      if (l - 2 >= m) {
        c = c - b * (r2 * C[at(l - 2, m)]);
        s = s - b * (r2 * S[at(l - 2, m)]);
      }
      C[at(l, m)] = c;
      S[at(l, m)] = s;
    }
  }
}

double factorial_ratio(int l, int m) {  // (l-m)!/(l+m)!
  double r = 1.0;
  for (int i = l - m + 1; i <= l + m; ++i) r /= i;
  return r;
}

double norm3(int l, int m) {
  const int am = std::abs(m);
  const double base = (2.0 * l + 1.0) / (4.0 * kPi);
  if (am == 0) return std::sqrt(base);
  return std::sqrt(2.0 * base * factorial_ratio(l, am));
}

void check_index(int N, int k, int m) {
  if (N < 2 || N > 3) throw ValidationError("harmonics are implemented for N = 2, 3");
  if (k < 0) throw ValidationError("harmonic degree must be non-negative");
  if (N == 2) {
    if (m < 0 || m > 1 || (k == 0 && m != 0)) throw ValidationError("invalid harmonic index for N=2");
  } else if (std::abs(m) > k) {
    throw ValidationError("invalid harmonic index for N=3");
  }
}

}  // namespace

int harmonic_dim(int N, int k) {
  if (N == 2) return k == 0 ? 1 : 2;
  return 2 * k + 1;
}

std::vector<HarmonicIndex> basis_indices(int N, int K, bool even_only) {
  if (N < 2 || N > 3) throw ValidationError("harmonics are implemented for N = 2, 3");
  if (K < 0) throw ValidationError("cutoff degree must be non-negative");
  std::vector<HarmonicIndex> out;
  for (int k = 0; k <= K; ++k) {
    if (even_only && k % 2 != 0) continue;
    if (N == 2) {
      out.push_back({k, 0});
      if (k > 0) out.push_back({k, 1});
    } else {
      for (int m = -k; m <= k; ++m) out.push_back({k, m});
    }
  }
  return out;
}

Shape Shape::zero(int N, int K, bool even_only) {
  if (even_only && K % 2 != 0) throw ValidationError("even shapes need an even cutoff degree");
  Shape s;
  s.N = N;
  s.K = K;
  s.even_only = even_only;
  s.coeffs.assign(basis_indices(N, K, even_only).size(), 0.0);
  return s;
}

long Shape::position(int k, int m) const {
  const auto idx = indices();
  for (std::size_t i = 0; i < idx.size(); ++i)
    if (idx[i].k == k && idx[i].m == m) return static_cast<long>(i);
  return -1;
}

double Shape::get(int k, int m) const {
  const long p = position(k, m);
  return p < 0 ? 0.0 : coeffs[p];
}

void Shape::set(int k, int m, double c) {
  check_index(N, k, m);
  const long p = position(k, m);
  if (p < 0) throw ValidationError("harmonic index not representable in this shape");
  coeffs[p] = c;
}

Shape Shape::with_cutoff(int K2) const {
  Shape out = zero(N, K2, even_only);
  const auto idx = indices();
  for (std::size_t i = 0; i < idx.size(); ++i)
    if (idx[i].k <= K2) out.set(idx[i].k, idx[i].m, coeffs[i]);
  return out;
}

Shape Shape::as_general() const {
  Shape out = zero(N, K, false);
  const auto idx = indices();
  for (std::size_t i = 0; i < idx.size(); ++i) out.set(idx[i].k, idx[i].m, coeffs[i]);
  return out;
}

double harmonic_eval(int N, int k, int m, const Vec3& theta) {
  check_index(N, k, m);
  if (N == 2) {
    const double t = std::atan2(theta[1], theta[0]);
    if (k == 0) return 1.0 / std::sqrt(2.0 * kPi);
    return (m == 0 ? std::cos(k * t) : std::sin(k * t)) / std::sqrt(kPi);
  }
  std::vector<double> C, S;
  solid_harmonics<double>(k, theta[0], theta[1], theta[2], 1.0, C, S);
  const std::size_t at = static_cast<std::size_t>(k * (k + 1) / 2 + std::abs(m));
  return norm3(k, m) * (m < 0 ? S[at] : C[at]);
}

HarmonicBasis::HarmonicBasis(int N, int K, bool even_only)
    : N_(N), K_(K), even_only_(even_only), idx_(basis_indices(N, K, even_only)) {
  for (const auto& h : idx_) norm_.push_back(N == 2 ? (h.k == 0 ? 1.0 / std::sqrt(2.0 * kPi) : 1.0 / std::sqrt(kPi))
                                                    : norm3(h.k, h.m));
}

void HarmonicBasis::values(const Vec3& theta, double* out) const {
  if (N_ == 2) {
    // z^k = (x + i y)^k
    double re = 1.0, im = 0.0;
    int k = 0;
    std::size_t i = 0;
    while (i < idx_.size()) {
      const auto& h = idx_[i];
      while (k < h.k) {
        const double nr = re * theta[0] - im * theta[1];
        im = re * theta[1] + im * theta[0];
        re = nr;
        ++k;
      }
      out[i] = norm_[i] * (h.m == 0 ? re : im);
      ++i;
    }
    return;
  }
  std::vector<double> C, S;
  solid_harmonics<double>(K_, theta[0], theta[1], theta[2], 1.0, C, S);
  for (std::size_t i = 0; i < idx_.size(); ++i) {
    const auto& h = idx_[i];
    const std::size_t at = static_cast<std::size_t>(h.k * (h.k + 1) / 2 + std::abs(h.m));
    out[i] = norm_[i] * (h.m < 0 ? S[at] : C[at]);
  }
}

void HarmonicBasis::values_and_gradients(const Vec3& theta, double* out, Vec3* grad) const {
  if (N_ == 2) {
    values(theta, out);
    const Vec3 tangent(-theta[1], theta[0], 0.0);
    double re = 1.0, im = 0.0;
    int k = 0;
    for (std::size_t i = 0; i < idx_.size(); ++i) {
      const auto& h = idx_[i];
      while (k < h.k) {
        const double nr = re * theta[0] - im * theta[1];
        im = re * theta[1] + im * theta[0];
        re = nr;
        ++k;
      }
      // d/dt cos kt = -k sin kt, d/dt sin kt = k cos kt
      const double dt = h.m == 0 ? -h.k * im : h.k * re;
      grad[i] = norm_[i] * dt * tangent;
    }
    return;
  }
  Dual x{theta[0], Vec3::UnitX()}, y{theta[1], Vec3::UnitY()}, z{theta[2], Vec3::UnitZ()};
  const Dual r2 = x * x + y * y + z * z;
  std::vector<Dual> C, S;
  solid_harmonics<Dual>(K_, x, y, z, r2, C, S);
  for (std::size_t i = 0; i < idx_.size(); ++i) {
    const auto& h = idx_[i];
    const std::size_t at = static_cast<std::size_t>(h.k * (h.k + 1) / 2 + std::abs(h.m));
    const Dual& d = h.m < 0 ? S[at] : C[at];
    out[i] = norm_[i] * d.v;
    // homogeneous of degree k: tangential part of the ambient gradient
    grad[i] = norm_[i] * (d.g - h.k * d.v * theta);
  }
}

ShapeField::ShapeField(const Shape& shape) : shape_(shape), basis_(shape.N, shape.K, shape.even_only) {
  for (double c : shape.coeffs)
    if (c != 0.0) zero_ = false;
  if (shape.N == 2) {
    ca_.assign(shape.K + 1, 0.0);
    sa_.assign(shape.K + 1, 0.0);
    const auto idx = shape.indices();
    for (std::size_t i = 0; i < idx.size(); ++i) {
      const double nrm = idx[i].k == 0 ? 1.0 / std::sqrt(2.0 * kPi) : 1.0 / std::sqrt(kPi);
      (idx[i].m == 0 ? ca_ : sa_)[idx[i].k] = nrm * shape.coeffs[i];
    }
  }
}

double ShapeField::value(const Vec3& theta) const {
  if (zero_) return 0.0;
  if (shape_.N == 2) {
    double re = 1.0, im = 0.0, v = ca_[0];
    const int step = shape_.even_only ? 2 : 1;
    // w = z^step
    double wr = theta[0], wi = theta[1];
    if (step == 2) {
      wr = theta[0] * theta[0] - theta[1] * theta[1];
      wi = 2.0 * theta[0] * theta[1];
    }
    for (int k = step; k <= shape_.K; k += step) {
      const double nr = re * wr - im * wi;
      im = re * wi + im * wr;
      re = nr;
      v += ca_[k] * re + sa_[k] * im;
    }
    return v;
  }
  std::vector<double> vals(basis_.size());
  basis_.values(theta, vals.data());
  double v = 0.0;
  for (std::size_t i = 0; i < vals.size(); ++i) v += shape_.coeffs[i] * vals[i];
  return v;
}

FieldValue ShapeField::eval(const Vec3& theta) const {
  FieldValue out;
  if (zero_) return out;
  if (shape_.N == 2) {
    double re = 1.0, im = 0.0, v = ca_[0], dt = 0.0;
    const int step = shape_.even_only ? 2 : 1;
    double wr = theta[0], wi = theta[1];
    if (step == 2) {
      wr = theta[0] * theta[0] - theta[1] * theta[1];
      wi = 2.0 * theta[0] * theta[1];
    }
    for (int k = step; k <= shape_.K; k += step) {
      const double nr = re * wr - im * wi;
      im = re * wi + im * wr;
      re = nr;
      v += ca_[k] * re + sa_[k] * im;
      dt += k * (sa_[k] * re - ca_[k] * im);
    }
    out.value = v;
    out.grad = dt * Vec3(-theta[1], theta[0], 0.0);
    return out;
  }
  const std::size_t n = basis_.size();
  std::vector<double> vals(n);
  std::vector<Vec3> grads(n);
  basis_.values_and_gradients(theta, vals.data(), grads.data());
  for (std::size_t i = 0; i < n; ++i) {
    out.value += shape_.coeffs[i] * vals[i];
    out.grad += shape_.coeffs[i] * grads[i];
  }
  return out;
}

namespace {
// sin x - x without cancellation
double sin_minus_x(double x) {
  if (std::abs(x) > 0.25) return std::sin(x) - x;
  const double x2 = x * x;
  double term = -x * x2 / 6.0, sum = 0.0;
  for (int n = 1; n < 12; ++n) {
    sum += term;
    term *= -x2 / ((2.0 * n + 2.0) * (2.0 * n + 3.0));
  }
  return sum;
}
}  // namespace

CircleIncrement ShapeField::circle_increment(double t0, double u) const {
  CircleIncrement out;
  if (zero_) return out;
  const double ts = t0 + u;
  for (int k = 1; k <= shape_.K; ++k) {
    const double a = ca_[k], b = sa_[k];
    if (a == 0.0 && b == 0.0) continue;
    const double ck = std::cos(k * ts), sk = std::sin(k * ts);
    // f = Re(c E), c = a - i b, E = e^{i k ts}
    const double cr = a * ck + b * sk;   // Re(c E)
    const double ci = a * sk - b * ck;   // Im(c E)
    out.value += cr;
    out.deriv -= k * ci;                 // Re(i k c E)
    // e^{-i x} - 1 = -2 sin^2(x/2) - i sin x, x = k u
    const double x = k * u;
    const double h = std::sin(0.5 * x);
    const double er = -2.0 * h * h, ei = -std::sin(x);
    out.delta += cr * er - ci * ei;
    // e^{-i x} - 1 + i x = -2 sin^2(x/2) - i (sin x - x)
    const double gi = -sin_minus_x(x);
    out.lambda1 += cr * er - ci * gi;
  }
  out.value += ca_[0];
  // the Taylor-remainder form above used u; correct to sin u
  out.lambda1 += out.deriv * sin_minus_x(u);
  return out;
}

std::vector<double> synthesize(const Shape& shape, const std::vector<Vec3>& targets) {
  const ShapeField f(shape);
  std::vector<double> out;
  out.reserve(targets.size());
  for (const auto& t : targets) out.push_back(f.value(t));
  return out;
}

std::size_t SphereGrid::antipode(std::size_t i) const {
  if (N == 2) return (i + static_cast<std::size_t>(resolution / 2)) % nodes.size();
  const std::size_t ip = i / n_azimuth, ja = i % n_azimuth;
  return (n_polar - 1 - ip) * n_azimuth + (ja + n_azimuth / 2) % n_azimuth;
}

int default_resolution(int N) { return N == 2 ? 128 : 32; }

SphereGrid build_grid(int N, int resolution) {
  if (N < 2 || N > 3) throw ValidationError("grids are implemented for N = 2, 3");
  if (resolution < 8 || resolution % 2 != 0) throw ValidationError("grid resolution must be even and >= 8");
  SphereGrid g;
  g.N = N;
  g.resolution = resolution;
  if (N == 2) {
    g.n_polar = 1;
    g.n_azimuth = resolution;
    for (int i = 0; i < resolution; ++i) {
      g.nodes.push_back(circle_point(2.0 * kPi * i / resolution));
      g.weights.push_back(2.0 * kPi / resolution);
    }
    g.max_exact_degree = resolution - 1;
    return g;
  }
  g.n_polar = resolution;
  g.n_azimuth = 2 * resolution;
  const QuadRule gl = gauss_legendre(resolution);
  for (int i = 0; i < g.n_polar; ++i) {
    const double z = gl.nodes[i];
    const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
    for (int j = 0; j < g.n_azimuth; ++j) {
      const double ph = 2.0 * kPi * j / g.n_azimuth;
      g.nodes.emplace_back(rho * std::cos(ph), rho * std::sin(ph), z);
      g.weights.push_back(gl.weights[i] * 2.0 * kPi / g.n_azimuth);
    }
  }
  g.max_exact_degree = std::min(2 * g.n_polar - 1, g.n_azimuth - 1);
  return g;
}

SphereGrid build_grid(const FracParams& params, int resolution) {
  params.validate();
  return build_grid(params.N, resolution);
}

Analysis analyze(const SphereGrid& grid, const std::vector<double>& values, int K, bool even_only) {
  if (values.size() != grid.size()) throw ValidationError("analyze: value count does not match the grid");
  if (2 * K + 1 > grid.max_exact_degree) throw ValidationError("analyze: cutoff degree exceeds what the grid resolves");
  Analysis a;
  a.shape = Shape::zero(grid.N, K + ((even_only && K % 2) ? -1 : 0), even_only);
  const HarmonicBasis basis(grid.N, a.shape.K, even_only);
  const std::size_t nb = basis.size();
  std::vector<double> B(grid.size() * nb);
  for (std::size_t i = 0; i < grid.size(); ++i) basis.values(grid.nodes[i], &B[i * nb]);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double wv = grid.weights[i] * values[i];
    for (std::size_t j = 0; j < nb; ++j) a.shape.coeffs[j] += wv * B[i * nb + j];
  }
  double res2 = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    double v = values[i];
    for (std::size_t j = 0; j < nb; ++j) v -= a.shape.coeffs[j] * B[i * nb + j];
    res2 += grid.weights[i] * v * v;
  }
  a.truncation_residual = std::sqrt(res2);
  double odd2 = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double v = 0.5 * (values[i] - values[grid.antipode(i)]);
    odd2 += grid.weights[i] * v * v;
  }
  a.odd_residual = std::sqrt(odd2);
  return a;
}

double dense_sup(const Shape& shape, const SphereGrid& grid) {
  const SphereGrid dense = build_grid(grid.N, 4 * grid.resolution);
  const ShapeField f(shape);
  double sup = 0.0;
  for (const auto& t : dense.nodes) sup = std::max(sup, std::abs(f.value(t)));
  return sup;
}

double check_admissible(const Shape& shape, const SphereGrid& grid) {
  for (double c : shape.coeffs)
    if (!std::isfinite(c)) throw ValidationError("shape has non-finite coefficients");
  const double sup = dense_sup(shape, grid);
  if (!(sup < 1.0)) throw ValidationError("shape leaves the admissible set: sup|phi| >= 1");
  return sup;
}

Shape rotate(const Shape& shape, const Eigen::Matrix3d& R) {
  int res = 2 * shape.K + 4;
  if (shape.N == 3) res = shape.K + 4;
  res = std::max(8, res + res % 2);
  const SphereGrid g = build_grid(shape.N, res);
  const ShapeField f(shape);
  std::vector<double> vals;
  for (const auto& t : g.nodes) vals.push_back(f.value(R.transpose() * t));
  return analyze(g, vals, shape.K, shape.even_only).shape;
}

}  // namespace cnmc
