#include "cnmc/specfun.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "cnmc/error.hpp"

namespace cnmc {

namespace {

constexpr double kPi = std::numbers::pi;

// Lanczos coefficients for g = 7, n = 9.
constexpr double kLanczosG = 7.0;
constexpr std::array<double, 9> kLanczos = {
    0.99999999999980993,     676.5203681218851,     -1259.1392167224028,
    771.32342877765313,      -176.61502916214059,   12.507343278686905,
    -0.13857109526572012,    9.9843695780195716e-6, 1.5056327351493116e-7};

bool is_nonpositive_integer(double x) { return x <= 0.0 && x == std::floor(x); }

double lanczos_sum(double z) {
  // z = x - 1
  double a = kLanczos[0];
  for (std::size_t i = 1; i < kLanczos.size(); ++i) a += kLanczos[i] / (z + static_cast<double>(i));
  return a;
}

}  // namespace

void FracParams::validate() const {
  if (N < 2 || N > 3) {
    std::ostringstream os;
    os << "ambient dimension N=" << N << " not supported (expected 2 or 3)";
    throw ValidationError(os.str());
  }
  if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("alpha must lie in (0,1)");
  if (!(beta > alpha && beta < 1.0)) throw ValidationError("beta must lie in (alpha,1)");
}

FracParams make_params(int N, double alpha) { return make_params(N, alpha, 0.5 * (alpha + 1.0)); }

FracParams make_params(int N, double alpha, double beta) {
  FracParams p{N, alpha, beta};
  p.validate();
  return p;
}

double gamma_fn(double x) {
  if (std::isnan(x)) return x;
  if (is_nonpositive_integer(x)) {
    std::ostringstream os;
    os << "Gamma has a pole at x=" << x;
    throw PoleError(os.str());
  }
  if (x < 0.5) {
    // Gamma(x) Gamma(1-x) = pi / sin(pi x)
    return kPi / (std::sin(kPi * x) * gamma_fn(1.0 - x));
  }
  if (x > 171.7) return std::numeric_limits<double>::infinity();
  const double z = x - 1.0;
  const double t = z + kLanczosG + 0.5;
  // sqrt(2 pi) t^{z+1/2} e^{-t} A(z); split the power to avoid overflow near x = 171
  const double half = std::pow(t, 0.5 * (z + 0.5));
  return std::sqrt(2.0 * kPi) * half * (half * std::exp(-t)) * lanczos_sum(z);
}

double log_gamma(double x) {
  if (!(x > 0.0)) throw ValidationError("log_gamma requires x > 0");
  if (x < 0.5) return std::log(kPi / std::sin(kPi * x)) - log_gamma(1.0 - x);
  const double z = x - 1.0;
  const double t = z + kLanczosG + 0.5;
  return 0.5 * std::log(2.0 * kPi) + (z + 0.5) * std::log(t) - t + std::log(lanczos_sum(z));
}

double sphere_area(int n) {
  if (n < 1) throw ValidationError("sphere_area requires n >= 1");
  return 2.0 * std::pow(kPi, 0.5 * n) / gamma_fn(0.5 * n);
}

double ball_volume(int n) {
  if (n < 0) throw ValidationError("ball_volume requires n >= 0");
  return std::pow(kPi, 0.5 * n) / gamma_fn(0.5 * n + 1.0);
}

double d_coeff(const FracParams& params) {
  params.validate();
  const int N = params.N;
  return (1.0 - params.alpha) * gamma_fn(0.5 * (N + 1)) /
         ((N - 1) * std::pow(kPi, 0.5 * (N - 1)));
}

double lambda_asymptotic_constant(const FracParams& params) {
  params.validate();
  const double a = params.alpha;
  const int N = params.N;
  return std::pow(kPi, 0.5 * (N - 1)) * gamma_fn(0.5 * (1.0 - a)) /
         ((1.0 + a) * std::pow(2.0, a) * gamma_fn(0.5 * (N + a)));
}

double lambda_k(const FracParams& params, int k) {
  if (k < 0) throw ValidationError("lambda_k requires k >= 0");
  const double c = lambda_asymptotic_constant(params);
  if (k == 0) return 0.0;
  const double a = params.alpha;
  const int N = params.N;
  const double top = 0.5 * (2 * k + N + a);
  const double bot = 0.5 * (2 * k + N - a - 2);
  // bot > 0 for k >= 1; use log-gamma so large k does not overflow
  const double ratio_k = std::exp(log_gamma(top) - log_gamma(bot));
  const double ratio_0 = gamma_fn(0.5 * (N + a)) / gamma_fn(0.5 * (N - a - 2));
  return c * (ratio_k - ratio_0);
}

double classical_limit_gap(const FracParams& params, int k) {
  if (k < 1) throw ValidationError("classical_limit_gap requires k >= 1");
  const int N = params.N;
  const double classical = static_cast<double>(k) * (k + N - 2) / (N - 1);
  return 2.0 * d_coeff(params) * lambda_k(params, k) - classical;
}

}  // namespace cnmc
