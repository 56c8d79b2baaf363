#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "cnmc/error.hpp"
#include "cnmc/expansion.hpp"
#include "cnmc/io.hpp"
#include "cnmc/lattice.hpp"
#include "cnmc/linop.hpp"
#include "cnmc/nmc.hpp"
#include "cnmc/parallel.hpp"
#include "cnmc/solver.hpp"
#include "cnmc/specfun.hpp"
#include "cnmc/sphere.hpp"

using namespace cnmc;

namespace {

struct Common {
  std::string out;
  int threads = 0;
  std::string config;
  std::optional<int> N;
  std::optional<double> alpha, beta;
  std::string basis;  // JSON array of basis vectors
};

struct SolveArgs {
  std::optional<double> r, tau;
  int K = 8;
  int resolution = 0;
  double tol = 1e-9;
  double quad_tol = 1e-11;
  int max_iters = 40;
  double fd_step = 1e-4;
  bool spectrum = false;
  std::string init = "predicted";
  std::string shape;
  std::vector<double> rs;
  std::string format;
  double const_tol = 1e-10;
};

void add_common(CLI::App* sub, Common& c, bool lattice) {
  sub->add_option("--out", c.out, "output path (default: stdout)");
  sub->add_option("--threads", c.threads, "worker threads (default: CNMC_THREADS or all cores)")->check(CLI::PositiveNumber);
  sub->add_option("--config", c.config, "JSON config with params and lattice");
  sub->add_option("--N", c.N, "ambient dimension (2 or 3)");
  sub->add_option("--alpha", c.alpha, "fractional order in (0, 1)");
  sub->add_option("--beta", c.beta, "Hoelder index in (alpha, 1)");
  if (lattice) sub->add_option("--basis", c.basis, "lattice basis as JSON, e.g. [[1,0],[0,1]] (default: Z^N)");
}

FracParams resolve_params(const Common& c) {
  FracParams p = make_params(2, 0.5);
  if (!c.config.empty()) p = config_from_json(read_json_file(c.config)).params;
  const int N = c.N.value_or(p.N);
  const double alpha = c.alpha.value_or(p.alpha);
  if (c.beta) {
    p = make_params(N, alpha, *c.beta);
  } else if (c.alpha || c.N) {
    p = make_params(N, alpha);
  }
  p.validate();
  return p;
}

Lattice resolve_lattice(const Common& c, const FracParams& p) {
  if (!c.basis.empty()) {
    json j;
    try {
      j = json::parse(c.basis);
    } catch (const json::exception& e) {
      throw ValidationError(std::string("--basis: ") + e.what());
    }
    return make_lattice(basis_from_json(j), p.N);
  }
  if (!c.config.empty()) {
    const RunConfig cfg = config_from_json(read_json_file(c.config));
    if (cfg.basis) return make_lattice(*cfg.basis, p.N);
  }
  std::vector<std::vector<double>> id(static_cast<std::size_t>(p.N), std::vector<double>(static_cast<std::size_t>(p.N), 0.0));
  for (int i = 0; i < p.N; ++i) id[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] = 1.0;
  return make_lattice(id, p.N);
}

void apply_threads(const Common& c) {
  if (c.threads > 0) set_num_threads(c.threads);
}

class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty()) {
      file_.open(path);
      if (!file_) throw ValidationError("cannot write " + path);
    }
  }
  std::ostream& stream() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }
  void write(const json& j) { stream() << j.dump(2) << '\n'; }

 private:
  std::ofstream file_;
};

double tau_of(const SolveArgs& a) {
  if (a.r && a.tau) throw ValidationError("give either --r or --tau, not both");
  if (a.r) {
    if (!(*a.r > 0.0)) throw ValidationError("--r must be positive");
    return 1.0 / *a.r;
  }
  return a.tau.value_or(0.0);
}

int resolution_of(const SolveArgs& a, const FracParams& p) {
  return a.resolution > 0 ? a.resolution : default_resolution(p.N);
}

SolverOptions solver_options(const SolveArgs& a) {
  SolverOptions o;
  o.tol = a.tol;
  o.quad_tol = a.quad_tol;
  o.max_iters = a.max_iters;
  o.fd_step = a.fd_step;
  o.spectrum = a.spectrum;
  return o;
}

json solver_tolerances(const SolveArgs& a) {
  return json{{"newton_tol", a.tol}, {"quad_tol", a.quad_tol}, {"max_iters", a.max_iters},
              {"fd_step", a.fd_step}, {"K", a.K}, {"constants_tol", a.const_tol}};
}

Shape load_shape(const std::string& path, const FracParams& p) {
  Shape s = shape_from_json(read_json_file(path));
  if (s.N != p.N) throw ValidationError("shape N does not match params N");
  return s;
}

void add_solve_options(CLI::App* sub, SolveArgs& a) {
  sub->add_option("--K", a.K, "harmonic cutoff (even degrees <= K)")->check(CLI::NonNegativeNumber);
  sub->add_option("--resolution", a.resolution, "sphere grid resolution (default: 128 for N=2, 32 for N=3)");
  sub->add_option("--tol", a.tol, "Newton tolerance on sup|H - lambda_1|");
  sub->add_option("--quad-tol", a.quad_tol, "quadrature and lattice-sum tolerance");
  sub->add_option("--max-iters", a.max_iters, "Newton iteration cap");
  sub->add_option("--fd-step", a.fd_step, "finite-difference step of the Jacobian");
  sub->add_flag("--spectrum", a.spectrum, "attach the linearization spectrum to each point");
  sub->add_option("--constants-tol", a.const_tol, "tolerance of the expansion constants");
}

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"cnmc: nonlocal mean curvature of perturbed-sphere lattices"};
  app.require_subcommand(1);
  app.set_version_flag("--version", version_string());

  Common c;
  SolveArgs a;
  int kmax = 6;
  double s_exp = 0.0;
  std::string theta_str, method = "accelerated", branch_path;
  double sum_tol = 1e-12;
  std::optional<double> nmc_tol;

  auto* eig = app.add_subcommand("eig", "eigenvalues lambda_k of the linearized operator");
  add_common(eig, c, false);
  eig->add_option("--kmax", kmax, "largest degree")->check(CLI::NonNegativeNumber);

  auto* constants = app.add_subcommand("constants", "expansion constants kappa_0, kappa_1, kappa_2");
  add_common(constants, c, true);
  constants->add_option("--tol", a.const_tol, "lattice-sum tolerance");

  auto* lsum = app.add_subcommand("lattice-sum", "sum over L* of |p|^{-s} or (theta.p)^2 |p|^{-s}");
  add_common(lsum, c, true);
  lsum->add_option("--s", s_exp, "exponent")->required();
  lsum->add_option("--theta", theta_str, "direction x,y[,z] for the directional weight");
  lsum->add_option("--method", method, "accelerated or direct")->check(CLI::IsMember({"accelerated", "direct"}));
  lsum->add_option("--tol", sum_tol, "absolute tolerance");

  auto* nmc = app.add_subcommand("nmc-eval", "h, G and H = h + tau^s G on the sphere grid");
  add_common(nmc, c, true);
  nmc->add_option("--tau", a.tau, "tau = 1/r (default 0)");
  nmc->add_option("--shape", a.shape, "shape JSON (default: the sphere)");
  nmc->add_option("--resolution", a.resolution, "sphere grid resolution");
  nmc->add_option("--tol", nmc_tol, "quadrature tolerance");

  auto* solve = app.add_subcommand("solve", "one CNMC shape at fixed r");
  add_common(solve, c, true);
  solve->add_option("--r", a.r, "lattice scale r");
  solve->add_option("--tau", a.tau, "tau = 1/r");
  solve->add_option("--init", a.init, "initial guess: predicted, zero or a shape JSON path");
  add_solve_options(solve, a);

  auto* branch = app.add_subcommand("branch", "continuation over descending r");
  add_common(branch, c, true);
  branch->add_option("--rs", a.rs, "comma-separated r values, descending")->delimiter(',')->required();
  branch->add_option("--format", a.format, "csv or json (default: from --out extension, else csv)")
      ->check(CLI::IsMember({"csv", "json"}));
  add_solve_options(branch, a);

  auto* verify = app.add_subcommand("verify", "compare a branch with the two-term expansion");
  add_common(verify, c, false);
  verify->add_option("--branch", branch_path, "branch CSV")->required();
  verify->add_option("--resolution", a.resolution, "grid resolution (default: from the branch manifest)");
  verify->add_option("--constants-tol", a.const_tol, "tolerance of the expansion constants");

  auto* spectrum = app.add_subcommand("spectrum", "eigenvalues of the finite-difference linearization");
  add_common(spectrum, c, true);
  spectrum->add_option("--r", a.r, "lattice scale r (solved first unless --shape is given)");
  spectrum->add_option("--tau", a.tau, "tau = 1/r (default 0)");
  spectrum->add_option("--shape", a.shape, "shape JSON to linearize at");
  add_solve_options(spectrum, a);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    apply_threads(c);
    Output out(c.out);

    if (eig->parsed()) {
      const FracParams p = resolve_params(c);
      json lam = json::array(), gap = json::array();
      for (int k = 0; k <= kmax; ++k) {
        lam.push_back(lambda_k(p, k));
        gap.push_back(k == 0 ? json(nullptr) : json(classical_limit_gap(p, k)));
      }
      out.write(json{{"manifest", manifest(&p, nullptr, std::nullopt, json::object())},
                     {"lambda", lam},
                     {"classical_gap", gap},
                     {"asymptotic_constant", lambda_asymptotic_constant(p)}});
      return 0;
    }

    if (constants->parsed()) {
      const FracParams p = resolve_params(c);
      const Lattice L = resolve_lattice(c, p);
      const ExpansionData d = kappa_constants(p, L, a.const_tol);
      const NonconstancyCertificate cert = nonconstancy_certificate(L, p, a.const_tol);
      out.write(json{{"manifest", manifest(&p, &L, std::nullopt, json{{"lattice_sum_tol", a.const_tol}})},
                     {"constants", to_json(d)},
                     {"nonconstancy", {{"f_parallel", cert.f_parallel}, {"f_perp", cert.f_perp}, {"nonconstant", cert.nonconstant}}}});
      return 0;
    }

    if (lsum->parsed()) {
      const FracParams p = resolve_params(c);
      const Lattice L = resolve_lattice(c, p);
      SumWeight w = UnitWeight{};
      json weight = "unit";
      if (!theta_str.empty()) {
        std::vector<double> t;
        std::stringstream ss(theta_str);
        std::string cell;
        while (std::getline(ss, cell, ',')) t.push_back(std::stod(cell));
        if (static_cast<int>(t.size()) != p.N) throw ValidationError("--theta needs N components");
        Vec3 th = Vec3::Zero();
        for (int i = 0; i < p.N; ++i) th[i] = t[static_cast<std::size_t>(i)];
        if (!(th.norm() > 0.0)) throw ValidationError("--theta must be nonzero");
        th.normalize();
        w = DirectionalWeight{th};
        weight = json{{"theta", {th[0], th[1], th[2]}}};
      }
      const auto res = weighted_sum(L, s_exp, w, sum_tol, method == "direct" ? SumMethod::direct : SumMethod::accelerated);
      out.write(json{{"manifest", manifest(&p, &L, std::nullopt, json{{"tol", sum_tol}, {"method", method}})},
                     {"s", s_exp},
                     {"weight", weight},
                     {"result", to_json(res)}});
      return 0;
    }

    if (nmc->parsed()) {
      const FracParams p = resolve_params(c);
      const Lattice L = resolve_lattice(c, p);
      const double tol = nmc_tol.value_or(default_nmc_tol(p.N));
      const int res = resolution_of(a, p);
      const SphereGrid grid = build_grid(p, res);
      const Shape shape = a.shape.empty() ? Shape::zero(p.N, 0) : load_shape(a.shape, p);
      const ScriptHResult H = script_h(p, a.tau.value_or(0.0), shape, grid, L, tol);
      json theta = json::array();
      for (const auto& t : grid.nodes) {
        json v = json::array();
        for (int i = 0; i < p.N; ++i) v.push_back(t[i]);
        theta.push_back(v);
      }
      out.write(json{{"manifest", manifest(&p, &L, res, json{{"quad_tol", tol}})},
                     {"tau", a.tau.value_or(0.0)},
                     {"h_error", H.h_error},
                     {"kbar_min", H.kbar_min},
                     {"theta", theta},
                     {"h", H.h},
                     {"G", H.G},
                     {"H", H.H}});
      return 0;
    }

    if (solve->parsed()) {
      const FracParams p = resolve_params(c);
      const Lattice L = resolve_lattice(c, p);
      const double tau = tau_of(a);
      const int res = resolution_of(a, p);
      const SphereGrid grid = build_grid(p, res);
      Shape init;
      if (a.init == "predicted") {
        init = predicted_shape(std::abs(tau) > 0.0 ? 1.0 / std::abs(tau) : INFINITY, kappa_constants(p, L, a.const_tol), a.K);
      } else if (a.init == "zero") {
        init = Shape::zero(p.N, a.K);
      } else {
        init = load_shape(a.init, p);
      }
      const BranchPoint bp = newton_solve(p, tau, init, grid, L, solver_options(a));
      out.write(json{{"manifest", manifest(&p, &L, res, solver_tolerances(a))}, {"point", to_json(bp)}});
      return 0;
    }

    if (branch->parsed()) {
      const FracParams p = resolve_params(c);
      const Lattice L = resolve_lattice(c, p);
      const int res = resolution_of(a, p);
      const SphereGrid grid = build_grid(p, res);
      const ExpansionData d = kappa_constants(p, L, a.const_tol);
      const BranchTrace tr = trace_branch(p, a.rs, grid, L, a.K, d, solver_options(a));
      const json man = manifest(&p, &L, res, solver_tolerances(a));
      std::string fmt = a.format;
      if (fmt.empty()) fmt = c.out.size() >= 5 && c.out.substr(c.out.size() - 5) == ".json" ? "json" : "csv";
      if (fmt == "csv") {
        write_branch_csv(out.stream(), tr.points, man);
      } else {
        json pts = json::array();
        for (const auto& bp : tr.points) pts.push_back(to_json(bp));
        out.write(json{{"manifest", man},
                       {"points", pts},
                       {"failed_r", tr.failed_r ? json(*tr.failed_r) : json(nullptr)},
                       {"message", tr.message}});
      }
      if (tr.failed_r) {
        std::cerr << "cnmc: branch stopped at r = " << *tr.failed_r << ": " << tr.message << '\n';
        return 3;
      }
      return 0;
    }

    if (verify->parsed()) {
      std::ifstream in(branch_path);
      if (!in) throw ValidationError("cannot open " + branch_path);
      const BranchTable table = read_branch_csv(in);
      const FracParams p = params_from_json(table.manifest.at("params"));
      const Lattice L = lattice_from_json(table.manifest.at("lattice"), p.N);
      int res = a.resolution;
      if (res <= 0) {
        const auto& g = table.manifest["grid_resolution"];
        res = g.is_number_integer() ? g.get<int>() : default_resolution(p.N);
      }
      const SphereGrid grid = build_grid(p, res);
      const ExpansionData d = kappa_constants(p, L, a.const_tol);
      json rows = json::array();
      for (const auto& row : verify_expansion(table.points, d, grid)) rows.push_back(to_json(row));
      out.write(json{{"manifest", manifest(&p, &L, res, json{{"constants_tol", a.const_tol}, {"branch", table.manifest}})},
                     {"kappa0", d.kappa0},
                     {"kappa1", d.kappa1},
                     {"kappa2", d.kappa2},
                     {"rows", rows}});
      return 0;
    }

    if (spectrum->parsed()) {
      const FracParams p = resolve_params(c);
      const Lattice L = resolve_lattice(c, p);
      const double tau = tau_of(a);
      const int res = resolution_of(a, p);
      const SphereGrid grid = build_grid(p, res);
      Shape shape;
      if (!a.shape.empty()) {
        shape = load_shape(a.shape, p);
      } else if (tau == 0.0) {
        shape = Shape::zero(p.N, a.K);
      } else {
        const Shape init = predicted_shape(1.0 / std::abs(tau), kappa_constants(p, L, a.const_tol), a.K);
        SolverOptions o = solver_options(a);
        o.spectrum = false;
        shape = newton_solve(p, tau, init, grid, L, o).shape;
      }
      const Spectrum sp = linearization_spectrum(p, tau, shape, grid, L, a.fd_step, a.quad_tol);
      out.write(json{{"manifest", manifest(&p, &L, res, solver_tolerances(a))},
                     {"tau", tau},
                     {"eigenvalues", sp.eigenvalues},
                     {"negative", sp.negative},
                     {"max_imag", sp.max_imag},
                     {"shape", to_json(shape)}});
      return 0;
    }
  } catch (const ValidationError& e) {
    std::cerr << "cnmc: validation error: " << e.what() << '\n';
    return 2;
  } catch (const ConvergenceError& e) {
    std::cerr << "cnmc: no convergence: " << e.what() << '\n';
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "cnmc: validation error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "cnmc: error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

int main(int argc, char** argv) { return run(argc, argv); }
