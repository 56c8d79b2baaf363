#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

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

namespace py = pybind11;
using namespace cnmc;

namespace {

py::object to_py(const json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

py::array_t<double> as_array(const std::vector<double>& v) { return py::array_t<double>(static_cast<py::ssize_t>(v.size()), v.data()); }

Vec3 to_vec3(const std::vector<double>& v) {
  if (v.empty() || v.size() > 3) throw ValidationError("direction needs 1 to 3 components");
  Vec3 out = Vec3::Zero();
  for (std::size_t i = 0; i < v.size(); ++i) out[static_cast<Eigen::Index>(i)] = v[i];
  return out;
}

py::array_t<double> nodes_array(const SphereGrid& g) {
  py::array_t<double> a({static_cast<py::ssize_t>(g.size()), static_cast<py::ssize_t>(g.N)});
  auto m = a.mutable_unchecked<2>();
  for (std::size_t i = 0; i < g.size(); ++i)
    for (int j = 0; j < g.N; ++j) m(static_cast<py::ssize_t>(i), j) = g.nodes[i][j];
  return a;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Nonlocal mean curvature of perturbed-sphere lattices";

  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<ConvergenceError>(m, "ConvergenceError", PyExc_RuntimeError);

  m.attr("__version__") = version_string();
  m.def("set_num_threads", &set_num_threads, py::arg("n"));
  m.def("num_threads", &num_threads);

  py::class_<FracParams>(m, "FracParams")
      .def(py::init([](int N, double alpha, std::optional<double> beta) {
             return beta ? make_params(N, alpha, *beta) : make_params(N, alpha);
           }),
           py::arg("N"), py::arg("alpha"), py::arg("beta") = py::none())
      .def_readonly("N", &FracParams::N)
      .def_readonly("alpha", &FracParams::alpha)
      .def_readonly("beta", &FracParams::beta)
      .def("__repr__", [](const FracParams& p) {
        return "FracParams(N=" + std::to_string(p.N) + ", alpha=" + std::to_string(p.alpha) + ", beta=" + std::to_string(p.beta) + ")";
      });

  m.def("lambda_k", &lambda_k, py::arg("params"), py::arg("k"));
  m.def("d_coeff", &d_coeff, py::arg("params"));
  m.def("sphere_area", &sphere_area, py::arg("n"));
  m.def("gamma", &gamma_fn, py::arg("x"));
  m.def("classical_limit_gap", &classical_limit_gap, py::arg("params"), py::arg("k"));
  m.def("lambda_asymptotic_constant", &lambda_asymptotic_constant, py::arg("params"));

  py::class_<Lattice>(m, "Lattice")
      .def(py::init(&make_lattice), py::arg("basis"), py::arg("N"))
      .def_readonly("N", &Lattice::N)
      .def_readonly("M", &Lattice::M)
      .def_readonly("c0", &Lattice::c0)
      .def_readonly("covolume", &Lattice::covolume)
      .def_readonly("is_rectangular", &Lattice::is_rectangular)
      .def_readonly("is_square", &Lattice::is_square)
      .def("to_dict", [](const Lattice& L) { return to_py(to_json(L)); });

  m.def(
      "lattice_sum",
      [](const Lattice& L, double s, std::optional<std::vector<double>> theta, double tol, const std::string& method) {
        if (method != "accelerated" && method != "direct") throw ValidationError("method must be accelerated or direct");
        SumWeight w = UnitWeight{};
        if (theta) w = DirectionalWeight{to_vec3(*theta).normalized()};
        return to_py(to_json(weighted_sum(L, s, w, tol, method == "direct" ? SumMethod::direct : SumMethod::accelerated)));
      },
      py::arg("lattice"), py::arg("s"), py::arg("theta") = py::none(), py::arg("tol") = 1e-12,
      py::arg("method") = "accelerated");

  py::class_<Shape>(m, "Shape")
      .def(py::init(&Shape::zero), py::arg("N"), py::arg("K"), py::arg("even_only") = true)
      .def_readonly("N", &Shape::N)
      .def_readonly("K", &Shape::K)
      .def_readonly("even_only", &Shape::even_only)
      .def_readwrite("coeffs", &Shape::coeffs)
      .def("get", &Shape::get, py::arg("k"), py::arg("m"))
      .def("set", &Shape::set, py::arg("k"), py::arg("m"), py::arg("c"))
      .def("indices", [](const Shape& s) {
        std::vector<std::pair<int, int>> out;
        for (const auto& h : s.indices()) out.emplace_back(h.k, h.m);
        return out;
      })
      .def("__call__", [](const Shape& s, const std::vector<double>& theta) { return ShapeField(s).value(to_vec3(theta)); })
      .def("to_dict", [](const Shape& s) { return to_py(to_json(s)); })
      .def_static("from_json", [](const std::string& text) { return shape_from_json(json::parse(text)); });

  py::class_<SphereGrid>(m, "SphereGrid")
      .def(py::init(py::overload_cast<int, int>(&build_grid)), py::arg("N"), py::arg("resolution"))
      .def_readonly("N", &SphereGrid::N)
      .def_readonly("resolution", &SphereGrid::resolution)
      .def_property_readonly("nodes", &nodes_array)
      .def_property_readonly("weights", [](const SphereGrid& g) { return as_array(g.weights); })
      .def("__len__", &SphereGrid::size);
  m.def("default_resolution", &default_resolution, py::arg("N"));

  m.def(
      "h_nmc",
      [](const FracParams& p, const Shape& s, const SphereGrid& g, std::optional<double> tol) {
        return as_array(h_nmc(p, s, g, tol.value_or(default_nmc_tol(p.N))).values);
      },
      py::arg("params"), py::arg("shape"), py::arg("grid"), py::arg("tol") = py::none());

  m.def(
      "script_h",
      [](const FracParams& p, double tau, const Shape& s, const SphereGrid& g, const Lattice& L, std::optional<double> tol) {
        const ScriptHResult r = script_h(p, tau, s, g, L, tol.value_or(default_nmc_tol(p.N)));
        py::dict d;
        d["h"] = as_array(r.h);
        d["G"] = as_array(r.G);
        d["H"] = as_array(r.H);
        d["h_error"] = r.h_error;
        d["kbar_min"] = r.kbar_min;
        return d;
      },
      py::arg("params"), py::arg("tau"), py::arg("shape"), py::arg("grid"), py::arg("lattice"), py::arg("tol") = py::none());

  m.def(
      "l_alpha_pv",
      [](const FracParams& p, const Shape& s, const std::vector<double>& theta, double tol) {
        return l_alpha_pv(p, s, to_vec3(theta).normalized(), tol);
      },
      py::arg("params"), py::arg("shape"), py::arg("theta"), py::arg("tol") = 1e-10);

  py::class_<ExpansionData>(m, "ExpansionData")
      .def_readonly("kappa0", &ExpansionData::kappa0)
      .def_readonly("kappa1", &ExpansionData::kappa1)
      .def_readonly("kappa2", &ExpansionData::kappa2)
      .def_readonly("lambda1", &ExpansionData::lambda1)
      .def_readonly("lambda2", &ExpansionData::lambda2)
      .def_readonly("mu", &ExpansionData::mu)
      .def_property_readonly("Phi0", [](const ExpansionData& d) { return d.phi.Phi0; })
      .def("to_dict", [](const ExpansionData& d) { return to_py(to_json(d)); });

  m.def("kappa_constants", &kappa_constants, py::arg("params"), py::arg("lattice"), py::arg("tol") = 1e-10);
  m.def("predicted_shape", &predicted_shape, py::arg("r"), py::arg("data"), py::arg("K"));

  py::class_<SolverOptions>(m, "SolverOptions")
      .def(py::init([](double tol, int max_iters, double quad_tol, double fd_step, bool spectrum) {
             return SolverOptions{tol, max_iters, quad_tol, fd_step, spectrum};
           }),
           py::arg("tol") = 1e-9, py::arg("max_iters") = 40, py::arg("quad_tol") = 1e-11, py::arg("fd_step") = 1e-4,
           py::arg("spectrum") = false)
      .def_readwrite("tol", &SolverOptions::tol)
      .def_readwrite("max_iters", &SolverOptions::max_iters)
      .def_readwrite("quad_tol", &SolverOptions::quad_tol)
      .def_readwrite("fd_step", &SolverOptions::fd_step)
      .def_readwrite("spectrum", &SolverOptions::spectrum);

  py::class_<BranchPoint>(m, "BranchPoint")
      .def_readonly("r", &BranchPoint::r)
      .def_readonly("tau", &BranchPoint::tau)
      .def_readonly("shape", &BranchPoint::shape)
      .def_readonly("residual_sup", &BranchPoint::residual_sup)
      .def_readonly("newton_iters", &BranchPoint::newton_iters)
      .def_readonly("negative_eigenvalues", &BranchPoint::negative_eigenvalues)
      .def("to_dict", [](const BranchPoint& b) { return to_py(to_json(b)); });

  m.def("newton_solve", &newton_solve, py::arg("params"), py::arg("tau"), py::arg("initial"), py::arg("grid"),
        py::arg("lattice"), py::arg("options") = SolverOptions{});

  m.def(
      "trace_branch",
      [](const FracParams& p, const std::vector<double>& rs, const SphereGrid& g, const Lattice& L, int K,
         const ExpansionData& d, const SolverOptions& o) {
        const BranchTrace t = trace_branch(p, rs, g, L, K, d, o);
        py::dict out;
        out["points"] = t.points;
        out["failed_r"] = t.failed_r;
        out["message"] = t.message;
        return out;
      },
      py::arg("params"), py::arg("rs"), py::arg("grid"), py::arg("lattice"), py::arg("K"), py::arg("data"),
      py::arg("options") = SolverOptions{});

  m.def(
      "verify_expansion",
      [](const std::vector<BranchPoint>& b, const ExpansionData& d, const SphereGrid& g) {
        py::list rows;
        for (const auto& r : verify_expansion(b, d, g)) rows.append(to_py(to_json(r)));
        return rows;
      },
      py::arg("branch"), py::arg("data"), py::arg("grid"));

  m.def(
      "linearization_spectrum",
      [](const FracParams& p, double tau, const Shape& s, const SphereGrid& g, const Lattice& L, double fd_step, double tol) {
        const Spectrum sp = linearization_spectrum(p, tau, s, g, L, fd_step, tol);
        py::dict d;
        d["eigenvalues"] = as_array(sp.eigenvalues);
        d["negative"] = sp.negative;
        d["max_imag"] = sp.max_imag;
        return d;
      },
      py::arg("params"), py::arg("tau"), py::arg("shape"), py::arg("grid"), py::arg("lattice"), py::arg("fd_step") = 1e-4,
      py::arg("tol") = 1e-11);
}
