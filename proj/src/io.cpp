#include "cnmc/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "cnmc/error.hpp"

#ifndef CNMC_VERSION_STRING
#define CNMC_VERSION_STRING "unknown"
#endif

namespace cnmc {

namespace {

// JSON has no infinities; r = inf (tau = 0) is written as null.
json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::vector<double> split_doubles(const std::string& line) {
  std::vector<double> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    if (cell.empty()) {
      out.push_back(NAN);
      continue;
    }
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(cell, &used);
    } catch (const std::exception&) {
      throw ValidationError("branch CSV: cannot parse '" + cell + "'");
    }
    if (used != cell.size()) throw ValidationError("branch CSV: cannot parse '" + cell + "'");
    out.push_back(v);
  }
  return out;
}

std::vector<std::string> split_cells(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

std::string coeff_column(const HarmonicIndex& h) { return "c_" + std::to_string(h.k) + "_" + std::to_string(h.m); }

}  // namespace

std::string version_string() { return CNMC_VERSION_STRING; }

json to_json(const FracParams& p) { return json{{"N", p.N}, {"alpha", p.alpha}, {"beta", p.beta}}; }

json to_json(const Lattice& L) {
  json basis = json::array();
  for (Eigen::Index i = 0; i < L.basis_m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < L.basis_m.cols(); ++j) row.push_back(L.basis_m(i, j));
    basis.push_back(row);
  }
  return json{{"N", L.N}, {"basis", basis}};
}

json to_json(const Shape& s) {
  json coeffs = json::array();
  const auto idx = s.indices();
  for (std::size_t i = 0; i < idx.size(); ++i) coeffs.push_back(json{{"k", idx[i].k}, {"m", idx[i].m}, {"c", s.coeffs[i]}});
  return json{{"N", s.N}, {"K", s.K}, {"even_only", s.even_only}, {"coeffs", coeffs}};
}

json to_json(const LatticeSumResult& r) {
  return json{{"value", r.value},
              {"truncation_radius", r.truncation_radius},
              {"tail_bound", r.tail_bound},
              {"terms_used", r.terms_used}};
}

json to_json(const ExpansionData& d) {
  json moment = json::array();
  for (int i = 0; i < d.params.N; ++i) {
    json row = json::array();
    for (int j = 0; j < d.params.N; ++j) row.push_back(d.phi.moment(i, j));
    moment.push_back(row);
  }
  json j{{"params", to_json(d.params)},
         {"lambda1", d.lambda1},
         {"lambda2", d.lambda2},
         {"Phi0", d.phi.Phi0},
         {"a1", d.phi.a1},
         {"a2", d.phi.a2},
         {"sum_s", d.phi.sum_s},
         {"sum_s_plus_2", d.phi.sum_s2},
         {"moment_matrix", moment},
         {"tail_bound", d.phi.tail},
         {"Psi0", d.Psi0},
         {"kappa0", d.kappa0},
         {"kappa1", d.kappa1},
         {"kappa2", d.kappa2},
         {"mu", d.mu ? json(*d.mu) : json(nullptr)},
         {"kappa_tilde1", d.kappa_tilde1 ? json(*d.kappa_tilde1) : json(nullptr)},
         {"consistency", d.consistency}};
  return j;
}

json to_json(const BranchPoint& bp) {
  return json{{"r", number_or_null(bp.r)},
              {"tau", bp.tau},
              {"residual_sup", bp.residual_sup},
              {"residual_coeff", bp.residual_coeff},
              {"odd_residual", bp.odd_residual},
              {"newton_iters", bp.newton_iters},
              {"full_jacobian", bp.full_jacobian},
              {"kbar_min", bp.kbar_min},
              {"negative_eigenvalues", bp.negative_eigenvalues ? json(*bp.negative_eigenvalues) : json(nullptr)},
              {"spectrum", bp.spectrum},
              {"shape", to_json(bp.shape)}};
}

json to_json(const ExpansionRow& row) {
  auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
  return json{{"r", row.r},
              {"e0", row.e0},
              {"e2", row.e2},
              {"c2_norm", row.c2_norm},
              {"e0_ratio", opt(row.e0_ratio)},
              {"e2_ratio", opt(row.e2_ratio)},
              {"c2_ratio", opt(row.c2_ratio)},
              {"e0_quadratic", row.e0_quadratic},
              {"e0_corrected", row.e0_corrected},
              {"e0_corrected_ratio", opt(row.e0_corrected_ratio)}};
}

FracParams params_from_json(const json& j) {
  if (!j.is_object()) throw ValidationError("params must be a JSON object");
  if (!j.contains("N") || !j.contains("alpha")) throw ValidationError("params need N and alpha");
  try {
    const int N = j.at("N").get<int>();
    const double alpha = j.at("alpha").get<double>();
    FracParams p = j.contains("beta") ? make_params(N, alpha, j.at("beta").get<double>()) : make_params(N, alpha);
    p.validate();
    return p;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("bad params: ") + e.what());
  }
}

std::vector<std::vector<double>> basis_from_json(const json& j) {
  const json& b = j.is_object() ? j.at("basis") : j;
  try {
    return b.get<std::vector<std::vector<double>>>();
  } catch (const json::exception& e) {
    throw ValidationError(std::string("bad lattice basis: ") + e.what());
  }
}

Lattice lattice_from_json(const json& j, int N) {
  if (!j.is_object() || !j.contains("basis")) throw ValidationError("lattice needs a basis");
  int n = N;
  if (j.contains("N")) {
    n = j.at("N").get<int>();
    if (n != N) throw ValidationError("lattice N does not match params N");
  }
  return make_lattice(basis_from_json(j), n);
}

Shape shape_from_json(const json& j) {
  try {
    const int N = j.at("N").get<int>();
    const int K = j.at("K").get<int>();
    const bool even = j.value("even_only", true);
    if (N < 2 || N > 3 || K < 0) throw ValidationError("shape needs N in {2,3} and K >= 0");
    Shape s = Shape::zero(N, K, even);
    for (const auto& c : j.at("coeffs")) {
      const int k = c.at("k").get<int>();
      const int m = c.at("m").get<int>();
      if (s.position(k, m) < 0) throw ValidationError("shape coefficient (" + std::to_string(k) + "," + std::to_string(m) + ") outside the basis");
      s.set(k, m, c.at("c").get<double>());
    }
    return s;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("bad shape JSON: ") + e.what());
  }
}

RunConfig config_from_json(const json& j) {
  if (!j.is_object()) throw ValidationError("config must be a JSON object");
  RunConfig cfg;
  const json& pj = j.contains("params") ? j.at("params") : j;
  json merged = pj;
  // A bare lattice file {"N":2,"basis":...} is accepted; alpha then comes from the caller.
  if (!merged.contains("N") && j.contains("lattice") && j.at("lattice").contains("N")) merged["N"] = j.at("lattice").at("N");
  if (merged.contains("alpha")) {
    cfg.params = params_from_json(merged);
  } else {
    cfg.params = make_params(merged.value("N", 2), 0.5);
  }
  if (j.contains("lattice")) {
    cfg.basis = basis_from_json(j.at("lattice"));
  } else if (j.contains("basis")) {
    cfg.basis = basis_from_json(j.at("basis"));
  }
  return cfg;
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

json manifest(const FracParams* params, const Lattice* L, std::optional<int> resolution, const json& tolerances) {
  return json{{"params", params ? to_json(*params) : json(nullptr)},
              {"lattice", L ? to_json(*L) : json(nullptr)},
              {"grid_resolution", resolution ? json(*resolution) : json(nullptr)},
              {"tolerances", tolerances},
              {"version", version_string()}};
}

void write_branch_csv(std::ostream& os, const std::vector<BranchPoint>& branch, const json& man) {
  os << "# manifest: " << man.dump() << '\n';
  std::vector<HarmonicIndex> idx;
  if (!branch.empty()) idx = branch.front().shape.indices();
  for (const auto& bp : branch)
    if (bp.shape.indices() != idx) throw ValidationError("branch points must share one harmonic basis");
  os << "r,tau,residual_sup,residual_coeff,odd_residual,newton_iters,full_jacobian,kbar_min,negative_eigenvalues";
  for (const auto& h : idx) os << ',' << coeff_column(h);
  os << '\n';
  const auto old_prec = os.precision(17);
  for (const auto& bp : branch) {
    os << bp.r << ',' << bp.tau << ',' << bp.residual_sup << ',' << bp.residual_coeff << ',' << bp.odd_residual << ','
       << bp.newton_iters << ',' << (bp.full_jacobian ? 1 : 0) << ',' << bp.kbar_min << ',';
    if (bp.negative_eigenvalues) os << *bp.negative_eigenvalues;
    for (double c : bp.shape.coeffs) os << ',' << c;
    os << '\n';
  }
  os.precision(old_prec);
}

BranchTable read_branch_csv(std::istream& is) {
  BranchTable table;
  std::string line;
  std::vector<std::string> header;
  const std::string tag = "# manifest: ";
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (line.rfind(tag, 0) == 0) {
      try {
        table.manifest = json::parse(line.substr(tag.size()));
      } catch (const json::exception& e) {
        throw ValidationError(std::string("branch CSV: bad manifest: ") + e.what());
      }
      continue;
    }
    if (line[0] == '#') continue;
    if (header.empty()) {
      header = split_cells(line);
      continue;
    }
    const auto v = split_doubles(line);
    if (v.size() != header.size()) throw ValidationError("branch CSV: row width does not match header");
    if (table.manifest.is_null() || table.manifest["params"].is_null())
      throw ValidationError("branch CSV: missing manifest line");
    const FracParams p = params_from_json(table.manifest["params"]);
    std::vector<HarmonicIndex> idx;
    for (std::size_t c = 9; c < header.size(); ++c) {
      int k = 0, m = 0;
      if (std::sscanf(header[c].c_str(), "c_%d_%d", &k, &m) != 2) throw ValidationError("branch CSV: bad column " + header[c]);
      idx.push_back({k, m});
    }
    int K = 0;
    for (const auto& h : idx) K = std::max(K, h.k);
    BranchPoint bp;
    bp.r = v[0];
    bp.tau = v[1];
    bp.residual_sup = v[2];
    bp.residual_coeff = v[3];
    bp.odd_residual = v[4];
    bp.newton_iters = static_cast<int>(v[5]);
    bp.full_jacobian = v[6] != 0.0;
    bp.kbar_min = v[7];
    if (!std::isnan(v[8])) bp.negative_eigenvalues = static_cast<int>(v[8]);
    bp.shape = Shape::zero(p.N, K, true);
    if (bp.shape.indices() != idx) throw ValidationError("branch CSV: coefficient columns do not form an even basis");
    for (std::size_t c = 0; c < idx.size(); ++c) bp.shape.coeffs[c] = v[9 + c];
    table.points.push_back(std::move(bp));
  }
  if (header.empty()) throw ValidationError("branch CSV: no header");
  return table;
}

}  // namespace cnmc
