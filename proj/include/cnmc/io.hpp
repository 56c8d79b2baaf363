#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cnmc/expansion.hpp"
#include "cnmc/lattice.hpp"
#include "cnmc/solver.hpp"
#include "cnmc/sphere.hpp"
#include "cnmc/specfun.hpp"

namespace cnmc {

using json = nlohmann::ordered_json;

/// git-describe style version baked in at configure time.
std::string version_string();

json to_json(const FracParams& p);
json to_json(const Lattice& L);
json to_json(const Shape& s);
json to_json(const LatticeSumResult& r);
json to_json(const ExpansionData& d);
json to_json(const BranchPoint& bp);
json to_json(const ExpansionRow& row);

FracParams params_from_json(const json& j);
/// {"N":2,"basis":[[1,0],[0,1]]}; N defaults to `N` when absent.
Lattice lattice_from_json(const json& j, int N);
std::vector<std::vector<double>> basis_from_json(const json& j);
Shape shape_from_json(const json& j);

/// Params + lattice config. Accepts either {"N", "alpha", "beta", "basis"} at
/// top level or nested {"params": {...}, "lattice": {...}}.
struct RunConfig {
  FracParams params;
  std::optional<std::vector<std::vector<double>>> basis;
};
RunConfig config_from_json(const json& j);
json read_json_file(const std::string& path);

/// Reproducibility manifest: params, lattice, grid resolution, tolerances, version.
json manifest(const FracParams* params, const Lattice* L, std::optional<int> resolution, const json& tolerances);

/// Branch table: '#'-prefixed manifest line, then a header and one row per point.
void write_branch_csv(std::ostream& os, const std::vector<BranchPoint>& branch, const json& manifest);

struct BranchTable {
  json manifest;
  std::vector<BranchPoint> points;
};
BranchTable read_branch_csv(std::istream& is);

}  // namespace cnmc
