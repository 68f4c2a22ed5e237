#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "strathjb/dynamics.hpp"
#include "strathjb/geometry.hpp"
#include "strathjb/solver.hpp"

namespace strathjb::config {

struct StratumSpec {
  std::string name;
  int dim = 0;
  Vec basepoint;
  std::vector<Vec> tangent_basis;
  std::vector<geometry::HalfSpace> cell;
};

struct ScaleSpec {
  std::string kind = "none";  // none | affine | quadratic | sqrt_quadratic
  double a0 = 1.0;
  Vec coeff;
};

struct RegionSpec {
  std::string stratum;
  std::vector<dynamics::Generator> generators;
  ScaleSpec scale;
};

struct SpecificSpec {
  std::string stratum;
  std::vector<dynamics::Generator> generators;
};

struct FilippovSpec {
  double eps = 0.0;
  int samples_per_eps = 3;
};

struct TerminalSpec {
  std::string kind = "constant";  // distance | clipped_cone | constant | tabulated
  Vec center;
  double slope = 1.0;
  double cap = 0.0;
  double value = 0.0;
  Vec tab_lo, tab_dx;
  std::vector<std::size_t> tab_shape;
  std::vector<double> tab_values;
};

struct SolverParams {
  double dx = 0.1;
  double dt = 0.05;
  int threads = 1;
};

struct CheckParams {
  double tolerance = 0.0;  // 0 derives 10*(dx+dt)
  double sample_density = 8.0;
  double delta_target = 0.5;
  std::vector<double> eps_list;
  double filippov_tolerance = 0.1;
  unsigned seed = 0;
};

//! Parsed problem file. Holds the raw declared values; normalization
//! (unit normals, id assignment) happens when the problem is built.
struct ProblemConfig {
  std::string name;
  int dimension = 0;
  Vec box_lo, box_hi;
  std::vector<StratumSpec> strata;
  std::string mode = "hull_of_limits";  // or union_specific
  std::vector<RegionSpec> regions;
  std::vector<SpecificSpec> specific;
  std::optional<FilippovSpec> filippov;
  TerminalSpec terminal;
  double horizon = 1.0;
  double bound = 1.0;
  SolverParams solver;
  CheckParams checks;
};

//! Parse configuration text (JSON, // and /* */ comments allowed).
//! Diagnostics name the offending field path, e.g. "$.strata[2].basepoint".
ProblemConfig parse_config(const std::string& text);
ProblemConfig parse_config_file(const std::string& path);

//! Canonical serialization: two-space indented JSON with sorted keys;
//! serialize(parse(x)) is a fixed point.
nlohmann::json to_json(const ProblemConfig& cfg);
std::string serialize(const ProblemConfig& cfg);

//! Build the runtime problem: validates the geometry, resolves stratum
//! names, applies the Filippov block if present, and cross-checks the
//! declared bound against sampled dynamics.
solver::StratifiedProblem build_problem(const ProblemConfig& cfg);

//! Effective viscosity tolerance: the configured one, or 10*(dx+dt).
double effective_tolerance(const ProblemConfig& cfg);

//! Shipped example library. Every builtin's numeric values are artifact
//! defaults documented in its embedded config text.
ProblemConfig builtin_problem(const std::string& name);
std::vector<std::string> builtin_names();
//! The raw commented config text of a builtin (what `builtin` prints).
std::string builtin_text(const std::string& name);

}  // namespace strathjb::config
