#include "strathjb/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "strathjb/errors.hpp"

namespace strathjb::config {
namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
  throw ConfigError(path + ": " + msg);
}

const json& get(const json& j, const char* key, const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) fail(path, std::string("missing field '") + key + "'");
  return *it;
}

const json* get_opt(const json& j, const char* key) {
  if (!j.is_object()) return nullptr;
  auto it = j.find(key);
  return it == j.end() ? nullptr : &*it;
}

double as_number(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) fail(path, "must be finite");
  return v;
}

int as_int(const json& j, const std::string& path) {
  if (!j.is_number_integer()) fail(path, "expected an integer");
  return j.get<int>();
}

bool as_bool(const json& j, const std::string& path) {
  if (!j.is_boolean()) fail(path, "expected a boolean");
  return j.get<bool>();
}

std::string as_string(const json& j, const std::string& path) {
  if (!j.is_string()) fail(path, "expected a string");
  return j.get<std::string>();
}

Vec as_vec(const json& j, const std::string& path) {
  if (!j.is_array()) fail(path, "expected an array of numbers");
  Vec v;
  v.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i)
    v.push_back(as_number(j[i], path + "[" + std::to_string(i) + "]"));
  return v;
}

std::vector<Vec> as_vec_list(const json& j, const std::string& path) {
  if (!j.is_array()) fail(path, "expected an array of vectors");
  std::vector<Vec> out;
  for (std::size_t i = 0; i < j.size(); ++i)
    out.push_back(as_vec(j[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

std::vector<dynamics::Generator> parse_generators(const json& j,
                                                  const std::string& path) {
  if (!j.is_array() || j.empty()) fail(path, "expected a nonempty array");
  std::vector<dynamics::Generator> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string p = path + "[" + std::to_string(i) + "]";
    dynamics::Generator g;
    g.b = as_vec(get(j[i], "b", p), p + ".b");
    g.l = as_number(get(j[i], "l", p), p + ".l");
    out.push_back(std::move(g));
  }
  return out;
}

json generators_json(const std::vector<dynamics::Generator>& gens) {
  json arr = json::array();
  for (const auto& g : gens) arr.push_back({{"b", g.b}, {"l", g.l}});
  return arr;
}

dynamics::ScaleKind scale_kind(const std::string& kind,
                               const std::string& path) {
  if (kind == "none") return dynamics::ScaleKind::None;
  if (kind == "affine") return dynamics::ScaleKind::Affine;
  if (kind == "quadratic") return dynamics::ScaleKind::Quadratic;
  if (kind == "sqrt_quadratic") return dynamics::ScaleKind::SqrtQuadratic;
  fail(path, "unknown scale kind '" + kind + "'");
}

}  // namespace

ProblemConfig parse_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  const std::string R = "$";
  ProblemConfig cfg;
  cfg.name = as_string(get(root, "name", R), "$.name");
  cfg.dimension = as_int(get(root, "dimension", R), "$.dimension");
  if (cfg.dimension < 1 || cfg.dimension > 4)
    fail("$.dimension", "supported dimensions are 1..4");

  const json& box = get(root, "box", R);
  cfg.box_lo = as_vec(get(box, "lo", "$.box"), "$.box.lo");
  cfg.box_hi = as_vec(get(box, "hi", "$.box"), "$.box.hi");

  const json& strata = get(root, "strata", R);
  if (!strata.is_array() || strata.empty())
    fail("$.strata", "expected a nonempty array");
  for (std::size_t i = 0; i < strata.size(); ++i) {
    const std::string p = "$.strata[" + std::to_string(i) + "]";
    StratumSpec s;
    s.name = as_string(get(strata[i], "name", p), p + ".name");
    s.dim = as_int(get(strata[i], "dim", p), p + ".dim");
    s.basepoint = as_vec(get(strata[i], "basepoint", p), p + ".basepoint");
    s.tangent_basis =
        as_vec_list(get(strata[i], "tangent_basis", p), p + ".tangent_basis");
    const json& cell = get(strata[i], "cell", p);
    if (!cell.is_array()) fail(p + ".cell", "expected an array");
    for (std::size_t c = 0; c < cell.size(); ++c) {
      const std::string pc = p + ".cell[" + std::to_string(c) + "]";
      geometry::HalfSpace h;
      h.normal = as_vec(get(cell[c], "normal", pc), pc + ".normal");
      h.offset = as_number(get(cell[c], "offset", pc), pc + ".offset");
      h.greater = as_bool(get(cell[c], "greater", pc), pc + ".greater");
      s.cell.push_back(std::move(h));
    }
    cfg.strata.push_back(std::move(s));
  }

  const json& dyn = get(root, "dynamics", R);
  cfg.mode = as_string(get(dyn, "mode", "$.dynamics"), "$.dynamics.mode");
  if (cfg.mode != "hull_of_limits" && cfg.mode != "union_specific")
    fail("$.dynamics.mode",
         "expected 'hull_of_limits' or 'union_specific'");
  const json& regions = get(dyn, "regions", "$.dynamics");
  if (!regions.is_array() || regions.empty())
    fail("$.dynamics.regions", "expected a nonempty array");
  for (std::size_t i = 0; i < regions.size(); ++i) {
    const std::string p = "$.dynamics.regions[" + std::to_string(i) + "]";
    RegionSpec r;
    r.stratum = as_string(get(regions[i], "stratum", p), p + ".stratum");
    r.generators =
        parse_generators(get(regions[i], "generators", p), p + ".generators");
    if (const json* sc = get_opt(regions[i], "scale")) {
      r.scale.kind = as_string(get(*sc, "kind", p + ".scale"),
                               p + ".scale.kind");
      scale_kind(r.scale.kind, p + ".scale.kind");
      if (const json* a0 = get_opt(*sc, "a0"))
        r.scale.a0 = as_number(*a0, p + ".scale.a0");
      if (const json* co = get_opt(*sc, "coeff"))
        r.scale.coeff = as_vec(*co, p + ".scale.coeff");
    }
    cfg.regions.push_back(std::move(r));
  }
  if (const json* spec = get_opt(dyn, "specific")) {
    if (!spec->is_array()) fail("$.dynamics.specific", "expected an array");
    for (std::size_t i = 0; i < spec->size(); ++i) {
      const std::string p = "$.dynamics.specific[" + std::to_string(i) + "]";
      SpecificSpec s;
      s.stratum = as_string(get((*spec)[i], "stratum", p), p + ".stratum");
      s.generators = parse_generators(get((*spec)[i], "generators", p),
                                      p + ".generators");
      cfg.specific.push_back(std::move(s));
    }
  }
  if (const json* fil = get_opt(dyn, "filippov")) {
    FilippovSpec f;
    f.eps = as_number(get(*fil, "eps", "$.dynamics.filippov"),
                      "$.dynamics.filippov.eps");
    if (const json* m = get_opt(*fil, "samples_per_eps"))
      f.samples_per_eps = as_int(*m, "$.dynamics.filippov.samples_per_eps");
    cfg.filippov = f;
  }

  const json& term = get(root, "terminal_cost", R);
  cfg.terminal.kind =
      as_string(get(term, "kind", "$.terminal_cost"), "$.terminal_cost.kind");
  const std::string tk = cfg.terminal.kind;
  if (tk == "distance") {
    cfg.terminal.center =
        as_vec(get(term, "center", "$.terminal_cost"), "$.terminal_cost.center");
  } else if (tk == "clipped_cone") {
    cfg.terminal.center =
        as_vec(get(term, "center", "$.terminal_cost"), "$.terminal_cost.center");
    cfg.terminal.slope = as_number(get(term, "slope", "$.terminal_cost"),
                                   "$.terminal_cost.slope");
    cfg.terminal.cap = as_number(get(term, "cap", "$.terminal_cost"),
                                 "$.terminal_cost.cap");
  } else if (tk == "constant") {
    cfg.terminal.value = as_number(get(term, "value", "$.terminal_cost"),
                                   "$.terminal_cost.value");
  } else if (tk == "tabulated") {
    cfg.terminal.tab_lo =
        as_vec(get(term, "lo", "$.terminal_cost"), "$.terminal_cost.lo");
    cfg.terminal.tab_dx =
        as_vec(get(term, "dx", "$.terminal_cost"), "$.terminal_cost.dx");
    const json& sh = get(term, "shape", "$.terminal_cost");
    if (!sh.is_array()) fail("$.terminal_cost.shape", "expected an array");
    for (std::size_t i = 0; i < sh.size(); ++i) {
      const int v = as_int(sh[i], "$.terminal_cost.shape[" +
                                      std::to_string(i) + "]");
      if (v < 1) fail("$.terminal_cost.shape", "entries must be >= 1");
      cfg.terminal.tab_shape.push_back(static_cast<std::size_t>(v));
    }
    const json& vals = get(term, "values", "$.terminal_cost");
    if (!vals.is_array()) fail("$.terminal_cost.values", "expected an array");
    for (std::size_t i = 0; i < vals.size(); ++i)
      cfg.terminal.tab_values.push_back(as_number(
          vals[i], "$.terminal_cost.values[" + std::to_string(i) + "]"));
  } else {
    fail("$.terminal_cost.kind", "unknown kind '" + tk + "'");
  }

  cfg.horizon = as_number(get(root, "horizon", R), "$.horizon");
  cfg.bound = as_number(get(root, "bound", R), "$.bound");

  const json& sol = get(root, "solver", R);
  cfg.solver.dx = as_number(get(sol, "dx", "$.solver"), "$.solver.dx");
  cfg.solver.dt = as_number(get(sol, "dt", "$.solver"), "$.solver.dt");
  if (const json* th = get_opt(sol, "threads"))
    cfg.solver.threads = as_int(*th, "$.solver.threads");

  if (const json* checks = get_opt(root, "checks")) {
    if (const json* v = get_opt(*checks, "tolerance"))
      cfg.checks.tolerance = as_number(*v, "$.checks.tolerance");
    if (const json* v = get_opt(*checks, "sample_density"))
      cfg.checks.sample_density = as_number(*v, "$.checks.sample_density");
    if (const json* v = get_opt(*checks, "delta_target"))
      cfg.checks.delta_target = as_number(*v, "$.checks.delta_target");
    if (const json* v = get_opt(*checks, "eps_list"))
      cfg.checks.eps_list = as_vec(*v, "$.checks.eps_list");
    if (const json* v = get_opt(*checks, "filippov_tolerance"))
      cfg.checks.filippov_tolerance =
          as_number(*v, "$.checks.filippov_tolerance");
    if (const json* v = get_opt(*checks, "seed")) {
      const int s = as_int(*v, "$.checks.seed");
      if (s < 0) fail("$.checks.seed", "must be nonnegative");
      cfg.checks.seed = static_cast<unsigned>(s);
    }
  }
  return cfg;
}

ProblemConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

nlohmann::json to_json(const ProblemConfig& cfg) {
  json j;
  j["name"] = cfg.name;
  j["dimension"] = cfg.dimension;
  j["box"] = {{"lo", cfg.box_lo}, {"hi", cfg.box_hi}};
  json strata = json::array();
  for (const StratumSpec& s : cfg.strata) {
    json cell = json::array();
    for (const geometry::HalfSpace& h : s.cell)
      cell.push_back({{"normal", h.normal},
                      {"offset", h.offset},
                      {"greater", h.greater}});
    strata.push_back({{"name", s.name},
                      {"dim", s.dim},
                      {"basepoint", s.basepoint},
                      {"tangent_basis", s.tangent_basis},
                      {"cell", std::move(cell)}});
  }
  j["strata"] = std::move(strata);

  json regions = json::array();
  for (const RegionSpec& r : cfg.regions) {
    json jr = {{"stratum", r.stratum},
               {"generators", generators_json(r.generators)}};
    if (r.scale.kind != "none") {
      jr["scale"] = {{"kind", r.scale.kind},
                     {"a0", r.scale.a0},
                     {"coeff", r.scale.coeff}};
    }
    regions.push_back(std::move(jr));
  }
  json specific = json::array();
  for (const SpecificSpec& s : cfg.specific)
    specific.push_back(
        {{"stratum", s.stratum}, {"generators", generators_json(s.generators)}});
  json dyn = {{"mode", cfg.mode},
              {"regions", std::move(regions)},
              {"specific", std::move(specific)}};
  if (cfg.filippov)
    dyn["filippov"] = {{"eps", cfg.filippov->eps},
                       {"samples_per_eps", cfg.filippov->samples_per_eps}};
  j["dynamics"] = std::move(dyn);

  json term;
  term["kind"] = cfg.terminal.kind;
  if (cfg.terminal.kind == "distance") {
    term["center"] = cfg.terminal.center;
  } else if (cfg.terminal.kind == "clipped_cone") {
    term["center"] = cfg.terminal.center;
    term["slope"] = cfg.terminal.slope;
    term["cap"] = cfg.terminal.cap;
  } else if (cfg.terminal.kind == "constant") {
    term["value"] = cfg.terminal.value;
  } else {
    term["lo"] = cfg.terminal.tab_lo;
    term["dx"] = cfg.terminal.tab_dx;
    term["shape"] = cfg.terminal.tab_shape;
    term["values"] = cfg.terminal.tab_values;
  }
  j["terminal_cost"] = std::move(term);

  j["horizon"] = cfg.horizon;
  j["bound"] = cfg.bound;
  j["solver"] = {{"dx", cfg.solver.dx},
                 {"dt", cfg.solver.dt},
                 {"threads", cfg.solver.threads}};
  j["checks"] = {{"tolerance", cfg.checks.tolerance},
                 {"sample_density", cfg.checks.sample_density},
                 {"delta_target", cfg.checks.delta_target},
                 {"eps_list", cfg.checks.eps_list},
                 {"filippov_tolerance", cfg.checks.filippov_tolerance},
                 {"seed", cfg.checks.seed}};
  return j;
}

std::string serialize(const ProblemConfig& cfg) {
  return to_json(cfg).dump(2) + "\n";
}

double effective_tolerance(const ProblemConfig& cfg) {
  if (cfg.checks.tolerance > 0.0) return cfg.checks.tolerance;
  return 10.0 * (cfg.solver.dx + cfg.solver.dt);
}

solver::StratifiedProblem build_problem(const ProblemConfig& cfg) {
  const std::size_t n = static_cast<std::size_t>(cfg.dimension);
  if (cfg.box_lo.size() != n || cfg.box_hi.size() != n)
    fail("$.box", "lo/hi must have 'dimension' entries");

  std::map<std::string, int> ids;
  std::vector<geometry::Stratum> strata;
  for (std::size_t i = 0; i < cfg.strata.size(); ++i) {
    const StratumSpec& s = cfg.strata[i];
    if (!ids.emplace(s.name, static_cast<int>(i)).second)
      fail("$.strata[" + std::to_string(i) + "].name",
           "duplicate stratum name '" + s.name + "'");
    geometry::Stratum g;
    g.name = s.name;
    g.dim = s.dim;
    g.basepoint = s.basepoint;
    g.tangent_basis = s.tangent_basis;
    g.cell = s.cell;
    strata.push_back(std::move(g));
  }
  geometry::FlatStratification fs(cfg.dimension,
                                  geometry::Box{cfg.box_lo, cfg.box_hi},
                                  std::move(strata));

  auto stratum_id = [&](const std::string& name, const std::string& path) {
    auto it = ids.find(name);
    if (it == ids.end()) fail(path, "unknown stratum '" + name + "'");
    return it->second;
  };

  dynamics::BLMap map;
  map.mode = cfg.mode == "union_specific"
                 ? dynamics::ClosureMode::HullOfLimitsUnionSpecific
                 : dynamics::ClosureMode::HullOfLimits;
  for (std::size_t i = 0; i < cfg.regions.size(); ++i) {
    const RegionSpec& r = cfg.regions[i];
    const std::string p = "$.dynamics.regions[" + std::to_string(i) + "]";
    const int id = stratum_id(r.stratum, p + ".stratum");
    if (fs.stratum(id).dim != cfg.dimension)
      fail(p + ".stratum", "'" + r.stratum + "' is not a top stratum");
    if (map.regions.count(id))
      fail(p + ".stratum", "duplicate rule for '" + r.stratum + "'");
    for (const auto& g : r.generators)
      if (g.b.size() != n)
        fail(p + ".generators", "velocity dimension mismatch");
    dynamics::RegionRule rule;
    rule.base = dynamics::GeneratorSet(r.generators);
    rule.scale.kind = scale_kind(r.scale.kind, p + ".scale.kind");
    rule.scale.a0 = r.scale.a0;
    rule.scale.coeff = r.scale.coeff;
    if (rule.scale.kind != dynamics::ScaleKind::None &&
        rule.scale.coeff.size() != n)
      fail(p + ".scale.coeff", "must have 'dimension' entries");
    map.regions.emplace(id, std::move(rule));
  }
  for (int id : fs.top_strata())
    if (!map.regions.count(id))
      fail("$.dynamics.regions",
           "no rule for top stratum '" + fs.stratum(id).name + "'");

  if (!cfg.specific.empty() && cfg.mode != "union_specific")
    fail("$.dynamics.specific",
         "specific sets require mode 'union_specific'");
  for (std::size_t i = 0; i < cfg.specific.size(); ++i) {
    const SpecificSpec& s = cfg.specific[i];
    const std::string p = "$.dynamics.specific[" + std::to_string(i) + "]";
    const int id = stratum_id(s.stratum, p + ".stratum");
    if (map.specific.count(id))
      fail(p + ".stratum", "duplicate specific set for '" + s.stratum + "'");
    for (const auto& g : s.generators)
      if (g.b.size() != n)
        fail(p + ".generators", "velocity dimension mismatch");
    map.specific.emplace(id, dynamics::GeneratorSet(s.generators));
  }

  solver::TerminalCost g = solver::TerminalCost::constant(0.0);
  const TerminalSpec& t = cfg.terminal;
  if (t.kind == "distance") {
    if (t.center.size() != n) fail("$.terminal_cost.center", "dimension mismatch");
    g = solver::TerminalCost::distance_to_point(t.center);
  } else if (t.kind == "clipped_cone") {
    if (t.center.size() != n) fail("$.terminal_cost.center", "dimension mismatch");
    g = solver::TerminalCost::clipped_cone(t.center, t.slope, t.cap);
  } else if (t.kind == "constant") {
    g = solver::TerminalCost::constant(t.value);
  } else {
    g = solver::TerminalCost::tabulated(t.tab_lo, t.tab_dx, t.tab_shape,
                                        t.tab_values);
  }

  if (!(cfg.horizon > 0.0) || !std::isfinite(cfg.horizon))
    fail("$.horizon", "must be positive and finite");
  if (!(cfg.bound > 0.0) || !std::isfinite(cfg.bound))
    fail("$.bound", "must be positive and finite");
  if (!(cfg.solver.dx > 0.0)) fail("$.solver.dx", "must be positive");
  if (!(cfg.solver.dt > 0.0)) fail("$.solver.dt", "must be positive");
  if (cfg.solver.threads < 1) fail("$.solver.threads", "must be >= 1");

  // Declared bound must dominate the sampled dynamics (velocity and cost).
  {
    const double density =
        std::max(2.0, cfg.checks.sample_density) / std::max(1.0, fs.box().diameter());
    double worst = 0.0;
    for (const geometry::Stratum& s : fs.strata())
      for (const Vec& x : geometry::sample_stratum(fs, s, density, 32)) {
        const auto gs = dynamics::evaluate_at(map, fs, s, x, 0.0);
        worst = std::max({worst, gs.max_velocity_norm(), gs.max_cost_abs()});
      }
    if (worst > cfg.bound * (1.0 + 1e-9))
      fail("$.bound", "sampled dynamics reach " + std::to_string(worst) +
                          ", above the declared bound");
  }

  if (cfg.filippov) {
    map = dynamics::filippov_regularize(map, cfg.filippov->eps,
                                        cfg.filippov->samples_per_eps,
                                        cfg.horizon);
  }

  return solver::StratifiedProblem{std::move(fs), std::move(map), g,
                                   cfg.horizon, cfg.bound};
}

namespace {

// Shipped example library. Geometry follows the named construction; every
// number (speeds, costs, box, resolutions, tolerances) is an artifact
// default chosen for desk-scale runs, as commented inline.
const char* kCross = R"cfg({
  // Four open quadrants separated by the coordinate cross, with a point
  // stratum at the origin. Quadrant speeds alternate 1, 2, 1, 2, the
  // running cost is 1 everywhere, and the terminal cost measures distance
  // to the junction; these are artifact defaults.
  "name": "cross",
  "dimension": 2,
  "box": { "lo": [-1.0, -1.0], "hi": [1.0, 1.0] },
  "strata": [
    { "name": "q-pp", "dim": 2, "basepoint": [0.5, 0.5],
      "tangent_basis": [[1.0, 0.0], [0.0, 1.0]],
      "cell": [ { "normal": [1.0, 0.0], "offset": 0.0, "greater": true },
                { "normal": [0.0, 1.0], "offset": 0.0, "greater": true } ] },
    { "name": "q-mp", "dim": 2, "basepoint": [-0.5, 0.5],
      "tangent_basis": [[1.0, 0.0], [0.0, 1.0]],
      "cell": [ { "normal": [1.0, 0.0], "offset": 0.0, "greater": false },
                { "normal": [0.0, 1.0], "offset": 0.0, "greater": true } ] },
    { "name": "q-mm", "dim": 2, "basepoint": [-0.5, -0.5],
      "tangent_basis": [[1.0, 0.0], [0.0, 1.0]],
      "cell": [ { "normal": [1.0, 0.0], "offset": 0.0, "greater": false },
                { "normal": [0.0, 1.0], "offset": 0.0, "greater": false } ] },
    { "name": "q-pm", "dim": 2, "basepoint": [0.5, -0.5],
      "tangent_basis": [[1.0, 0.0], [0.0, 1.0]],
      "cell": [ { "normal": [1.0, 0.0], "offset": 0.0, "greater": true },
                { "normal": [0.0, 1.0], "offset": 0.0, "greater": false } ] },
    { "name": "axis-xp", "dim": 1, "basepoint": [0.5, 0.0],
      "tangent_basis": [[1.0, 0.0]],
      "cell": [ { "normal": [1.0, 0.0], "offset": 0.0, "greater": true } ] },
    { "name": "axis-xm", "dim": 1, "basepoint": [-0.5, 0.0],
      "tangent_basis": [[1.0, 0.0]],
      "cell": [ { "normal": [1.0, 0.0], "offset": 0.0, "greater": false } ] },
    { "name": "axis-yp", "dim": 1, "basepoint": [0.0, 0.5],
      "tangent_basis": [[0.0, 1.0]],
      "cell": [ { "normal": [0.0, 1.0], "offset": 0.0, "greater": true } ] },
    { "name": "axis-ym", "dim": 1, "basepoint": [0.0, -0.5],
      "tangent_basis": [[0.0, 1.0]],
      "cell": [ { "normal": [0.0, 1.0], "offset": 0.0, "greater": false } ] },
    { "name": "origin", "dim": 0, "basepoint": [0.0, 0.0],
      "tangent_basis": [], "cell": [] }
  ],
  "dynamics": {
    "mode": "hull_of_limits",
    "regions": [
      { "stratum": "q-pp", "generators": [
        { "b": [0.0, 0.0], "l": 1.0 },
        { "b": [1.0, 0.0], "l": 1.0 }, { "b": [-1.0, 0.0], "l": 1.0 },
        { "b": [0.0, 1.0], "l": 1.0 }, { "b": [0.0, -1.0], "l": 1.0 } ] },
      { "stratum": "q-mp", "generators": [
        { "b": [0.0, 0.0], "l": 1.0 },
        { "b": [2.0, 0.0], "l": 1.0 }, { "b": [-2.0, 0.0], "l": 1.0 },
        { "b": [0.0, 2.0], "l": 1.0 }, { "b": [0.0, -2.0], "l": 1.0 } ] },
      { "stratum": "q-mm", "generators": [
        { "b": [0.0, 0.0], "l": 1.0 },
        { "b": [1.0, 0.0], "l": 1.0 }, { "b": [-1.0, 0.0], "l": 1.0 },
        { "b": [0.0, 1.0], "l": 1.0 }, { "b": [0.0, -1.0], "l": 1.0 } ] },
      { "stratum": "q-pm", "generators": [
        { "b": [0.0, 0.0], "l": 1.0 },
        { "b": [2.0, 0.0], "l": 1.0 }, { "b": [-2.0, 0.0], "l": 1.0 },
        { "b": [0.0, 2.0], "l": 1.0 }, { "b": [0.0, -2.0], "l": 1.0 } ] }
    ],
    "specific": []
  },
  "terminal_cost": { "kind": "distance", "center": [0.0, 0.0] },
  "horizon": 1.0,
  "bound": 2.0,
  "solver": { "dx": 0.02, "dt": 0.01, "threads": 1 },
  "checks": { "tolerance": 0.3, "sample_density": 8.0, "delta_target": 0.7,
              "eps_list": [], "filippov_tolerance": 0.1, "seed": 0 }
})cfg";

const char* kTwoSpeed = R"cfg({
  // One-dimensional free eikonal problem: speed 1 on the left half line,
  // speed 2 on the right, no running cost, target point at 1. Artifact
  // default resolutions keep the CFL bound tight.
  "name": "two-speed-1d",
  "dimension": 1,
  "box": { "lo": [-2.0], "hi": [2.0] },
  "strata": [
    { "name": "left", "dim": 1, "basepoint": [-1.0], "tangent_basis": [[1.0]],
      "cell": [ { "normal": [1.0], "offset": 0.0, "greater": false } ] },
    { "name": "right", "dim": 1, "basepoint": [1.0], "tangent_basis": [[1.0]],
      "cell": [ { "normal": [1.0], "offset": 0.0, "greater": true } ] },
    { "name": "junction", "dim": 0, "basepoint": [0.0],
      "tangent_basis": [], "cell": [] }
  ],
  "dynamics": {
    "mode": "hull_of_limits",
    "regions": [
      { "stratum": "left", "generators": [
        { "b": [-1.0], "l": 0.0 }, { "b": [0.0], "l": 0.0 },
        { "b": [1.0], "l": 0.0 } ] },
      { "stratum": "right", "generators": [
        { "b": [-2.0], "l": 0.0 }, { "b": [0.0], "l": 0.0 },
        { "b": [2.0], "l": 0.0 } ] }
    ],
    "specific": []
  },
  "terminal_cost": { "kind": "distance", "center": [1.0] },
  "horizon": 1.0,
  "bound": 2.0,
  "solver": { "dx": 0.01, "dt": 0.005, "threads": 1 },
  "checks": { "tolerance": 0.15, "sample_density": 16.0, "delta_target": 1.0,
              "eps_list": [], "filippov_tolerance": 0.1, "seed": 0 }
})cfg";

const char* kTwoCost = R"cfg({
  // One-dimensional interface problem with a running-cost jump: speed set
  // {-1, 0, 1} everywhere, cost 2 left of 0 and 1 right of 0, zero terminal
  // cost. The exact value is t + min(|x|, t) left of 0 and t right of it.
  // Resolutions and the regularization ladder are artifact defaults.
  "name": "two-cost-1d",
  "dimension": 1,
  "box": { "lo": [-2.0], "hi": [2.0] },
  "strata": [
    { "name": "left", "dim": 1, "basepoint": [-1.0], "tangent_basis": [[1.0]],
      "cell": [ { "normal": [1.0], "offset": 0.0, "greater": false } ] },
    { "name": "right", "dim": 1, "basepoint": [1.0], "tangent_basis": [[1.0]],
      "cell": [ { "normal": [1.0], "offset": 0.0, "greater": true } ] },
    { "name": "junction", "dim": 0, "basepoint": [0.0],
      "tangent_basis": [], "cell": [] }
  ],
  "dynamics": {
    "mode": "hull_of_limits",
    "regions": [
      { "stratum": "left", "generators": [
        { "b": [-1.0], "l": 2.0 }, { "b": [0.0], "l": 2.0 },
        { "b": [1.0], "l": 2.0 } ] },
      { "stratum": "right", "generators": [
        { "b": [-1.0], "l": 1.0 }, { "b": [0.0], "l": 1.0 },
        { "b": [1.0], "l": 1.0 } ] }
    ],
    "specific": []
  },
  "terminal_cost": { "kind": "constant", "value": 0.0 },
  "horizon": 1.0,
  "bound": 2.0,
  "solver": { "dx": 0.01, "dt": 0.005, "threads": 1 },
  "checks": { "tolerance": 0.15, "sample_density": 16.0, "delta_target": 1.0,
              "eps_list": [0.4, 0.2, 0.1], "filippov_tolerance": 0.1,
              "seed": 0 }
})cfg";

const char* kLineR3 = R"cfg({
  // A line of discontinuity along the x3-axis. Away from the line the
  // control set is an octagonal fan of speed 1.6 in the (x1,x2) plane plus
  // unit axial motion, with unit running cost; the line itself carries a
  // cheaper specific problem. Covering the complement of the line with
  // convex cells introduces four slabs and four interface walls whose
  // dynamics agree with their neighbors, so the walls are fictitious.
  // All numeric values are artifact defaults.
  "name": "line-r3",
  "dimension": 3,
  "box": { "lo": [-1.0, -1.0, -1.0], "hi": [1.0, 1.0, 1.0] },
  "strata": [
    { "name": "slab-pp", "dim": 3, "basepoint": [0.5, 0.5, 0.0],
      "tangent_basis": [[1.0,0.0,0.0],[0.0,1.0,0.0],[0.0,0.0,1.0]],
      "cell": [ { "normal": [1.0,0.0,0.0], "offset": 0.0, "greater": true },
                { "normal": [0.0,1.0,0.0], "offset": 0.0, "greater": true } ] },
    { "name": "slab-mp", "dim": 3, "basepoint": [-0.5, 0.5, 0.0],
      "tangent_basis": [[1.0,0.0,0.0],[0.0,1.0,0.0],[0.0,0.0,1.0]],
      "cell": [ { "normal": [1.0,0.0,0.0], "offset": 0.0, "greater": false },
                { "normal": [0.0,1.0,0.0], "offset": 0.0, "greater": true } ] },
    { "name": "slab-mm", "dim": 3, "basepoint": [-0.5, -0.5, 0.0],
      "tangent_basis": [[1.0,0.0,0.0],[0.0,1.0,0.0],[0.0,0.0,1.0]],
      "cell": [ { "normal": [1.0,0.0,0.0], "offset": 0.0, "greater": false },
                { "normal": [0.0,1.0,0.0], "offset": 0.0, "greater": false } ] },
    { "name": "slab-pm", "dim": 3, "basepoint": [0.5, -0.5, 0.0],
      "tangent_basis": [[1.0,0.0,0.0],[0.0,1.0,0.0],[0.0,0.0,1.0]],
      "cell": [ { "normal": [1.0,0.0,0.0], "offset": 0.0, "greater": true },
                { "normal": [0.0,1.0,0.0], "offset": 0.0, "greater": false } ] },
    { "name": "wall-yp", "dim": 2, "basepoint": [0.0, 0.5, 0.0],
      "tangent_basis": [[0.0,1.0,0.0],[0.0,0.0,1.0]],
      "cell": [ { "normal": [0.0,1.0,0.0], "offset": 0.0, "greater": true } ] },
    { "name": "wall-ym", "dim": 2, "basepoint": [0.0, -0.5, 0.0],
      "tangent_basis": [[0.0,1.0,0.0],[0.0,0.0,1.0]],
      "cell": [ { "normal": [0.0,1.0,0.0], "offset": 0.0, "greater": false } ] },
    { "name": "wall-xp", "dim": 2, "basepoint": [0.5, 0.0, 0.0],
      "tangent_basis": [[1.0,0.0,0.0],[0.0,0.0,1.0]],
      "cell": [ { "normal": [1.0,0.0,0.0], "offset": 0.0, "greater": true } ] },
    { "name": "wall-xm", "dim": 2, "basepoint": [-0.5, 0.0, 0.0],
      "tangent_basis": [[1.0,0.0,0.0],[0.0,0.0,1.0]],
      "cell": [ { "normal": [1.0,0.0,0.0], "offset": 0.0, "greater": false } ] },
    { "name": "gamma", "dim": 1, "basepoint": [0.0, 0.0, 0.0],
      "tangent_basis": [[0.0,0.0,1.0]], "cell": [] }
  ],
  "dynamics": {
    "mode": "union_specific",
    "regions": [
      { "stratum": "slab-pp", "generators": [
        { "b": [0.0, 0.0, 0.0], "l": 1.0 },
        { "b": [1.6, 0.0, 0.0], "l": 1.0 }, { "b": [-1.6, 0.0, 0.0], "l": 1.0 },
        { "b": [0.0, 1.6, 0.0], "l": 1.0 }, { "b": [0.0, -1.6, 0.0], "l": 1.0 },
        { "b": [1.1313708498984762, 1.1313708498984762, 0.0], "l": 1.0 },
        { "b": [-1.1313708498984762, 1.1313708498984762, 0.0], "l": 1.0 },
        { "b": [-1.1313708498984762, -1.1313708498984762, 0.0], "l": 1.0 },
        { "b": [1.1313708498984762, -1.1313708498984762, 0.0], "l": 1.0 },
        { "b": [0.0, 0.0, 1.0], "l": 1.0 }, { "b": [0.0, 0.0, -1.0], "l": 1.0 } ] },
      { "stratum": "slab-mp", "generators": [
        { "b": [0.0, 0.0, 0.0], "l": 1.0 },
        { "b": [1.6, 0.0, 0.0], "l": 1.0 }, { "b": [-1.6, 0.0, 0.0], "l": 1.0 },
        { "b": [0.0, 1.6, 0.0], "l": 1.0 }, { "b": [0.0, -1.6, 0.0], "l": 1.0 },
        { "b": [1.1313708498984762, 1.1313708498984762, 0.0], "l": 1.0 },
        { "b": [-1.1313708498984762, 1.1313708498984762, 0.0], "l": 1.0 },
        { "b": [-1.1313708498984762, -1.1313708498984762, 0.0], "l": 1.0 },
        { "b": [1.1313708498984762, -1.1313708498984762, 0.0], "l": 1.0 },
        { "b": [0.0, 0.0, 1.0], "l": 1.0 }, { "b": [0.0, 0.0, -1.0], "l": 1.0 } ] },
      { "stratum": "slab-mm", "generators": [
        { "b": [0.0, 0.0, 0.0], "l": 1.0 },
        { "b": [1.6, 0.0, 0.0], "l": 1.0 }, { "b": [-1.6, 0.0, 0.0], "l": 1.0 },
        { "b": [0.0, 1.6, 0.0], "l": 1.0 }, { "b": [0.0, -1.6, 0.0], "l": 1.0 },
        { "b": [1.1313708498984762, 1.1313708498984762, 0.0], "l": 1.0 },
        { "b": [-1.1313708498984762, 1.1313708498984762, 0.0], "l": 1.0 },
        { "b": [-1.1313708498984762, -1.1313708498984762, 0.0], "l": 1.0 },
        { "b": [1.1313708498984762, -1.1313708498984762, 0.0], "l": 1.0 },
        { "b": [0.0, 0.0, 1.0], "l": 1.0 }, { "b": [0.0, 0.0, -1.0], "l": 1.0 } ] },
      { "stratum": "slab-pm", "generators": [
        { "b": [0.0, 0.0, 0.0], "l": 1.0 },
        { "b": [1.6, 0.0, 0.0], "l": 1.0 }, { "b": [-1.6, 0.0, 0.0], "l": 1.0 },
        { "b": [0.0, 1.6, 0.0], "l": 1.0 }, { "b": [0.0, -1.6, 0.0], "l": 1.0 },
        { "b": [1.1313708498984762, 1.1313708498984762, 0.0], "l": 1.0 },
        { "b": [-1.1313708498984762, 1.1313708498984762, 0.0], "l": 1.0 },
        { "b": [-1.1313708498984762, -1.1313708498984762, 0.0], "l": 1.0 },
        { "b": [1.1313708498984762, -1.1313708498984762, 0.0], "l": 1.0 },
        { "b": [0.0, 0.0, 1.0], "l": 1.0 }, { "b": [0.0, 0.0, -1.0], "l": 1.0 } ] }
    ],
    "specific": [
      { "stratum": "gamma", "generators": [
        { "b": [0.0, 0.0, 1.0], "l": 0.25 },
        { "b": [0.0, 0.0, -1.0], "l": 0.25 },
        { "b": [0.0, 0.0, 0.0], "l": 0.3 } ] }
    ]
  },
  "terminal_cost": { "kind": "distance", "center": [0.5, 0.5, 0.5] },
  "horizon": 1.0,
  "bound": 2.0,
  "solver": { "dx": 0.1, "dt": 0.05, "threads": 1 },
  "checks": { "tolerance": 1.5, "sample_density": 6.0, "delta_target": 1.0,
              "eps_list": [], "filippov_tolerance": 0.1, "seed": 0 }
})cfg";

const char* kFigure1 = R"cfg({
  // Half-plane-and-axes stratification: the vertical half plane
  // {x2=0, x3>0}, the four coordinate half axes in the (x1,x2) plane, and
  // the origin. The x2 half axes puncture the open half spaces, which the
  // point-set semantics (stratum = geometric piece minus lower strata)
  // renders disjoint. The lower half plane {x2=0, x3<0} completes the
  // covering of the plane {x2=0}; its dynamics agree with both neighbors,
  // so it is a fictitious interface. Specific cheaper control problems sit
  // on the upper half plane, the half axes and the origin. All numeric
  // values are artifact defaults.
  "name": "figure1-r3",
  "dimension": 3,
  "box": { "lo": [-1.0, -1.0, -1.0], "hi": [1.0, 1.0, 1.0] },
  "strata": [
    { "name": "top-p", "dim": 3, "basepoint": [0.3, 0.6, 0.2],
      "tangent_basis": [[1.0,0.0,0.0],[0.0,1.0,0.0],[0.0,0.0,1.0]],
      "cell": [ { "normal": [0.0,1.0,0.0], "offset": 0.0, "greater": true } ] },
    { "name": "top-m", "dim": 3, "basepoint": [0.3, -0.6, 0.2],
      "tangent_basis": [[1.0,0.0,0.0],[0.0,1.0,0.0],[0.0,0.0,1.0]],
      "cell": [ { "normal": [0.0,1.0,0.0], "offset": 0.0, "greater": false } ] },
    { "name": "plane-up", "dim": 2, "basepoint": [0.2, 0.0, 0.5],
      "tangent_basis": [[1.0,0.0,0.0],[0.0,0.0,1.0]],
      "cell": [ { "normal": [0.0,0.0,1.0], "offset": 0.0, "greater": true } ] },
    { "name": "plane-down", "dim": 2, "basepoint": [0.2, 0.0, -0.5],
      "tangent_basis": [[1.0,0.0,0.0],[0.0,0.0,1.0]],
      "cell": [ { "normal": [0.0,0.0,1.0], "offset": 0.0, "greater": false } ] },
    { "name": "axis1-p", "dim": 1, "basepoint": [0.5, 0.0, 0.0],
      "tangent_basis": [[1.0,0.0,0.0]],
      "cell": [ { "normal": [1.0,0.0,0.0], "offset": 0.0, "greater": true } ] },
    { "name": "axis1-m", "dim": 1, "basepoint": [-0.5, 0.0, 0.0],
      "tangent_basis": [[1.0,0.0,0.0]],
      "cell": [ { "normal": [1.0,0.0,0.0], "offset": 0.0, "greater": false } ] },
    { "name": "axis2-p", "dim": 1, "basepoint": [0.0, 0.5, 0.0],
      "tangent_basis": [[0.0,1.0,0.0]],
      "cell": [ { "normal": [0.0,1.0,0.0], "offset": 0.0, "greater": true } ] },
    { "name": "axis2-m", "dim": 1, "basepoint": [0.0, -0.5, 0.0],
      "tangent_basis": [[0.0,1.0,0.0]],
      "cell": [ { "normal": [0.0,1.0,0.0], "offset": 0.0, "greater": false } ] },
    { "name": "origin", "dim": 0, "basepoint": [0.0, 0.0, 0.0],
      "tangent_basis": [], "cell": [] }
  ],
  "dynamics": {
    "mode": "union_specific",
    "regions": [
      { "stratum": "top-p", "generators": [
        { "b": [0.0, 0.0, 0.0], "l": 1.0 },
        { "b": [1.5, 0.0, 0.0], "l": 1.0 }, { "b": [-1.5, 0.0, 0.0], "l": 1.0 },
        { "b": [0.0, 1.5, 0.0], "l": 1.0 }, { "b": [0.0, -1.5, 0.0], "l": 1.0 },
        { "b": [0.0, 0.0, 1.5], "l": 1.0 }, { "b": [0.0, 0.0, -1.5], "l": 1.0 } ] },
      { "stratum": "top-m", "generators": [
        { "b": [0.0, 0.0, 0.0], "l": 1.0 },
        { "b": [1.5, 0.0, 0.0], "l": 1.0 }, { "b": [-1.5, 0.0, 0.0], "l": 1.0 },
        { "b": [0.0, 1.5, 0.0], "l": 1.0 }, { "b": [0.0, -1.5, 0.0], "l": 1.0 },
        { "b": [0.0, 0.0, 1.5], "l": 1.0 }, { "b": [0.0, 0.0, -1.5], "l": 1.0 } ] }
    ],
    "specific": [
      { "stratum": "plane-up", "generators": [
        { "b": [2.0, 0.0, 0.0], "l": 0.4 }, { "b": [-2.0, 0.0, 0.0], "l": 0.4 },
        { "b": [0.0, 0.0, 2.0], "l": 0.4 }, { "b": [0.0, 0.0, -2.0], "l": 0.4 } ] },
      { "stratum": "axis1-p", "generators": [
        { "b": [1.8, 0.0, 0.0], "l": 0.2 }, { "b": [-1.8, 0.0, 0.0], "l": 0.2 } ] },
      { "stratum": "axis1-m", "generators": [
        { "b": [1.8, 0.0, 0.0], "l": 0.2 }, { "b": [-1.8, 0.0, 0.0], "l": 0.2 } ] },
      { "stratum": "axis2-p", "generators": [
        { "b": [0.0, 1.8, 0.0], "l": 0.2 }, { "b": [0.0, -1.8, 0.0], "l": 0.2 } ] },
      { "stratum": "axis2-m", "generators": [
        { "b": [0.0, 1.8, 0.0], "l": 0.2 }, { "b": [0.0, -1.8, 0.0], "l": 0.2 } ] },
      { "stratum": "origin", "generators": [
        { "b": [0.0, 0.0, 0.0], "l": 0.1 } ] }
    ]
  },
  "terminal_cost": { "kind": "distance", "center": [0.4, 0.0, 0.5] },
  "horizon": 1.0,
  "bound": 2.0,
  "solver": { "dx": 0.1, "dt": 0.05, "threads": 1 },
  "checks": { "tolerance": 1.5, "sample_density": 6.0, "delta_target": 0.8,
              "eps_list": [], "filippov_tolerance": 0.1, "seed": 0 }
})cfg";

const char* kForbidden = R"cfg({
  // Deliberately inadmissible decomposition: the half plane {x2=0, x3>0}
  // next to a one-dimensional layer made of the WHOLE x2-axis plus the two
  // open x1 half axes, with no point stratum. The origin lies on the
  // x2-axis and in the closure of the half plane, but the x2-axis is not
  // contained in that closure, so the frontier axiom fails there. The
  // lower half plane completes the convex-cell covering; the dynamics are
  // continuous everywhere. All numeric values are artifact defaults.
  "name": "forbidden-r3",
  "dimension": 3,
  "box": { "lo": [-1.0, -1.0, -1.0], "hi": [1.0, 1.0, 1.0] },
  "strata": [
    { "name": "top-p", "dim": 3, "basepoint": [0.3, 0.6, 0.2],
      "tangent_basis": [[1.0,0.0,0.0],[0.0,1.0,0.0],[0.0,0.0,1.0]],
      "cell": [ { "normal": [0.0,1.0,0.0], "offset": 0.0, "greater": true } ] },
    { "name": "top-m", "dim": 3, "basepoint": [0.3, -0.6, 0.2],
      "tangent_basis": [[1.0,0.0,0.0],[0.0,1.0,0.0],[0.0,0.0,1.0]],
      "cell": [ { "normal": [0.0,1.0,0.0], "offset": 0.0, "greater": false } ] },
    { "name": "plane-up", "dim": 2, "basepoint": [0.2, 0.0, 0.5],
      "tangent_basis": [[1.0,0.0,0.0],[0.0,0.0,1.0]],
      "cell": [ { "normal": [0.0,0.0,1.0], "offset": 0.0, "greater": true } ] },
    { "name": "plane-down", "dim": 2, "basepoint": [0.2, 0.0, -0.5],
      "tangent_basis": [[1.0,0.0,0.0],[0.0,0.0,1.0]],
      "cell": [ { "normal": [0.0,0.0,1.0], "offset": 0.0, "greater": false } ] },
    { "name": "axis2-full", "dim": 1, "basepoint": [0.0, 0.1, 0.0],
      "tangent_basis": [[0.0,1.0,0.0]], "cell": [] },
    { "name": "axis1-p", "dim": 1, "basepoint": [0.5, 0.0, 0.0],
      "tangent_basis": [[1.0,0.0,0.0]],
      "cell": [ { "normal": [1.0,0.0,0.0], "offset": 0.0, "greater": true } ] },
    { "name": "axis1-m", "dim": 1, "basepoint": [-0.5, 0.0, 0.0],
      "tangent_basis": [[1.0,0.0,0.0]],
      "cell": [ { "normal": [1.0,0.0,0.0], "offset": 0.0, "greater": false } ] }
  ],
  "dynamics": {
    "mode": "hull_of_limits",
    "regions": [
      { "stratum": "top-p", "generators": [
        { "b": [0.0, 0.0, 0.0], "l": 1.0 },
        { "b": [1.2, 0.0, 0.0], "l": 1.0 }, { "b": [-1.2, 0.0, 0.0], "l": 1.0 },
        { "b": [0.0, 1.2, 0.0], "l": 1.0 }, { "b": [0.0, -1.2, 0.0], "l": 1.0 },
        { "b": [0.0, 0.0, 1.2], "l": 1.0 }, { "b": [0.0, 0.0, -1.2], "l": 1.0 } ] },
      { "stratum": "top-m", "generators": [
        { "b": [0.0, 0.0, 0.0], "l": 1.0 },
        { "b": [1.2, 0.0, 0.0], "l": 1.0 }, { "b": [-1.2, 0.0, 0.0], "l": 1.0 },
        { "b": [0.0, 1.2, 0.0], "l": 1.0 }, { "b": [0.0, -1.2, 0.0], "l": 1.0 },
        { "b": [0.0, 0.0, 1.2], "l": 1.0 }, { "b": [0.0, 0.0, -1.2], "l": 1.0 } ] }
    ],
    "specific": []
  },
  "terminal_cost": { "kind": "distance", "center": [0.3, 0.2, 0.4] },
  "horizon": 1.0,
  "bound": 1.5,
  "solver": { "dx": 0.1, "dt": 0.05, "threads": 1 },
  "checks": { "tolerance": 1.5, "sample_density": 6.0, "delta_target": 0.8,
              "eps_list": [], "filippov_tolerance": 0.1, "seed": 0 }
})cfg";

const std::map<std::string, const char*>& builtin_registry() {
  static const std::map<std::string, const char*> reg = {
      {"cross", kCross},           {"two-speed-1d", kTwoSpeed},
      {"two-cost-1d", kTwoCost},   {"line-r3", kLineR3},
      {"figure1-r3", kFigure1},    {"forbidden-r3", kForbidden},
  };
  return reg;
}

}  // namespace

ProblemConfig builtin_problem(const std::string& name) {
  return parse_config(builtin_text(name));
}

std::vector<std::string> builtin_names() {
  std::vector<std::string> names;
  for (const auto& [name, text] : builtin_registry()) names.push_back(name);
  return names;
}

std::string builtin_text(const std::string& name) {
  const auto& reg = builtin_registry();
  auto it = reg.find(name);
  if (it == reg.end()) {
    std::string known;
    for (const auto& [n, t] : reg) known += (known.empty() ? "" : ", ") + n;
    throw UnknownBuiltinError("unknown builtin '" + name + "' (known: " +
                              known + ")");
  }
  return it->second;
}

}  // namespace strathjb::config
