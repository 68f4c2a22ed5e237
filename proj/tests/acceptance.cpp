// Acceptance harness: one line per criterion, exit code = number of
// failures. Tolerances are pinned inline next to each criterion.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "strathjb/config.hpp"
#include "strathjb/dynamics.hpp"
#include "strathjb/errors.hpp"
#include "strathjb/geometry.hpp"
#include "strathjb/hamiltonians.hpp"
#include "strathjb/solver.hpp"
#include "strathjb/verify.hpp"

using namespace strathjb;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

solver::StratifiedProblem builtin(const std::string& name) {
  return config::build_problem(config::builtin_problem(name));
}

geometry::Stratum axis_stratum(int ambient, int dim) {
  geometry::Stratum s;
  s.name = "probe";
  s.dim = dim;
  s.basepoint = Vec(static_cast<std::size_t>(ambient), 0.0);
  for (int i = 0; i < ambient; ++i) {
    Vec e(static_cast<std::size_t>(ambient), 0.0);
    e[static_cast<std::size_t>(i)] = 1.0;
    if (i < dim)
      s.tangent_basis.push_back(e);
    else
      s.normal_basis.push_back(e);
  }
  return s;
}

// Dense mixture-grid evaluation of the tangential Hamiltonian, step 1e-3
// in the mixture weights; generator sets are kept to three entries so the
// simplex enumeration stays exact.
double brute_tangential(const dynamics::GeneratorSet& gs,
                        const geometry::Stratum& s, const Vec& p,
                        bool* feasible) {
  const int steps = 1000;
  double best = -std::numeric_limits<double>::infinity();
  *feasible = false;
  auto score = [&](const std::vector<double>& mu) {
    Vec b(p.size(), 0.0);
    double l = 0.0;
    for (std::size_t j = 0; j < gs.size(); ++j) {
      axpy(mu[j], gs[j].b, b);
      l += mu[j] * gs[j].l;
    }
    for (const Vec& nb : s.normal_basis)
      if (std::abs(dot(b, nb)) > 1e-12) return;
    *feasible = true;
    best = std::max(best, -dot(b, p) - l);
  };
  if (gs.size() == 1) {
    score({1.0});
  } else if (gs.size() == 2) {
    for (int i = 0; i <= steps; ++i) {
      const double a = static_cast<double>(i) / steps;
      score({a, 1.0 - a});
    }
  } else {
    for (int i = 0; i <= steps; ++i)
      for (int j = 0; i + j <= steps; ++j) {
        const double a = static_cast<double>(i) / steps;
        const double b2 = static_cast<double>(j) / steps;
        score({a, b2, 1.0 - a - b2});
      }
  }
  return best;
}

struct Criterion {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& why) {
    if (!ok && pass) {
      pass = false;
      detail = why;
    }
  }
};

int failures = 0;

template <typename F>
void run_criterion(int n, F body) {
  Criterion c;
  try {
    body(c);
  } catch (const std::exception& e) {
    c.pass = false;
    c.detail = std::string("exception: ") + e.what();
  }
  std::printf("criterion %d: %s (%s)\n", n, c.pass ? "PASS" : "FAIL",
              c.detail.c_str());
  std::fflush(stdout);
  if (!c.pass) ++failures;
}

void criterion_1(Criterion& c) {
  // Unit running cost, zero terminal cost: U(x, t) = t at every node.
  auto cfg = config::builtin_problem("cross");
  cfg.terminal.kind = "constant";
  cfg.terminal.value = 0.0;
  const auto prob = config::build_problem(cfg);

  const auto start = Clock::now();
  const auto grid = solver::solve_value(prob, 0.02, 0.01);
  const double wall = seconds_since(start);

  double worst = 0.0;
  for (std::size_t s = 0; s < grid.slices(); ++s) {
    const double want = static_cast<double>(s) * grid.dt();
    for (std::size_t i = 0; i < grid.nodes(); ++i)
      worst = std::max(worst, std::abs(grid.at(s, i) - want));
  }
  c.require(grid.nodes() == 101 * 101 && grid.slices() == 101,
            "unexpected lattice");
  c.require(worst <= 1e-12, "max deviation " + fmt(worst) + " above 1e-12");
  c.require(wall < 5.0, "solve took " + fmt(wall) + " s, limit 5");
  if (c.pass)
    c.detail = "max deviation " + fmt(worst) + ", " + fmt(wall) + " s";
}

void criterion_2(Criterion& c) {
  const auto prob = builtin("two-speed-1d");
  const auto start = Clock::now();
  const auto grid = solver::solve_value(prob, 0.01, 0.005);

  // The 10-step oracle moves on a 0.2 lattice in the fast region, so the
  // sites sit on even tenths where the target at 1 stays reachable; odd
  // tenths near 0.9 would charge the oracle a spurious 0.1 floor.
  std::vector<double> sites{0.0};
  for (double x : {0.2, 0.4, 0.6, 0.8, 1.0, 1.2, 1.4, 1.6, 1.8}) {
    sites.push_back(x);
    sites.push_back(-x);
  }
  sites.push_back(-1.9);

  double worst = 0.0;
  for (double x : sites) {
    const double numeric = grid.interpolate(grid.slices() - 1, {x});
    const double oracle = solver::brute_force_value(prob, {x}, 1.0, 10);
    worst = std::max(worst, std::abs(numeric - oracle));
  }
  const double wall = seconds_since(start);
  c.require(sites.size() == 20, "site count");
  c.require(worst <= 0.05,
            "max oracle gap " + fmt(worst) + " above 0.05");
  c.require(wall < 60.0, "took " + fmt(wall) + " s, limit 60");
  if (c.pass)
    c.detail = "max oracle gap " + fmt(worst) + " over 20 sites, " +
               fmt(wall) + " s";
}

void criterion_3(Criterion& c) {
  struct Instance {
    const char* label;
    int ambient, dim;
    dynamics::GeneratorSet gens;
    Vec p;
  };
  const std::vector<Instance> corpus = {
      {"balanced pair", 1, 0,
       dynamics::GeneratorSet({{{1.0}, 0.0}, {{-1.0}, 1.0}}), {3.0}},
      {"rest plus drift", 1, 0,
       dynamics::GeneratorSet({{{0.0}, 2.0}, {{1.0}, 1.0}}), {-2.0}},
      {"cancelling pair plus costly rest", 1, 0,
       dynamics::GeneratorSet({{{2.0}, 0.0}, {{-2.0}, 0.0}, {{0.0}, 3.0}}),
       {1.0}},
      {"mirrored normals", 2, 1,
       dynamics::GeneratorSet(
           {{{1.0, 1.0}, 0.0}, {{1.0, -1.0}, 0.0}, {{-2.0, 0.0}, 1.0}}),
       {1.0, 0.0}},
      {"tangent pair", 2, 1,
       dynamics::GeneratorSet(
           {{{1.0, 0.0}, 0.5}, {{-1.0, 0.0}, 0.5}, {{0.0, 1.0}, 0.0}}),
       {-0.7, 0.0}},
      {"full-dimensional slice", 2, 2,
       dynamics::GeneratorSet(
           {{{1.0, 0.0}, 1.0}, {{0.0, 1.0}, 0.0}, {{-1.0, -1.0}, 2.0}}),
       {0.3, -1.1}},
  };
  double worst = 0.0;
  for (const auto& inst : corpus) {
    const auto s = axis_stratum(inst.ambient, inst.dim);
    bool feasible = false;
    const double brute = brute_tangential(inst.gens, s, inst.p, &feasible);
    const auto hv = hamiltonians::hamiltonian_tangential(inst.gens, s, inst.p);
    c.require(feasible && hv.finite,
              std::string(inst.label) + ": feasibility mismatch");
    if (!feasible || !hv.finite) continue;
    const double gap = std::abs(hv.value - brute);
    worst = std::max(worst, gap);
    c.require(gap <= 1e-7, std::string(inst.label) + ": LP vs grid gap " +
                               fmt(gap) + " above 1e-7");
  }

  // Point strata: H equals minus the cheapest zero-velocity mixture.
  const auto point = axis_stratum(1, 0);
  const struct {
    dynamics::GeneratorSet gens;
    double h0;
  } rests[] = {
      {dynamics::GeneratorSet({{{1.0}, 3.0}, {{-1.0}, 1.0}}), -2.0},
      {dynamics::GeneratorSet({{{0.0}, 0.7}, {{1.0}, 0.0}, {{-1.0}, 0.0}}),
       0.0},
  };
  for (const auto& r : rests) {
    const auto hv = hamiltonians::hamiltonian_tangential(r.gens, point, {0.0});
    c.require(hv.finite && std::abs(hv.value - r.h0) <= 1e-9,
              "rest-point value " + fmt(hv.value) + " expected " + fmt(r.h0));
  }
  if (c.pass) c.detail = "max LP vs grid gap " + fmt(worst);
}

void criterion_4(Criterion& c) {
  const auto good = builtin("figure1-r3");
  const auto good_rep = geometry::validate_afs(good.strat, 6.0);
  c.require(good_rep.pass, "reference stratification rejected");

  const auto bad = builtin("forbidden-r3");
  const auto bad_rep = geometry::validate_afs(bad.strat, 6.0);
  c.require(!bad_rep.pass, "forbidden stratification accepted");
  const auto& ax = bad_rep.extra.at("axioms");
  c.require(!ax.at("afs_ii").get<bool>(), "afs_ii not flagged");
  c.require(ax.at("afs_i").get<bool>() && ax.at("afs_iii").get<bool>() &&
                ax.at("disjointness").get<bool>() &&
                ax.at("cover").get<bool>(),
            "unrelated axiom flagged");

  double witness = std::numeric_limits<double>::infinity();
  for (const auto& site : bad_rep.sites)
    if (site.note.rfind("afs-ii", 0) == 0)
      witness = std::min(witness, norm2(site.location));
  c.require(witness <= 1e-3,
            "nearest witness " + fmt(witness) + " from the origin");
  if (c.pass) c.detail = "witness at distance " + fmt(witness);
}

void criterion_5(Criterion& c) {
  const auto prob = builtin("cross");
  const auto grid = solver::solve_value(prob, 0.02, 0.01);
  const double tol = 10.0 * (0.02 + 0.01);

  const auto sub = verify::viscosity_sub_check(grid, prob, tol);
  const auto super = verify::viscosity_super_check(grid, prob, tol);
  c.require(sub.pass, "sub-check failed, max " + fmt(sub.max_residual));
  c.require(super.pass, "super-check failed, max " + fmt(super.max_residual));

  // Every stratum dimension must be certified by name.
  bool dims[3] = {false, false, false};
  const auto& per = sub.extra.at("per_stratum_max_residual");
  for (const auto& s : prob.strat.strata())
    if (per.contains(s.name) && per.at(s.name).get<double>() <= tol)
      dims[s.dim] = true;
  c.require(dims[0] && dims[1] && dims[2],
            "missing a stratum dimension in the sub-check");

  // The point-stratum value must equal the LP's cheapest rest mixture
  // pushed through the backward difference, recomputed from scratch.
  const geometry::Stratum* origin = nullptr;
  for (const auto& s : prob.strat.strata())
    if (s.dim == 0) origin = &s;
  c.require(origin != nullptr, "no point stratum");
  if (!origin) return;
  const auto gs =
      dynamics::evaluate(prob.map, prob.strat, origin->basepoint, 0.0);
  const auto h0 =
      hamiltonians::hamiltonian_tangential(gs, *origin, {0.0, 0.0});
  c.require(h0.finite && std::abs(h0.value - (-1.0)) <= 1e-9,
            "origin Hamiltonian " + fmt(h0.value) + " expected -1");

  std::vector<std::size_t> idx(2);
  for (int i = 0; i < 2; ++i)
    idx[static_cast<std::size_t>(i)] = static_cast<std::size_t>(
        std::llround((0.0 - grid.lo()[i]) / grid.dx()[i]));
  const std::size_t flat = grid.flatten(idx);
  double recomputed = -std::numeric_limits<double>::infinity();
  for (std::size_t n = 1; n < grid.slices(); ++n)
    recomputed = std::max(
        recomputed,
        (grid.at(n, flat) - grid.at(n - 1, flat)) / grid.dt() + h0.value);
  const double reported = per.at(origin->name).get<double>();
  c.require(std::abs(reported - recomputed) <= 1e-9,
            "origin residual " + fmt(reported) + " vs recomputed " +
                fmt(recomputed));
  if (c.pass)
    c.detail = "sub max " + fmt(sub.max_residual) + ", super max " +
               fmt(super.max_residual) + ", origin residual " +
               fmt(reported) + " at tol " + fmt(tol);
}

void criterion_6(Criterion& c) {
  const auto prob = builtin("two-cost-1d");
  const auto grid = solver::solve_value(prob, 0.01, 0.005);

  const auto one = verify::dpp_check(grid, prob, 1);
  c.require(one.pass && one.max_residual == 0.0,
            "one-step residual " + fmt(one.max_residual) + " not exactly 0");

  const auto two = verify::dpp_check(grid, prob, 2);
  c.require(two.pass, "two-step residual " + fmt(two.max_residual));

  const auto four = verify::dpp_check(grid, prob, 4);
  const double bound =
      4.0 * four.extra.at("per_step_bound").get<double>() + 1e-12;
  c.require(four.max_residual <= bound,
            "four-step residual " + fmt(four.max_residual) + " above " +
                fmt(bound));
  if (c.pass)
    c.detail = "residuals 0, " + fmt(two.max_residual) + ", " +
               fmt(four.max_residual) + " for tau = dt, 2dt, 4dt";
}

void criterion_7(Criterion& c) {
  const auto prob = builtin("two-cost-1d");
  const auto start = Clock::now();
  const auto rep =
      verify::filippov_study(prob, {0.4, 0.2, 0.1}, 0.01, 0.005, 0.1);
  const double wall = seconds_since(start);

  std::vector<double> errs;
  for (const auto& row : rep.extra.at("table"))
    errs.push_back(row.at("max_difference").get<double>());
  c.require(errs.size() == 3, "expected three ladder rows");
  for (std::size_t i = 1; i < errs.size(); ++i)
    c.require(errs[i] <= 1.1 * errs[i - 1] + 1e-12,
              "ladder not monotone within 10 percent at row " +
                  std::to_string(i));
  c.require(errs.empty() ? false : errs.back() <= 0.1,
            "final difference " + fmt(errs.empty() ? -1.0 : errs.back()) +
                " above 0.1");
  c.require(rep.pass, "study reported failure");
  c.require(wall < 180.0, "took " + fmt(wall) + " s, limit 180");
  if (c.pass)
    c.detail = "e = " + fmt(errs[0]) + ", " + fmt(errs[1]) + ", " +
               fmt(errs[2]) + " for eps = 0.4, 0.2, 0.1, " + fmt(wall) + " s";
}

void criterion_8(Criterion& c) {
  const auto prob = builtin("cross");
  const auto rep = verify::scheme_agreement(prob, 0.02, 0.01, 0.01, 0.005);
  const double ratio = rep.extra.at("reduction_ratio").get<double>();
  c.require(rep.pass, "refinement did not contract");
  c.require(ratio >= 1.4, "reduction ratio " + fmt(ratio) + " below 1.4");
  if (c.pass)
    c.detail =
        "halving (dx, dt) contracts the disagreement by " + fmt(ratio);
}

void criterion_9(Criterion& c) {
  const dynamics::GeneratorSet gens({{{0.0, 0.0}, 1.0},
                                     {{1.0, 0.0}, 1.0},
                                     {{-1.0, 0.0}, 1.0},
                                     {{0.0, 1.0}, 1.0},
                                     {{0.0, -1.0}, 1.0}});

  // Cross geometry, all four quadrants carrying the same generators.
  auto crossed = builtin("cross");
  for (auto& [id, rule] : crossed.map.regions) {
    rule = dynamics::RegionRule{};
    rule.base = gens;
  }

  // The same dynamics on an interface-free stratification.
  geometry::Stratum all;
  all.name = "all";
  all.dim = 2;
  all.basepoint = {0.0, 0.0};
  all.tangent_basis = {{1.0, 0.0}, {0.0, 1.0}};
  geometry::FlatStratification plain(2, {{-1.0, -1.0}, {1.0, 1.0}}, {all});
  dynamics::BLMap map;
  map.regions[plain.top_strata()[0]].base = gens;
  solver::StratifiedProblem single{std::move(plain), std::move(map),
                                   solver::TerminalCost::distance_to_point(
                                       {0.0, 0.0}),
                                   1.0, 1.0};

  const auto a = solver::solve_value(crossed, 0.05, 0.025);
  const auto b = solver::solve_value(single, 0.05, 0.025);
  c.require(a.nodes() == b.nodes() && a.slices() == b.slices(),
            "lattices differ");
  std::size_t mismatches = 0;
  for (std::size_t s = 0; s < a.slices() && s < b.slices(); ++s)
    for (std::size_t i = 0; i < a.nodes(); ++i)
      if (a.at(s, i) != b.at(s, i)) ++mismatches;
  c.require(mismatches == 0,
            std::to_string(mismatches) + " nodes differ in bits");
  if (c.pass)
    c.detail = "all " + std::to_string(a.slices() * a.nodes()) +
               " values bit-identical";
}

void criterion_10(Criterion& c) {
  const auto prob = builtin("cross");
  solver::SolveOptions one, eight;
  one.threads = 1;
  eight.threads = 8;
  const auto a = solver::solve_value(prob, 0.05, 0.025, one);
  const auto b = solver::solve_value(prob, 0.05, 0.025, eight);

  std::ostringstream csv_a, csv_b;
  a.write_csv(csv_a);
  b.write_csv(csv_b);
  c.require(csv_a.str() == csv_b.str(), "CSV output differs across threads");

  std::ostringstream bin_a(std::ios::binary), bin_b(std::ios::binary);
  a.write_binary(bin_a);
  b.write_binary(bin_b);
  c.require(bin_a.str() == bin_b.str(),
            "binary output differs across threads");

  verify::SiteSpec sites;
  sites.count = 16;
  sites.seed = 0;
  const auto ra = verify::dpp_check(a, prob, 1, sites);
  const auto rb = verify::dpp_check(b, prob, 1, sites);
  c.require(ra.to_json().dump() == rb.to_json().dump(),
            "seeded check reports differ across threads");
  if (c.pass)
    c.detail = "CSV, binary grid and seeded JSON reports byte-identical";
}

}  // namespace

int main() {
  run_criterion(1, criterion_1);
  run_criterion(2, criterion_2);
  run_criterion(3, criterion_3);
  run_criterion(4, criterion_4);
  run_criterion(5, criterion_5);
  run_criterion(6, criterion_6);
  run_criterion(7, criterion_7);
  run_criterion(8, criterion_8);
  run_criterion(9, criterion_9);
  run_criterion(10, criterion_10);
  std::printf("%d of 10 criteria passed\n", 10 - failures);
  return failures;
}
