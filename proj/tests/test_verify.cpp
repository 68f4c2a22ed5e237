#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "strathjb/config.hpp"
#include "strathjb/errors.hpp"
#include "strathjb/hamiltonians.hpp"
#include "strathjb/solver.hpp"
#include "strathjb/verify.hpp"

using namespace strathjb;

namespace {

solver::StratifiedProblem builtin(const std::string& name) {
  return config::build_problem(config::builtin_problem(name));
}

solver::StratifiedProblem unit_cost_cross() {
  auto cfg = config::builtin_problem("cross");
  cfg.terminal.kind = "constant";
  cfg.terminal.value = 0.0;
  return config::build_problem(cfg);
}

dynamics::GeneratorSet column_generators() {
  // Vertical motion only; every generator is tangent to the wall {x1 = 0}.
  return dynamics::GeneratorSet(
      {{{0.0, 0.0}, 1.0}, {{0.0, 1.0}, 1.0}, {{0.0, -1.0}, 1.0}});
}

solver::TerminalCost column_terminal() {
  // g(x) = |x2 - 0.3| encoded as a table constant in x1; multilinear
  // interpolation reproduces it exactly on 0.1-aligned lattices.
  std::vector<double> values;
  std::vector<std::size_t> shape{2, 21};
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 21; ++j)
      values.push_back(std::abs(-1.0 + 0.1 * static_cast<double>(j) - 0.3));
  return solver::TerminalCost::tabulated({-1.0, -1.0}, {2.0, 0.1}, shape,
                                         values);
}

//! Two quadrail regions split by a wall whose dynamics equal both sides:
//! the wall is a fictitious interface.
solver::StratifiedProblem walled_column_problem() {
  geometry::Stratum left, right, wall;
  left.name = "left";
  left.dim = 2;
  left.basepoint = {-0.5, 0.0};
  left.tangent_basis = {{1.0, 0.0}, {0.0, 1.0}};
  left.cell = {{{1.0, 0.0}, 0.0, false}};
  right = left;
  right.name = "right";
  right.basepoint = {0.5, 0.0};
  right.cell = {{{1.0, 0.0}, 0.0, true}};
  wall.name = "wall";
  wall.dim = 1;
  wall.basepoint = {0.0, 0.0};
  wall.tangent_basis = {{0.0, 1.0}};

  geometry::FlatStratification fs(2, {{-1.0, -1.0}, {1.0, 1.0}},
                                  {left, right, wall});
  dynamics::BLMap map;
  for (int id : fs.top_strata()) map.regions[id].base = column_generators();
  return {std::move(fs), std::move(map), column_terminal(), 1.0, 1.0};
}

solver::StratifiedProblem merged_column_problem() {
  geometry::Stratum all;
  all.name = "all";
  all.dim = 2;
  all.basepoint = {0.0, 0.0};
  all.tangent_basis = {{1.0, 0.0}, {0.0, 1.0}};
  geometry::FlatStratification fs(2, {{-1.0, -1.0}, {1.0, 1.0}}, {all});
  dynamics::BLMap map;
  map.regions[fs.top_strata()[0]].base = column_generators();
  return {std::move(fs), std::move(map), column_terminal(), 1.0, 1.0};
}

}  // namespace

TEST_CASE("sub check flags a too-fast clock and accepts the solve") {
  const auto prob = unit_cost_cross();
  const auto good = solver::solve_value(prob, 0.1, 0.05);
  CHECK(verify::viscosity_sub_check(good, prob, 0.5).pass);

  // U = 2t has u_t = 2 while H(0) = -1: residual 1 at every interior node.
  solver::ValueGrid fake({-1.0, -1.0}, {0.1, 0.1}, {21, 21}, 0.05, 3);
  for (std::size_t s = 0; s < fake.slices(); ++s)
    for (std::size_t flat = 0; flat < fake.nodes(); ++flat)
      fake.at(s, flat) = 2.0 * static_cast<double>(s) * fake.dt();
  const auto rep = verify::viscosity_sub_check(fake, prob, 0.5);
  CHECK_FALSE(rep.pass);
  CHECK(rep.max_residual == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("super check flags a frozen clock and accepts the solve") {
  const auto prob = unit_cost_cross();
  const auto good = solver::solve_value(prob, 0.1, 0.05);
  CHECK(verify::viscosity_super_check(good, prob, 0.5).pass);

  // U = 0 has u_t = 0 and H(0) = -1: supersolution residual 1 everywhere.
  solver::ValueGrid fake({-1.0, -1.0}, {0.1, 0.1}, {21, 21}, 0.05, 3);
  const auto rep = verify::viscosity_super_check(fake, prob, 0.5);
  CHECK_FALSE(rep.pass);
  CHECK(rep.max_residual == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("dpp residual vanishes to the bit at one step") {
  const auto prob = builtin("two-cost-1d");
  const auto grid = solver::solve_value(prob, 0.1, 0.05);
  const auto rep = verify::dpp_check(grid, prob, 1);
  CHECK(rep.pass);
  CHECK(rep.max_residual == 0.0);
  CHECK(rep.extra.at("tau_steps").get<int>() == 1);

  const auto four = verify::dpp_check(grid, prob, 4);
  CHECK(four.pass);
  CHECK(four.max_residual <=
        4.0 * four.extra.at("per_step_bound").get<double>() + 1e-12);
}

TEST_CASE("dpp preconditions reject bad step counts") {
  const auto prob = builtin("two-cost-1d");
  const auto grid = solver::solve_value(prob, 0.1, 0.05);
  CHECK_THROWS_AS(verify::dpp_check(grid, prob, 0), PreconditionError);
  CHECK_THROWS_AS(verify::dpp_check(
                      grid, prob, static_cast<int>(grid.slices())),
                  PreconditionError);
}

TEST_CASE("identical-generator interfaces are invisible to the solver") {
  const auto split = walled_column_problem();
  const auto merged = merged_column_problem();
  const auto a = solver::solve_value(split, 0.1, 0.05);
  const auto b = solver::solve_value(merged, 0.1, 0.05);
  REQUIRE(a.nodes() == b.nodes());
  REQUIRE(a.slices() == b.slices());
  for (std::size_t s = 0; s < a.slices(); ++s)
    for (std::size_t flat = 0; flat < a.nodes(); ++flat)
      REQUIRE(a.at(s, flat) == b.at(s, flat));
}

TEST_CASE("stratum and region sub-checks agree at fictitious interfaces") {
  const auto split = walled_column_problem();
  const auto merged = merged_column_problem();
  const double tol = 10.0 * (0.1 + 0.05);
  const auto ga = solver::solve_value(split, 0.1, 0.05);
  const auto gb = solver::solve_value(merged, 0.1, 0.05);
  const auto ra = verify::viscosity_sub_check(ga, split, tol);
  const auto rb = verify::viscosity_sub_check(gb, merged, tol);
  CHECK(ra.pass);
  CHECK(rb.pass);

  // The value is constant in x1, so every column carries the same residual
  // profile: the wall maximum (tangential LP route) must equal the region
  // maxima (full-Hamiltonian route) and the merged problem's maximum.
  const auto& per = ra.extra.at("per_stratum_max_residual");
  const double wall = per.at("wall").get<double>();
  const double left = per.at("left").get<double>();
  const double right = per.at("right").get<double>();
  const double whole =
      rb.extra.at("per_stratum_max_residual").at("all").get<double>();
  CHECK(wall == Catch::Approx(left).margin(1e-12));
  CHECK(wall == Catch::Approx(right).margin(1e-12));
  CHECK(wall == Catch::Approx(whole).margin(1e-12));

  // The same holds for the supersolution side, which uses the hull at
  // every node.
  const auto sa = verify::viscosity_super_check(ga, split, tol);
  const auto sb = verify::viscosity_super_check(gb, merged, tol);
  const auto& sper = sa.extra.at("per_stratum_max_residual");
  CHECK(sper.at("wall").get<double>() ==
        Catch::Approx(sb.extra.at("per_stratum_max_residual")
                          .at("all")
                          .get<double>())
            .margin(1e-12));
}

TEST_CASE("point-stratum residual equals the mixture LP value") {
  const auto prob = builtin("cross");
  const auto grid = solver::solve_value(prob, 0.05, 0.025);
  const double tol = 10.0 * (0.05 + 0.025);
  const auto rep = verify::viscosity_sub_check(grid, prob, tol);
  REQUIRE(rep.pass);

  // Recompute the origin residual from scratch: backward time difference
  // plus the LP infimum over rest mixtures.
  const auto* origin = [&]() -> const geometry::Stratum* {
    for (const auto& s : prob.strat.strata())
      if (s.dim == 0) return &s;
    return nullptr;
  }();
  REQUIRE(origin);
  const auto gs =
      dynamics::evaluate(prob.map, prob.strat, origin->basepoint, 0.0);
  const auto h0 =
      hamiltonians::hamiltonian_tangential(gs, *origin, {0.0, 0.0});
  REQUIRE(h0.finite);
  CHECK(h0.value == Catch::Approx(-1.0).margin(1e-12));

  std::vector<std::size_t> idx(2);
  for (int i = 0; i < 2; ++i)
    idx[static_cast<std::size_t>(i)] = static_cast<std::size_t>(
        std::llround((0.0 - grid.lo()[i]) / grid.dx()[i]));
  const std::size_t flat = grid.flatten(idx);
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t n = 1; n < grid.slices(); ++n) {
    const double ut = (grid.at(n, flat) - grid.at(n - 1, flat)) / grid.dt();
    worst = std::max(worst, ut + h0.value);
  }
  const double reported =
      rep.extra.at("per_stratum_max_residual").at("origin").get<double>();
  CHECK(reported == Catch::Approx(worst).margin(1e-9));
}

TEST_CASE("filippov study is an identity for single-region problems") {
  // Blending identical generator sets reproduces them; the only residue
  // is roundoff in the convex weights.
  const auto prob = merged_column_problem();
  const auto rep = verify::filippov_study(prob, {0.4, 0.2}, 0.1, 0.05, 0.1);
  CHECK(rep.pass);
  CHECK(rep.max_residual <= 1e-12);
  for (const auto& row : rep.extra.at("table"))
    CHECK(row.at("max_difference").get<double>() <= 1e-12);
}

TEST_CASE("filippov study preconditions") {
  const auto prob = builtin("two-cost-1d");
  CHECK_THROWS_AS(verify::filippov_study(prob, {0.1}, 0.1, 0.05, 0.1),
                  PreconditionError);  // eps < 2 dx
  CHECK_THROWS_AS(verify::filippov_study(prob, {}, 0.01, 0.005, 0.1),
                  ConfigError);
  CHECK_THROWS_AS(verify::filippov_study(prob, {0.2, 0.4}, 0.01, 0.005, 0.1),
                  ConfigError);  // must decrease
}

TEST_CASE("scheme agreement reports zero for exactly solvable problems") {
  // U = t at every resolution, so the ladder differences are pure roundoff
  // drift; their relative order is arbitrary, their size is not.
  const auto prob = unit_cost_cross();
  const auto rep = verify::scheme_agreement(prob, 0.1, 0.05, 0.05, 0.025);
  CHECK(rep.extra.at("difference_coarse_fine").get<double>() <= 1e-12);
  CHECK(rep.extra.at("difference_fine_continuation").get<double>() <= 1e-12);

  // Identical resolutions solve the same lattice twice: bitwise equal.
  const auto same = verify::scheme_agreement(prob, 0.1, 0.05, 0.1, 0.05);
  CHECK(same.pass);
  CHECK(same.extra.at("difference_coarse_fine").get<double>() == 0.0);
  CHECK(same.extra.at("difference_fine_continuation").get<double>() == 0.0);

  CHECK_THROWS_AS(verify::scheme_agreement(prob, 0.05, 0.025, 0.1, 0.05),
                  PreconditionError);
}
