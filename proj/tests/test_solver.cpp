#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "strathjb/config.hpp"
#include "strathjb/errors.hpp"
#include "strathjb/solver.hpp"

using namespace strathjb;

namespace {

solver::StratifiedProblem builtin(const std::string& name) {
  return config::build_problem(config::builtin_problem(name));
}

solver::StratifiedProblem unit_cost_cross() {
  // The cross dynamics already carry running cost 1 everywhere; a constant
  // zero terminal cost makes the exact value U(x, t) = t.
  auto cfg = config::builtin_problem("cross");
  cfg.terminal.kind = "constant";
  cfg.terminal.value = 0.0;
  return config::build_problem(cfg);
}

}  // namespace

TEST_CASE("unit running cost and zero terminal cost solve to U = t exactly") {
  const auto prob = unit_cost_cross();
  const auto grid = solver::solve_value(prob, 0.25, 0.125);
  REQUIRE(grid.slices() == 9);
  for (std::size_t s = 0; s < grid.slices(); ++s) {
    const double want = static_cast<double>(s) * grid.dt();
    for (std::size_t flat = 0; flat < grid.nodes(); ++flat)
      REQUIRE(grid.at(s, flat) == Catch::Approx(want).margin(1e-13));
  }
}

TEST_CASE("two-speed interface values match the closed form") {
  const auto prob = builtin("two-speed-1d");
  const auto grid = solver::solve_value(prob, 0.01, 0.005);
  // From -1 with one unit of time: drive right at speed 1, end at 0,
  // terminal distance 1. From -0.5: reach 0 at half time, then speed 2
  // reaches the target exactly; the graze makes it the worst site, so it
  // gets the acceptance-level margin.
  CHECK(grid.interpolate(grid.slices() - 1, {-1.0}) ==
        Catch::Approx(1.0).margin(0.03));
  CHECK(grid.interpolate(grid.slices() - 1, {-0.5}) ==
        Catch::Approx(0.0).margin(0.05));
  CHECK(grid.interpolate(grid.slices() - 1, {0.0}) ==
        Catch::Approx(0.0).margin(0.03));
  CHECK(grid.interpolate(grid.slices() - 1, {1.0}) ==
        Catch::Approx(0.0).margin(0.03));

  // Zero running cost and an admissible rest state: more remaining time
  // never increases the value.
  for (std::size_t s = 0; s + 1 < grid.slices(); ++s)
    for (std::size_t flat = 0; flat < grid.nodes(); ++flat)
      REQUIRE(grid.at(s + 1, flat) <= grid.at(s, flat) + 1e-12);

  // Values stay within horizon * max cost + sup |g|.
  double worst = 0.0;
  for (std::size_t s = 0; s < grid.slices(); ++s)
    for (std::size_t flat = 0; flat < grid.nodes(); ++flat)
      worst = std::max(worst, std::abs(grid.at(s, flat)));
  CHECK(worst <= prob.g.sup_norm(prob.strat.box()) + 1e-12);
}

TEST_CASE("CFL violations and misaligned grids are rejected") {
  CHECK_THROWS_AS(solver::solve_value(builtin("two-speed-1d"), 0.01, 0.01),
                  CflViolationError);
  // dx = 0.03 does not divide the cross box span, so interfaces miss nodes.
  CHECK_THROWS_AS(solver::solve_value(builtin("cross"), 0.03, 0.01),
                  GridMisalignedError);
}

TEST_CASE("dt is adjusted to divide the horizon exactly") {
  const auto prob = builtin("two-speed-1d");
  const auto grid = solver::solve_value(prob, 0.05, 0.003);
  const double total = static_cast<double>(grid.slices() - 1) * grid.dt();
  CHECK(total == Catch::Approx(prob.horizon).margin(1e-12));
  CHECK(grid.dt() == Catch::Approx(0.003).epsilon(0.01));
}

TEST_CASE("brute force enumerates exact short-horizon values") {
  const auto prob = builtin("two-cost-1d");
  // Deep in the right region every sequence pays cost 1 per unit time and
  // the terminal cost vanishes.
  CHECK(solver::brute_force_value(prob, {0.5}, 0.1, 2) ==
        Catch::Approx(0.1).margin(1e-15));
  // From the left of the interface the optimal run crosses to the cheap
  // side: 0.25 at cost 2, then rest at cost 1.
  CHECK(solver::brute_force_value(prob, {-0.25}, 1.0, 4) ==
        Catch::Approx(0.25 * 2.0 + 0.75 * 1.0).margin(1e-12));
  CHECK_THROWS_AS(solver::brute_force_value(prob, {0.5}, 0.1, 0),
                  ComplexityGuardError);
  CHECK_THROWS_AS(solver::brute_force_value(prob, {0.5}, 0.1, 15),
                  ComplexityGuardError);
}

TEST_CASE("one-step cost breaks ties toward the lowest generator index") {
  solver::ValueGrid grid({0.0}, {0.5}, {3}, 0.1, 1);
  // All node values zero: both rest and drift cost dt * l with equal l.
  dynamics::GeneratorSet gens({{{0.0}, 1.0}, {{1.0}, 1.0}});
  std::size_t pick = 99;
  const double v = solver::one_step_cost(grid, 0, {0.5}, gens, 0.1, &pick);
  CHECK(v == Catch::Approx(0.1));
  CHECK(pick == 0);
}

TEST_CASE("greedy simulation approximately attains the value") {
  const auto prob = builtin("two-speed-1d");
  const auto grid = solver::solve_value(prob, 0.01, 0.005);
  const auto policy = solver::greedy_policy(grid);
  const auto traj = solver::simulate(prob, {-0.5}, 1.0, policy, 0.005);
  REQUIRE(traj.states.size() == traj.times.size());
  REQUIRE(traj.accumulated_cost.front() == 0.0);
  const double cost =
      traj.accumulated_cost.back() + prob.g(traj.states.back());
  CHECK(cost == Catch::Approx(0.0).margin(0.05));

  // The run crosses the junction about halfway through.
  const auto reach = solver::reaching_times(traj, prob.strat);
  const auto* junction = [&]() -> const solver::ReachRecord* {
    for (const auto& r : reach)
      if (prob.strat.stratum(r.stratum).name == "junction") return &r;
    return nullptr;
  }();
  REQUIRE(junction);
  CHECK(junction->dim == 0);
  CHECK(junction->time == Catch::Approx(0.5).margin(0.05));
  // The left region is the starting point; the right region is entered.
  for (const auto& r : reach) {
    const auto& s = prob.strat.stratum(r.stratum);
    if (s.name == "left") CHECK(r.time == 0.0);
    if (s.name == "right") CHECK(std::isfinite(r.time));
  }
}

TEST_CASE("infeasible policy selections are rejected") {
  const auto prob = builtin("two-speed-1d");
  const solver::Policy bad = [](const Vec&, double,
                                const dynamics::GeneratorSet&) {
    return solver::PolicyChoice{{5.0}, 0.0};
  };
  CHECK_THROWS_AS(solver::simulate(prob, {-0.5}, 1.0, bad, 0.01),
                  InfeasibleSelectionError);
  const solver::Policy wrong_dim = [](const Vec&, double,
                                      const dynamics::GeneratorSet&) {
    return solver::PolicyChoice{{1.0, 0.0}, 0.0};
  };
  CHECK_THROWS_AS(solver::simulate(prob, {-0.5}, 1.0, wrong_dim, 0.01),
                  InfeasibleSelectionError);
}

TEST_CASE("interpolation is exact on affine data and clamps outside") {
  solver::ValueGrid grid({0.0, 0.0}, {0.5, 0.5}, {3, 3}, 1.0, 1);
  for (std::size_t flat = 0; flat < grid.nodes(); ++flat) {
    const Vec x = grid.node(flat);
    grid.at(0, flat) = 2.0 * x[0] - 3.0 * x[1] + 0.25;
  }
  CHECK(grid.interpolate(0, {0.3, 0.7}) ==
        Catch::Approx(2.0 * 0.3 - 3.0 * 0.7 + 0.25).margin(1e-14));
  bool clamped = false;
  CHECK(grid.interpolate(0, {0.5, 0.5}, &clamped) ==
        Catch::Approx(2.0 * 0.5 - 3.0 * 0.5 + 0.25).margin(1e-14));
  CHECK_FALSE(clamped);
  // Outside the box the lookup clamps to the boundary value and says so.
  const double edge = grid.interpolate(0, {2.0, 0.5}, &clamped);
  CHECK(clamped);
  CHECK(edge == Catch::Approx(2.0 * 1.0 - 3.0 * 0.5 + 0.25).margin(1e-14));
}

TEST_CASE("binary grids round-trip bitwise and CSV has the header") {
  const auto prob = builtin("cross");
  const auto grid = solver::solve_value(prob, 0.1, 0.05);

  std::stringstream bin(std::ios::in | std::ios::out | std::ios::binary);
  grid.write_binary(bin);
  const auto back = solver::ValueGrid::read_binary(bin);
  REQUIRE(back.shape() == grid.shape());
  REQUIRE(back.slices() == grid.slices());
  CHECK(back.dt() == grid.dt());
  CHECK(back.lo() == grid.lo());
  CHECK(back.dx() == grid.dx());
  for (std::size_t s = 0; s < grid.slices(); ++s)
    for (std::size_t flat = 0; flat < grid.nodes(); ++flat)
      REQUIRE(back.at(s, flat) == grid.at(s, flat));

  std::ostringstream csv;
  grid.write_csv(csv);
  CHECK(csv.str().rfind("x1,x2,t,value\n", 0) == 0);

  std::istringstream junk("nope");
  CHECK_THROWS_AS(solver::ValueGrid::read_binary(junk), ConfigError);
}

TEST_CASE("thread count does not change a single bit of the solution") {
  const auto prob = builtin("cross");
  const auto one = solver::solve_value(prob, 0.05, 0.025, {1});
  const auto eight = solver::solve_value(prob, 0.05, 0.025, {8});
  REQUIRE(one.nodes() == eight.nodes());
  REQUIRE(one.slices() == eight.slices());
  for (std::size_t s = 0; s < one.slices(); ++s)
    for (std::size_t flat = 0; flat < one.nodes(); ++flat)
      REQUIRE(one.at(s, flat) == eight.at(s, flat));
}

TEST_CASE("terminal cost forms evaluate and bound correctly") {
  const auto cone = solver::TerminalCost::clipped_cone({0.0, 0.0}, 2.0, 1.5);
  CHECK(cone({0.5, 0.0}) == Catch::Approx(1.0));
  CHECK(cone({3.0, 4.0}) == Catch::Approx(1.5));  // clipped
  const geometry::Box box{{-1.0, -1.0}, {1.0, 1.0}};
  CHECK(cone.sup_norm(box) == Catch::Approx(1.5));

  const auto dist = solver::TerminalCost::distance_to_point({1.0});
  CHECK(dist({-1.0}) == Catch::Approx(2.0));
  CHECK(dist.sup_norm({{-2.0}, {2.0}}) == Catch::Approx(3.0));

  const auto flat = solver::TerminalCost::constant(0.75);
  CHECK(flat({0.3, 0.4}) == 0.75);

  const auto tab = solver::TerminalCost::tabulated(
      {0.0}, {1.0}, {3}, {0.0, 1.0, 4.0});
  CHECK(tab({0.5}) == Catch::Approx(0.5));
  CHECK(tab({1.5}) == Catch::Approx(2.5));
  CHECK(tab({9.0}) == Catch::Approx(4.0));  // clamped lookup
}
