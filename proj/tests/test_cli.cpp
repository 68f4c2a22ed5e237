#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <string>

#include "strathjb/config.hpp"

using namespace strathjb;
namespace fs = std::filesystem;

namespace {

struct RunResult {
  int code = -1;
  std::string output;  // stdout and stderr interleaved
};

fs::path scratch() {
  static int counter = 0;
  const fs::path dir = fs::temp_directory_path() /
                       ("strathjb-cli-" + std::to_string(::getpid())) /
                       std::to_string(counter++);
  fs::create_directories(dir);
  return dir;
}

RunResult run(const std::string& args, const fs::path& dir) {
  const fs::path log = dir / "run.log";
  const std::string cmd = std::string(STRATHJB_CLI_PATH) + " " + args + " > " +
                          log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  RunResult r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(log);
  std::stringstream ss;
  ss << in.rdbuf();
  r.output = ss.str();
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

//! Builtin with overridden solver resolution, written to disk. The file
//! name carries the resolution so configs in one scratch dir never clash.
fs::path coarse_config(const fs::path& dir, const std::string& name,
                       double dx, double dt) {
  auto cfg = config::builtin_problem(name);
  cfg.solver.dx = dx;
  cfg.solver.dt = dt;
  const fs::path p = dir / (name + "-" + std::to_string(dx) + ".json");
  write_text(p, config::serialize(cfg));
  return p;
}

}  // namespace

TEST_CASE("builtin subcommand lists and prints configs") {
  const auto dir = scratch();
  const auto list = run("builtin", dir);
  CHECK(list.code == 0);
  for (const auto& name : config::builtin_names())
    CHECK(list.output.find(name) != std::string::npos);

  const auto show = run("builtin cross", dir);
  REQUIRE(show.code == 0);
  const auto cfg = config::parse_config(show.output);
  CHECK(config::to_json(cfg) ==
        config::to_json(config::builtin_problem("cross")));

  CHECK(run("builtin no-such-example", dir).code == 2);
}

TEST_CASE("validate accepts the shipped examples and rejects the bad one") {
  const auto dir = scratch();
  const auto good =
      run("validate --config builtin:cross --output " + dir.string(), dir);
  CHECK(good.code == 0);
  const auto afs =
      nlohmann::json::parse(slurp(dir / "cross_afs.json"));
  CHECK(afs.at("pass").get<bool>());
  CHECK(afs.at("axioms").at("afs_ii").get<bool>());

  const auto bad = run(
      "validate --config builtin:forbidden-r3 --output " + dir.string(), dir);
  CHECK(bad.code == 1);
  const auto bad_afs =
      nlohmann::json::parse(slurp(dir / "forbidden-r3_afs.json"));
  CHECK_FALSE(bad_afs.at("pass").get<bool>());
  const auto& ax = bad_afs.at("axioms");
  CHECK_FALSE(ax.at("afs_ii").get<bool>());
  CHECK(ax.at("afs_i").get<bool>());
  CHECK(ax.at("afs_iii").get<bool>());
  CHECK(ax.at("disjointness").get<bool>());
  CHECK(ax.at("cover").get<bool>());
}

TEST_CASE("solve writes grid artifacts and reports the lattice") {
  const auto dir = scratch();
  const auto cfg = coarse_config(dir, "cross", 0.1, 0.05);
  const auto base = (dir / "out").string();
  const auto r = run("solve --config " + cfg.string() + " --output " + base,
                     dir);
  REQUIRE(r.code == 0);
  const std::string csv = slurp(base + ".csv");
  CHECK(csv.rfind("x1,x2,t,value\n", 0) == 0);
  CHECK(fs::exists(base + ".grid"));
  CHECK(r.output.find("slices: 21") != std::string::npos);
}

TEST_CASE("solve rejects CFL violations with the computed bound") {
  const auto dir = scratch();
  const auto cfg = coarse_config(dir, "two-speed-1d", 0.01, 0.02);
  const auto r = run("solve --config " + cfg.string() + " --output " +
                         (dir / "x").string(),
                     dir);
  CHECK(r.code == 3);
  CHECK(r.output.find("CFL") != std::string::npos);
  CHECK(r.output.find("0.005") != std::string::npos);
}

TEST_CASE("solve rejects lattices that miss the strata") {
  const auto dir = scratch();
  const auto cfg = coarse_config(dir, "cross", 0.03, 0.01);
  const auto r = run("solve --config " + cfg.string() + " --output " +
                         (dir / "x").string(),
                     dir);
  CHECK(r.code == 3);
}

TEST_CASE("check passes a fresh solve and rejects mismatched resolutions") {
  const auto dir = scratch();
  const auto cfg = coarse_config(dir, "cross", 0.1, 0.05);
  const auto base = (dir / "g").string();
  REQUIRE(run("solve --config " + cfg.string() + " --output " + base, dir)
              .code == 0);

  const auto ok = run("check --config " + cfg.string() + " --grid " + base +
                          ".grid --output " + dir.string(),
                      dir);
  CHECK(ok.code == 0);
  const auto sub = nlohmann::json::parse(slurp(dir / "cross_sub.json"));
  CHECK(sub.at("pass").get<bool>());
  CHECK(sub.at("check").get<std::string>() == "viscosity_sub");

  // Same grid, config declaring a finer lattice: refused up front.
  const auto fine = coarse_config(dir, "cross", 0.05, 0.025);
  const auto mism = run("check --config " + fine.string() + " --grid " + base +
                            ".grid --output " + dir.string(),
                        dir);
  CHECK(mism.code == 2);

  // A hostile tolerance makes the same artifacts fail honestly.
  const auto tiny = run("check --config " + cfg.string() + " --grid " + base +
                            ".grid --tolerance 1e-16 --output " + dir.string(),
                        dir);
  CHECK(tiny.code == 1);
}

TEST_CASE("config errors name the field and exit with code 2") {
  const auto dir = scratch();
  auto j = nlohmann::json::parse(
      config::serialize(config::builtin_problem("two-cost-1d")));
  j.erase("horizon");
  const fs::path p = dir / "broken.json";
  write_text(p, j.dump());
  const auto r = run("validate --config " + p.string() + " --output " +
                         dir.string(),
                     dir);
  CHECK(r.code == 2);
  CHECK(r.output.find("horizon") != std::string::npos);

  CHECK(run("validate --config " + (dir / "absent.json").string() +
                " --output " + dir.string(),
            dir)
            .code == 2);
}

TEST_CASE("solves are byte-identical across thread counts") {
  const auto dir = scratch();
  const auto cfg = coarse_config(dir, "cross", 0.1, 0.05);
  const auto a = (dir / "a").string();
  const auto b = (dir / "b").string();
  REQUIRE(run("solve --config " + cfg.string() + " --threads 1 --output " + a,
              dir)
              .code == 0);
  REQUIRE(run("solve --config " + cfg.string() + " --threads 8 --output " + b,
              dir)
              .code == 0);
  CHECK(slurp(a + ".csv") == slurp(b + ".csv"));
  CHECK(slurp(a + ".grid") == slurp(b + ".grid"));
}

TEST_CASE("refinement study emits the ladder table") {
  const auto dir = scratch();
  const auto cfg = coarse_config(dir, "two-cost-1d", 0.1, 0.05);
  const auto out = (dir / "ladder.csv").string();
  const auto r = run("study --kind refinement --config " + cfg.string() +
                         " --output " + out,
                     dir);
  CHECK(r.code == 0);
  const std::string csv = slurp(out);
  CHECK(csv.rfind("dx,dt,max_difference\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
}

TEST_CASE("filippov study runs from the config eps ladder") {
  const auto dir = scratch();
  auto cfg = config::builtin_problem("two-cost-1d");
  cfg.solver.dx = 0.05;
  cfg.solver.dt = 0.025;
  const fs::path p = dir / "tc.json";
  write_text(p, config::serialize(cfg));
  const auto out = (dir / "filippov.csv").string();
  const auto r = run("study --kind filippov --config " + p.string() +
                         " --output " + out,
                     dir);
  CHECK(r.code == 0);
  const std::string csv = slurp(out);
  CHECK(csv.rfind("eps,max_difference\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);

  // An eps below the mollifier resolution floor is a precondition failure.
  cfg.solver.dx = 0.1;
  cfg.solver.dt = 0.05;
  write_text(p, config::serialize(cfg));
  CHECK(run("study --kind filippov --config " + p.string() + " --output " +
                out,
            dir)
            .code == 3);

  CHECK(run("study --kind nonsense --config " + p.string() + " --output " +
                out,
            dir)
            .code == 2);
}
