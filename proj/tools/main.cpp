#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "strathjb/config.hpp"
#include "strathjb/dynamics.hpp"
#include "strathjb/errors.hpp"
#include "strathjb/hamiltonians.hpp"
#include "strathjb/solver.hpp"
#include "strathjb/verify.hpp"

namespace {

using namespace strathjb;

constexpr int kExitPass = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitInputError = 2;
constexpr int kExitPrecondition = 3;

struct Options {
  std::string config;
  std::string output;
  std::string grid;
  std::string kind = "filippov";
  int threads = 0;       // 0: take the config value
  long long seed = -1;   // <0: take the config value
  double tolerance = 0;  // <=0: take the config value / derived default
};

config::ProblemConfig load_config(const Options& opt) {
  config::ProblemConfig cfg;
  if (opt.config.rfind("builtin:", 0) == 0) {
    cfg = config::builtin_problem(opt.config.substr(8));
  } else {
    cfg = config::parse_config_file(opt.config);
  }
  if (opt.threads > 0) cfg.solver.threads = opt.threads;
  if (opt.seed >= 0) cfg.checks.seed = static_cast<unsigned>(opt.seed);
  if (opt.tolerance > 0) cfg.checks.tolerance = opt.tolerance;
  return cfg;
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  if (path.has_parent_path())
    std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  out << j.dump(2) << "\n";
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void print_failures(const report::CheckReport& rep) {
  int shown = 0;
  for (const report::Site& s : rep.sites) {
    if (s.pass) continue;
    std::cout << "    at (";
    for (std::size_t i = 0; i < s.location.size(); ++i)
      std::cout << (i ? ", " : "") << fmt(s.location[i]);
    std::cout << ")";
    if (s.time) std::cout << " t=" << fmt(*s.time);
    if (!s.note.empty()) std::cout << ": " << s.note;
    std::cout << "\n";
    if (++shown == 3) break;
  }
}

void print_report_line(const report::CheckReport& rep) {
  std::cout << "  " << rep.check << ": " << (rep.pass ? "pass" : "FAIL")
            << " (max residual " << fmt(rep.max_residual) << ", tolerance "
            << fmt(rep.tolerance) << ")\n";
  if (!rep.pass) print_failures(rep);
}

int cmd_validate(const Options& opt) {
  const config::ProblemConfig cfg = load_config(opt);
  const solver::StratifiedProblem prob = config::build_problem(cfg);
  const double density = cfg.checks.sample_density;
  const std::filesystem::path dir = opt.output.empty() ? "." : opt.output;

  const report::CheckReport afs = geometry::validate_afs(prob.strat, density);
  const report::CheckReport adapted =
      dynamics::check_adapted(prob.map, prob.strat, density);
  const report::AssumptionReport nc = hamiltonians::check_nc(
      prob.map, prob.strat, cfg.checks.delta_target, density);
  const report::AssumptionReport tc =
      hamiltonians::check_tc(prob.map, prob.strat, density);
  const report::AssumptionReport lp =
      hamiltonians::check_lp_constant(prob.map, prob.strat, density);

  write_json(dir / (cfg.name + "_afs.json"), afs.to_json());
  write_json(dir / (cfg.name + "_adapted.json"), adapted.to_json());
  write_json(dir / (cfg.name + "_nc.json"), nc.to_json());
  write_json(dir / (cfg.name + "_tc.json"), tc.to_json());
  write_json(dir / (cfg.name + "_lp.json"), lp.to_json());

  double nc_delta = cfg.checks.delta_target;
  if (nc.summary.contains("nc_delta"))
    for (const auto& [name, v] : nc.summary["nc_delta"].items())
      if (v.is_number()) nc_delta = std::min(nc_delta, v.get<double>());

  std::cout << "validate " << cfg.name << "\n";
  print_report_line(afs);
  print_report_line(adapted);
  std::cout << "  check_nc: " << (nc.pass ? "pass" : "FAIL")
            << " (certified delta " << fmt(nc_delta) << ", target "
            << fmt(cfg.checks.delta_target) << ")\n";
  std::cout << "  check_tc: " << (tc.pass ? "pass" : "FAIL")
            << " (tangential constant "
            << fmt(tc.summary.value("tc_constant", 0.0)) << ")\n";
  std::cout << "  check_lp_constant: " << (lp.pass ? "pass" : "FAIL")
            << " (lipschitz constant "
            << fmt(lp.summary.value("lp_constant", 0.0)) << ")\n";
  for (const report::AssumptionReport* a : {&nc, &tc, &lp})
    if (!a->pass)
      for (const report::CheckReport& e : a->entries)
        if (!e.pass) {
          std::cout << "  " << e.check << ":\n";
          print_failures(e);
        }

  const bool ok = afs.pass && adapted.pass && nc.pass && tc.pass && lp.pass;
  return ok ? kExitPass : kExitCheckFailed;
}

int cmd_solve(const Options& opt) {
  const config::ProblemConfig cfg = load_config(opt);
  const solver::StratifiedProblem prob = config::build_problem(cfg);
  solver::SolveOptions sopts;
  sopts.threads = cfg.solver.threads;

  const auto start = std::chrono::steady_clock::now();
  const solver::ValueGrid grid =
      solver::solve_value(prob, cfg.solver.dx, cfg.solver.dt, sopts);
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();

  const std::string base = opt.output.empty() ? cfg.name : opt.output;
  const std::filesystem::path csv_path = base + ".csv";
  if (csv_path.has_parent_path())
    std::filesystem::create_directories(csv_path.parent_path());
  {
    std::ofstream csv(csv_path, std::ios::binary);
    if (!csv) throw ConfigError("cannot write '" + csv_path.string() + "'");
    grid.write_csv(csv);
    std::ofstream bin(base + ".grid", std::ios::binary);
    if (!bin) throw ConfigError("cannot write '" + base + ".grid'");
    grid.write_binary(bin);
  }

  double lo = grid.at(0, 0), hi = lo;
  for (std::size_t s = 0; s < grid.slices(); ++s)
    for (std::size_t i = 0; i < grid.nodes(); ++i) {
      lo = std::min(lo, grid.at(s, i));
      hi = std::max(hi, grid.at(s, i));
    }
  std::cout << "solve " << cfg.name << "\n"
            << "  nodes: " << grid.nodes() << "\n"
            << "  slices: " << grid.slices() << " (dt " << fmt(grid.dt())
            << ")\n"
            << "  min U: " << fmt(lo) << "\n"
            << "  max U: " << fmt(hi) << "\n"
            << "  clamped feet: " << grid.clamped_feet() << "\n"
            << "  wall seconds: " << fmt(wall) << "\n"
            << "  wrote: " << base << ".csv, " << base << ".grid\n";
  return kExitPass;
}

int cmd_check(const Options& opt) {
  const config::ProblemConfig cfg = load_config(opt);
  const solver::StratifiedProblem prob = config::build_problem(cfg);
  if (opt.grid.empty()) throw ConfigError("check: --grid is required");
  std::ifstream in(opt.grid, std::ios::binary);
  if (!in) throw ConfigError("cannot open grid file '" + opt.grid + "'");
  const solver::ValueGrid grid = solver::ValueGrid::read_binary(in);
  for (std::size_t i = 0; i < grid.dimension(); ++i)
    if (std::abs(grid.dx()[i] - cfg.solver.dx) > 1e-9 * (1.0 + cfg.solver.dx))
      throw ConfigError(
          "check: grid resolution does not match the config (grid dx " +
          fmt(grid.dx()[i]) + ", config dx " + fmt(cfg.solver.dx) + ")");

  const double tol = config::effective_tolerance(cfg);
  const std::filesystem::path dir = opt.output.empty() ? "." : opt.output;

  const report::CheckReport sub = verify::viscosity_sub_check(grid, prob, tol);
  const report::CheckReport super =
      verify::viscosity_super_check(grid, prob, tol);
  verify::SiteSpec sites;
  sites.seed = cfg.checks.seed;
  const report::CheckReport dpp = verify::dpp_check(grid, prob, 1, sites);

  write_json(dir / (cfg.name + "_sub.json"), sub.to_json());
  write_json(dir / (cfg.name + "_super.json"), super.to_json());
  write_json(dir / (cfg.name + "_dpp.json"), dpp.to_json());

  std::cout << "check " << cfg.name << " (tolerance " << fmt(tol) << ")\n";
  print_report_line(sub);
  print_report_line(super);
  print_report_line(dpp);
  const bool ok = sub.pass && super.pass && dpp.pass;
  return ok ? kExitPass : kExitCheckFailed;
}

int cmd_study(const Options& opt) {
  const config::ProblemConfig cfg = load_config(opt);
  const solver::StratifiedProblem prob = config::build_problem(cfg);
  solver::SolveOptions sopts;
  sopts.threads = cfg.solver.threads;
  const std::string out = opt.output.empty()
                              ? cfg.name + "_" + opt.kind + ".csv"
                              : opt.output;
  const std::filesystem::path path = out;
  if (path.has_parent_path())
    std::filesystem::create_directories(path.parent_path());
  std::ofstream csv(path, std::ios::binary);
  if (!csv) throw ConfigError("cannot write '" + out + "'");

  report::CheckReport rep;
  if (opt.kind == "filippov") {
    if (cfg.checks.eps_list.empty())
      throw ConfigError("study filippov: checks.eps_list is empty");
    rep = verify::filippov_study(prob, cfg.checks.eps_list, cfg.solver.dx,
                                 cfg.solver.dt, cfg.checks.filippov_tolerance,
                                 sopts);
    csv << "eps,max_difference\n";
    for (const auto& row : rep.extra["table"])
      csv << fmt(row["eps"].get<double>()) << ","
          << fmt(row["max_difference"].get<double>()) << "\n";
  } else if (opt.kind == "refinement") {
    rep = verify::scheme_agreement(prob, cfg.solver.dx, cfg.solver.dt,
                                   cfg.solver.dx / 2.0, cfg.solver.dt / 2.0,
                                   sopts);
    csv << "dx,dt,max_difference\n";
    const auto& res = rep.extra["resolutions"];
    csv << fmt(res["dx1"].get<double>()) << "," << fmt(res["dt1"].get<double>())
        << "," << fmt(rep.extra["difference_coarse_fine"].get<double>())
        << "\n";
    csv << fmt(res["dx2"].get<double>()) << "," << fmt(res["dt2"].get<double>())
        << "," << fmt(rep.extra["difference_fine_continuation"].get<double>())
        << "\n";
  } else {
    throw ConfigError("study: unknown kind '" + opt.kind +
                      "' (expected filippov or refinement)");
  }
  csv.close();

  std::cout << "study " << opt.kind << " on " << cfg.name << "\n";
  print_report_line(rep);
  std::cout << "  wrote: " << out << "\n";
  return rep.pass ? kExitPass : kExitCheckFailed;
}

int cmd_builtin(const std::string& name) {
  if (name.empty()) {
    for (const std::string& n : config::builtin_names()) std::cout << n << "\n";
    return kExitPass;
  }
  std::cout << config::builtin_text(name);
  return kExitPass;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Solver and verification toolkit for finite-horizon optimal control "
      "on stratified domains"};
  app.require_subcommand(1);
  Options opt;
  std::string builtin_name;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", opt.config,
                    "Config file path, or builtin:<name>")
        ->required();
    cmd->add_option("--output", opt.output, "Output file base or directory");
    cmd->add_option("--threads", opt.threads, "Worker thread cap");
    cmd->add_option("--seed", opt.seed, "Randomized-site seed override");
    cmd->add_option("--tolerance", opt.tolerance, "Check tolerance override");
  };

  CLI::App* validate =
      app.add_subcommand("validate", "Run the structural assumption checks");
  add_common(validate);
  CLI::App* solve =
      app.add_subcommand("solve", "Solve the value function on a grid");
  add_common(solve);
  CLI::App* check = app.add_subcommand(
      "check", "Verify a solved grid (sub/super/dynamic programming)");
  add_common(check);
  check->add_option("--grid", opt.grid, "Binary grid produced by solve")
      ->required();
  CLI::App* study = app.add_subcommand(
      "study", "Parameter study (filippov regularization or refinement)");
  add_common(study);
  study->add_option("--kind", opt.kind, "filippov or refinement");
  CLI::App* builtin =
      app.add_subcommand("builtin", "Print a builtin config (no name: list)");
  builtin->add_option("name", builtin_name, "Builtin problem name");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitPass : kExitInputError;
  }

  try {
    if (validate->parsed()) return cmd_validate(opt);
    if (solve->parsed()) return cmd_solve(opt);
    if (check->parsed()) return cmd_check(opt);
    if (study->parsed()) return cmd_study(opt);
    if (builtin->parsed()) return cmd_builtin(builtin_name);
  } catch (const CflViolationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitPrecondition;
  } catch (const GridMisalignedError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitPrecondition;
  } catch (const PreconditionError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitPrecondition;
  } catch (const ComplexityGuardError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitPrecondition;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInputError;
  }
  return kExitInputError;
}
