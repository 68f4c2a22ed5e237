#include "strathjb/verify.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <string>

#include "strathjb/errors.hpp"
#include "strathjb/hamiltonians.hpp"

namespace strathjb::verify {
namespace {

constexpr double kAlignTol = 1e-9;
constexpr std::size_t kMaxRecordedFailures = 128;
constexpr long long kMaxSequences = 100000000LL;

void require_match(const solver::ValueGrid& grid,
                   const solver::StratifiedProblem& prob) {
  const geometry::Box& box = prob.strat.box();
  if (grid.dimension() != box.lo.size())
    throw ConfigError("grid dimension does not match the problem");
  for (std::size_t i = 0; i < box.lo.size(); ++i) {
    const double span = box.hi[i] - box.lo[i];
    const double hi =
        grid.lo()[i] + static_cast<double>(grid.shape()[i] - 1) * grid.dx()[i];
    if (std::abs(grid.lo()[i] - box.lo[i]) > kAlignTol * (1.0 + span) ||
        std::abs(hi - box.hi[i]) > kAlignTol * (1.0 + span))
      throw ConfigError("grid does not span the problem box");
  }
}

bool axis_aligned(const Vec& v, std::size_t* axis) {
  std::size_t hits = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (std::abs(std::abs(v[i]) - 1.0) < kAlignTol) {
      ++hits;
      if (axis) *axis = i;
    } else if (std::abs(v[i]) > kAlignTol) {
      return false;
    }
  }
  return hits == 1;
}

struct NodeInfo {
  const geometry::Stratum* s = nullptr;
  bool boundary = false;
};

std::vector<NodeInfo> classify(const solver::ValueGrid& grid,
                               const geometry::FlatStratification& fs) {
  std::vector<NodeInfo> out(grid.nodes());
  std::vector<std::size_t> hits(fs.strata().size(), 0);
  for (std::size_t flat = 0; flat < grid.nodes(); ++flat) {
    const auto idx = grid.unflatten(flat);
    NodeInfo ni;
    for (std::size_t i = 0; i < idx.size(); ++i)
      if (idx[i] == 0 || idx[i] + 1 == grid.shape()[i]) ni.boundary = true;
    ni.s = &fs.locate(grid.node(flat));
    ++hits[static_cast<std::size_t>(ni.s->id)];
    out[flat] = ni;
  }
  for (const geometry::Stratum& s : fs.strata())
    if (hits[static_cast<std::size_t>(s.id)] == 0)
      throw GridMisalignedError("stratum " + s.name +
                                " carries no lattice node");
  return out;
}

std::vector<std::vector<std::size_t>> tangent_axes(
    const geometry::FlatStratification& fs) {
  std::vector<std::vector<std::size_t>> axes(fs.strata().size());
  for (const geometry::Stratum& s : fs.strata())
    for (const Vec& v : s.tangent_basis) {
      std::size_t a = 0;
      if (!axis_aligned(v, &a))
        throw GridMisalignedError("stratum " + s.name +
                                  " has no lattice line");
      axes[static_cast<std::size_t>(s.id)].push_back(a);
    }
  return axes;
}

bool map_time_varying(const dynamics::BLMap& map) {
  if (map.filippov.has_value()) return true;
  for (const auto& [id, rule] : map.regions)
    if (rule.custom) return true;
  return false;
}

//! Running worst-site tracker keyed by stratum id (deterministic order).
struct WorstSites {
  std::map<int, report::Site> by_stratum;
  void offer(const report::Site& s, bool maximize) {
    auto it = by_stratum.find(*s.stratum);
    if (it == by_stratum.end()) {
      by_stratum.emplace(*s.stratum, s);
    } else if (maximize ? s.residual > it->second.residual
                        : s.residual < it->second.residual) {
      it->second = s;
    }
  }
};

//! Per-step interpolation bound: largest second difference over every
//! slice and axis, divided by four.
double per_step_interp_bound(const solver::ValueGrid& grid) {
  double worst = 0.0;
  const auto& shape = grid.shape();
  for (std::size_t s = 0; s < grid.slices(); ++s)
    for (std::size_t flat = 0; flat < grid.nodes(); ++flat) {
      const auto idx = grid.unflatten(flat);
      for (std::size_t a = 0; a < shape.size(); ++a) {
        if (idx[a] == 0 || idx[a] + 1 == shape[a]) continue;
        auto ip = idx, im = idx;
        ++ip[a];
        --im[a];
        const double dd = grid.at(s, grid.flatten(ip)) -
                          2.0 * grid.at(s, flat) +
                          grid.at(s, grid.flatten(im));
        worst = std::max(worst, std::abs(dd));
      }
    }
  return worst / 4.0;
}

bool inner_half(const Vec& x, const geometry::Box& box) {
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double q = 0.25 * (box.hi[i] - box.lo[i]);
    if (x[i] < box.lo[i] + q - 1e-9 || x[i] > box.hi[i] - q + 1e-9)
      return false;
  }
  return true;
}

}  // namespace

report::CheckReport viscosity_sub_check(const solver::ValueGrid& grid,
                                        const solver::StratifiedProblem& prob,
                                        double tol) {
  if (!(tol > 0.0))
    throw ConfigError("viscosity_sub_check: tol must be positive");
  require_match(grid, prob);
  if (grid.slices() < 2)
    throw PreconditionError("viscosity checks need at least two time slices");
  const geometry::FlatStratification& fs = prob.strat;
  const std::size_t N = grid.dimension();
  const auto info = classify(grid, fs);
  const auto axes = tangent_axes(fs);
  const bool varying = map_time_varying(prob.map);

  std::vector<dynamics::GeneratorSet> cache;
  if (!varying) {
    cache.reserve(grid.nodes());
    for (std::size_t flat = 0; flat < grid.nodes(); ++flat)
      cache.push_back(dynamics::evaluate_at(prob.map, fs, *info[flat].s,
                                            grid.node(flat), 0.0));
  }

  report::CheckReport rep;
  rep.check = "viscosity_sub";
  rep.tolerance = tol;

  WorstSites worst;
  std::vector<report::Site> failures;
  std::map<std::string, double> stratum_worst;
  double global_worst = -std::numeric_limits<double>::infinity();
  std::size_t checked = 0, unconstrained = 0;
  const double dt = grid.dt();

  for (std::size_t n = 1; n < grid.slices(); ++n) {
    const double t_prev = static_cast<double>(n - 1) * dt;
    for (std::size_t flat = 0; flat < grid.nodes(); ++flat) {
      const NodeInfo& ni = info[flat];
      if (ni.boundary) continue;
      const geometry::Stratum& s = *ni.s;
      const auto idx = grid.unflatten(flat);

      const bool full_dim = s.dim == static_cast<int>(N);
      std::vector<std::size_t> diff_axes;
      if (full_dim) {
        diff_axes.resize(N);
        std::iota(diff_axes.begin(), diff_axes.end(), std::size_t{0});
      } else {
        diff_axes = axes[static_cast<std::size_t>(s.id)];
      }
      const double u_t = (grid.at(n, flat) - grid.at(n - 1, flat)) / dt;

      dynamics::GeneratorSet local;
      const dynamics::GeneratorSet* gp;
      if (varying) {
        local = dynamics::evaluate_at(prob.map, fs, s, grid.node(flat), t_prev);
        gp = &local;
      } else {
        gp = &cache[flat];
      }

      // Most favorable tangential gradient candidate, mirroring the
      // supersolution convention.  Candidates are the 2^k one-sided
      // combinations plus the centered vector: one-sided slopes bound the
      // gradients of test functions touching from above, and the centered
      // average covers the interior of that interval at valley kinks,
      // where the superdifferential is empty and the condition vacuous.
      // Scoring the best candidate keeps kink nodes at the scheme's
      // consistency order instead of charging them the slope jump.
      const std::size_t k = diff_axes.size();
      double residual = std::numeric_limits<double>::infinity();
      bool constrained = true;
      const std::size_t candidates = (std::size_t{1} << k) + 1;
      for (std::size_t combo = 0; combo < candidates; ++combo) {
        const bool central = combo == candidates - 1;
        Vec p(N, 0.0);
        for (std::size_t j = 0; j < k; ++j) {
          const std::size_t a = diff_axes[j];
          auto ip = idx, im = idx;
          ++ip[a];
          --im[a];
          const double fwd =
              (grid.at(n - 1, grid.flatten(ip)) - grid.at(n - 1, flat)) /
              grid.dx()[a];
          const double bwd =
              (grid.at(n - 1, flat) - grid.at(n - 1, grid.flatten(im))) /
              grid.dx()[a];
          p[a] = central ? 0.5 * (fwd + bwd) : (((combo >> j) & 1u) ? fwd : bwd);
        }
        const auto hv = hamiltonians::hamiltonian_tangential(*gp, s, p);
        if (!hv.finite) {
          // Emptiness of the tangential set does not depend on p.
          constrained = false;
          break;
        }
        residual = std::min(residual, u_t + hv.value);
      }
      ++checked;
      if (!constrained) {
        ++unconstrained;
        continue;
      }
      global_worst = std::max(global_worst, residual);
      auto it = stratum_worst.find(s.name);
      if (it == stratum_worst.end() || residual > it->second)
        stratum_worst[s.name] = residual;

      report::Site site;
      site.location = grid.node(flat);
      site.time = static_cast<double>(n) * dt;
      site.stratum = s.id;
      site.residual = residual;
      site.pass = residual <= tol;
      worst.offer(site, true);
      if (!site.pass && failures.size() < kMaxRecordedFailures)
        failures.push_back(std::move(site));
    }
  }

  for (auto& f : failures) rep.sites.push_back(std::move(f));
  for (auto& [id, site] : worst.by_stratum)
    if (site.pass) rep.sites.push_back(site);
  rep.max_residual =
      checked > unconstrained ? global_worst : 0.0;
  rep.pass = rep.max_residual <= tol;
  rep.extra["per_stratum_max_residual"] = stratum_worst;
  rep.extra["sites_checked"] = checked;
  rep.extra["tangentially_unconstrained_sites"] = unconstrained;
  return rep;
}

report::CheckReport viscosity_super_check(
    const solver::ValueGrid& grid, const solver::StratifiedProblem& prob,
    double tol) {
  if (!(tol > 0.0))
    throw ConfigError("viscosity_super_check: tol must be positive");
  require_match(grid, prob);
  if (grid.slices() < 2)
    throw PreconditionError("viscosity checks need at least two time slices");
  const geometry::FlatStratification& fs = prob.strat;
  const std::size_t N = grid.dimension();
  const auto info = classify(grid, fs);
  (void)tangent_axes(fs);  // validates lattice alignment
  const bool varying = map_time_varying(prob.map);

  std::vector<dynamics::GeneratorSet> cache;
  if (!varying) {
    cache.reserve(grid.nodes());
    for (std::size_t flat = 0; flat < grid.nodes(); ++flat)
      cache.push_back(dynamics::evaluate_at(prob.map, fs, *info[flat].s,
                                            grid.node(flat), 0.0));
  }

  report::CheckReport rep;
  rep.check = "viscosity_super";
  rep.tolerance = tol;

  WorstSites worst;
  std::vector<report::Site> failures;
  std::map<std::string, double> stratum_worst;
  double global_worst = -std::numeric_limits<double>::infinity();
  std::size_t checked = 0;
  const double dt = grid.dt();

  for (std::size_t n = 1; n < grid.slices(); ++n) {
    const double t_prev = static_cast<double>(n - 1) * dt;
    for (std::size_t flat = 0; flat < grid.nodes(); ++flat) {
      const NodeInfo& ni = info[flat];
      if (ni.boundary) continue;
      const geometry::Stratum& s = *ni.s;
      const auto idx = grid.unflatten(flat);
      const double u_t = (grid.at(n, flat) - grid.at(n - 1, flat)) / dt;

      dynamics::GeneratorSet local;
      const dynamics::GeneratorSet* gp;
      if (varying) {
        local = dynamics::evaluate_at(prob.map, fs, s, grid.node(flat), t_prev);
        gp = &local;
      } else {
        gp = &cache[flat];
      }

      // Most favorable one-sided gradient combination.
      double best = -std::numeric_limits<double>::infinity();
      for (std::size_t combo = 0; combo < (std::size_t{1} << N); ++combo) {
        Vec p(N);
        for (std::size_t a = 0; a < N; ++a) {
          auto ia = idx;
          if ((combo >> a) & 1u) {
            ++ia[a];
            p[a] = (grid.at(n - 1, grid.flatten(ia)) - grid.at(n - 1, flat)) /
                   grid.dx()[a];
          } else {
            --ia[a];
            p[a] = (grid.at(n - 1, flat) - grid.at(n - 1, grid.flatten(ia))) /
                   grid.dx()[a];
          }
        }
        best = std::max(best,
                        u_t + hamiltonians::hamiltonian_full(*gp, p).value);
      }
      ++checked;
      const double residual = -best;  // pass iff u_t + H >= -tol
      global_worst = std::max(global_worst, residual);
      auto it = stratum_worst.find(s.name);
      if (it == stratum_worst.end() || residual > it->second)
        stratum_worst[s.name] = residual;

      report::Site site;
      site.location = grid.node(flat);
      site.time = static_cast<double>(n) * dt;
      site.stratum = s.id;
      site.residual = residual;
      site.pass = residual <= tol;
      worst.offer(site, true);
      if (!site.pass && failures.size() < kMaxRecordedFailures)
        failures.push_back(std::move(site));
    }
  }

  for (auto& f : failures) rep.sites.push_back(std::move(f));
  for (auto& [id, site] : worst.by_stratum)
    if (site.pass) rep.sites.push_back(site);
  rep.max_residual = checked ? global_worst : 0.0;
  rep.pass = rep.max_residual <= tol;
  rep.extra["per_stratum_max_residual"] = stratum_worst;
  rep.extra["sites_checked"] = checked;
  return rep;
}

report::CheckReport dpp_check(const solver::ValueGrid& grid,
                              const solver::StratifiedProblem& prob,
                              int tau_steps, const SiteSpec& sites) {
  if (tau_steps < 1) throw PreconditionError("dpp_check: tau_steps >= 1");
  require_match(grid, prob);
  if (grid.slices() <= static_cast<std::size_t>(tau_steps))
    throw PreconditionError("dpp_check: grid has too few slices for tau");
  const geometry::FlatStratification& fs = prob.strat;
  const auto info = classify(grid, fs);
  const double dt = grid.dt();

  const double bound = per_step_interp_bound(grid);
  const double tol = static_cast<double>(tau_steps) * bound + 1e-12;

  // Deterministic site list: first interior node of each stratum at the top
  // slice, then seeded random (node, slice) picks.
  std::vector<std::pair<std::size_t, std::size_t>> picks;
  std::set<std::pair<std::size_t, std::size_t>> seen;
  for (const geometry::Stratum& s : fs.strata())
    for (std::size_t flat = 0; flat < grid.nodes(); ++flat)
      if (info[flat].s->id == s.id && !info[flat].boundary) {
        auto key = std::make_pair(flat, grid.slices() - 1);
        if (seen.insert(key).second) picks.push_back(key);
        break;
      }
  std::mt19937 rng(sites.seed);
  std::uniform_int_distribution<std::size_t> node_pick(0, grid.nodes() - 1);
  std::uniform_int_distribution<std::size_t> slice_pick(
      static_cast<std::size_t>(tau_steps), grid.slices() - 1);
  const std::size_t want = picks.size() + sites.count;
  for (std::size_t tries = 0; tries < sites.count * 20 && picks.size() < want;
       ++tries) {
    const std::size_t flat = node_pick(rng);
    const std::size_t n = slice_pick(rng);
    if (info[flat].boundary) continue;
    auto key = std::make_pair(flat, n);
    if (seen.insert(key).second) picks.push_back(key);
  }

  report::CheckReport rep;
  rep.check = "dpp";
  rep.tolerance = tol;
  long long leaves = 0;

  std::function<double(const Vec&, std::size_t, int)> rec =
      [&](const Vec& y, std::size_t slice, int k) -> double {
    const double t_prev = static_cast<double>(slice - 1) * dt;
    const auto gs = dynamics::evaluate(prob.map, fs, y, t_prev);
    if (gs.size() > 64)
      throw ComplexityGuardError("dpp limited to 64 generators per point");
    if (k == 1) return solver::one_step_cost(grid, slice - 1, y, gs, dt);
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < gs.size(); ++j) {
      if (++leaves > kMaxSequences)
        throw ComplexityGuardError("dpp sequence enumeration too large");
      Vec z = y;
      axpy(dt, gs[j].b, z);
      const geometry::Box& box = fs.box();
      for (std::size_t i = 0; i < z.size(); ++i)
        z[i] = std::min(box.hi[i], std::max(box.lo[i], z[i]));
      best = std::min(best, dt * gs[j].l + rec(z, slice - 1, k - 1));
    }
    return best;
  };

  double res_min = 0.0, res_max = 0.0;
  for (const auto& [flat, n] : picks) {
    const Vec x = grid.node(flat);
    const double stored = grid.at(n, flat);
    const double dpp = rec(x, n, tau_steps);
    const double residual = dpp - stored;
    res_min = std::min(res_min, residual);
    res_max = std::max(res_max, residual);
    report::Site site;
    site.location = x;
    site.time = static_cast<double>(n) * dt;
    site.stratum = info[flat].s->id;
    site.residual = residual;
    site.pass = std::abs(residual) <= tol;
    rep.add(std::move(site));
  }
  rep.extra["per_step_bound"] = bound;
  rep.extra["tau_steps"] = tau_steps;
  rep.extra["min_signed_residual"] = res_min;
  rep.extra["max_signed_residual"] = res_max;
  return rep;
}

report::CheckReport filippov_study(const solver::StratifiedProblem& prob,
                                   const std::vector<double>& eps_list,
                                   double dx, double dt, double tol,
                                   const solver::SolveOptions& opts) {
  if (eps_list.empty()) throw ConfigError("filippov_study: empty eps_list");
  for (double e : eps_list)
    if (!(e > 0.0)) throw ConfigError("filippov_study: eps must be positive");
  for (std::size_t i = 1; i < eps_list.size(); ++i)
    if (eps_list[i] > eps_list[i - 1] + 1e-12)
      throw ConfigError("filippov_study: eps_list must be decreasing");
  for (double e : eps_list)
    if (e < 2.0 * dx - 1e-12)
      throw PreconditionError("filippov_study: every eps must be >= 2*dx");
  if (prob.map.filippov.has_value())
    throw ConfigError("filippov_study: map is already regularized");

  const solver::ValueGrid base = solver::solve_value(prob, dx, dt, opts);
  const geometry::Box& box = prob.strat.box();
  std::vector<std::size_t> inner;
  for (std::size_t flat = 0; flat < base.nodes(); ++flat)
    if (inner_half(base.node(flat), box)) inner.push_back(flat);

  report::CheckReport rep;
  rep.check = "filippov_study";
  rep.tolerance = tol;
  nlohmann::json table = nlohmann::json::array();
  double prev = std::numeric_limits<double>::infinity();
  bool monotone = true;
  double last = 0.0;

  const int m = prob.map.filippov ? prob.map.filippov->samples_per_eps : 3;
  for (double eps : eps_list) {
    solver::StratifiedProblem reg = prob;
    reg.map = dynamics::filippov_regularize(prob.map, eps, m, prob.horizon);
    const solver::ValueGrid ge = solver::solve_value(reg, dx, dt, opts);

    double e = 0.0;
    if (ge.slices() == base.slices() && ge.dt() == base.dt()) {
      for (std::size_t s = 0; s < base.slices(); ++s)
        for (std::size_t flat : inner)
          e = std::max(e, std::abs(ge.at(s, flat) - base.at(s, flat)));
    } else {
      for (std::size_t flat : inner)
        e = std::max(e, std::abs(ge.at(ge.slices() - 1, flat) -
                                 base.at(base.slices() - 1, flat)));
    }
    const bool mono_here =
        !std::isfinite(prev) || e <= 1.1 * prev + 1e-12;
    monotone = monotone && mono_here;

    report::Site site;
    site.location = prob.strat.box().lo;
    site.residual = e;
    site.pass = mono_here;
    site.note = "eps=" + std::to_string(eps);
    rep.sites.push_back(std::move(site));
    table.push_back({{"eps", eps}, {"max_difference", e}});
    prev = e;
    last = e;
    rep.max_residual = std::max(rep.max_residual, e);
  }
  rep.pass = monotone && last <= tol;
  if (!rep.pass && !rep.sites.empty()) rep.sites.back().pass = last <= tol;
  rep.extra["table"] = std::move(table);
  rep.extra["final_difference"] = last;
  rep.extra["monotone"] = monotone;
  return rep;
}

report::CheckReport scheme_agreement(const solver::StratifiedProblem& prob,
                                     double dx1, double dt1, double dx2,
                                     double dt2,
                                     const solver::SolveOptions& opts) {
  if (dx2 > dx1 + 1e-15 || dt2 > dt1 + 1e-15)
    throw PreconditionError(
        "scheme_agreement: second resolution must not be coarser");

  const geometry::Box& box = prob.strat.box();
  auto compare_final = [&](const solver::ValueGrid& coarse,
                           const solver::ValueGrid& fine) {
    double worst = 0.0;
    std::size_t common = 0;
    for (std::size_t flat = 0; flat < coarse.nodes(); ++flat) {
      const Vec x = coarse.node(flat);
      if (!inner_half(x, box)) continue;
      bool on_fine = true;
      std::vector<std::size_t> idx(x.size());
      for (std::size_t i = 0; i < x.size(); ++i) {
        const double u = (x[i] - fine.lo()[i]) / fine.dx()[i];
        const double r = std::round(u);
        if (std::abs(u - r) > 1e-6) {
          on_fine = false;
          break;
        }
        idx[i] = static_cast<std::size_t>(r);
      }
      if (!on_fine) continue;
      ++common;
      worst = std::max(worst,
                       std::abs(coarse.at(coarse.slices() - 1, flat) -
                                fine.at(fine.slices() - 1, fine.flatten(idx))));
    }
    if (common == 0)
      throw PreconditionError("scheme_agreement: no common inner nodes");
    return worst;
  };

  const solver::ValueGrid g1 = solver::solve_value(prob, dx1, dt1, opts);
  const bool identical = dx1 == dx2 && dt1 == dt2;
  const solver::ValueGrid g2 = solver::solve_value(prob, dx2, dt2, opts);
  const double d12 = compare_final(g1, g2);

  double d23 = 0.0;
  if (!identical) {
    const double dx3 = dx2 * dx2 / dx1;
    const double dt3 = dt2 * dt2 / dt1;
    const solver::ValueGrid g3 = solver::solve_value(prob, dx3, dt3, opts);
    d23 = compare_final(g2, g3);
  }

  report::CheckReport rep;
  rep.check = "scheme_agreement";
  rep.tolerance = d12;
  report::Site coarse_site;
  coarse_site.location = box.lo;
  coarse_site.residual = d12;
  coarse_site.pass = true;
  coarse_site.note = "coarse vs fine";
  rep.add(std::move(coarse_site));
  report::Site fine_site;
  fine_site.location = box.lo;
  fine_site.residual = d23;
  fine_site.pass = d23 <= d12 + 1e-15;
  fine_site.note = "fine vs continuation";
  rep.add(std::move(fine_site));
  rep.extra["difference_coarse_fine"] = d12;
  rep.extra["difference_fine_continuation"] = d23;
  rep.extra["reduction_ratio"] =
      d23 > 0.0 ? d12 / d23 : std::numeric_limits<double>::infinity();
  rep.extra["resolutions"] = {{"dx1", dx1}, {"dt1", dt1},
                              {"dx2", dx2}, {"dt2", dt2}};
  return rep;
}

}  // namespace strathjb::verify
