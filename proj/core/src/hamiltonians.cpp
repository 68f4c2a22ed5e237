#include "strathjb/hamiltonians.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "strathjb/errors.hpp"
#include "strathjb/lp.hpp"

namespace strathjb::hamiltonians {
namespace {

constexpr double kBisectResolution = 1e-6;
constexpr double kUnboundedFit = 1e6;
constexpr double kBigP = 64.0;

//! Deterministic unit directions spanning the space of the given orthonormal
//! basis vectors: axes, pairwise diagonals, and for dimension >= 3 the body
//! diagonals. Dimension 2 uses an eight-point circle.
std::vector<Vec> sphere_directions(const std::vector<Vec>& basis,
                                   std::size_t ambient) {
  std::vector<Vec> dirs;
  if (basis.empty()) return dirs;
  const std::size_t k = basis.size();
  auto blend = [&](const std::vector<double>& w) {
    Vec d(ambient, 0.0);
    for (std::size_t i = 0; i < k; ++i) axpy(w[i], basis[i], d);
    const double len = norm2(d);
    for (double& c : d) c /= len;
    dirs.push_back(std::move(d));
  };
  if (k == 1) {
    blend({1.0});
    blend({-1.0});
  } else if (k == 2) {
    for (int a = 0; a < 8; ++a) {
      const double ang = 2.0 * M_PI * static_cast<double>(a) / 8.0;
      blend({std::cos(ang), std::sin(ang)});
    }
  } else {
    std::vector<double> w(k, 0.0);
    for (std::size_t i = 0; i < k; ++i)
      for (double s : {1.0, -1.0}) {
        std::fill(w.begin(), w.end(), 0.0);
        w[i] = s;
        blend(w);
      }
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = i + 1; j < k; ++j)
        for (double si : {1.0, -1.0})
          for (double sj : {1.0, -1.0}) {
            std::fill(w.begin(), w.end(), 0.0);
            w[i] = si;
            w[j] = sj;
            blend(w);
          }
    if (k == 3)
      for (double s0 : {1.0, -1.0})
        for (double s1 : {1.0, -1.0})
          for (double s2 : {1.0, -1.0}) blend({s0, s1, s2});
  }
  return dirs;
}

//! Membership of a velocity point in the hull of the generators' velocities.
bool velocity_member(const dynamics::GeneratorSet& gs, const Vec& v) {
  const std::size_t n = v.size();
  const std::size_t rows = n + 1;
  const std::size_t cols = gs.size();
  std::vector<double> A(rows * cols), rhs(rows);
  for (std::size_t j = 0; j < cols; ++j) {
    for (std::size_t i = 0; i < n; ++i) A[i * cols + j] = gs[j].b[i];
    A[n * cols + j] = 1.0;
  }
  for (std::size_t i = 0; i < n; ++i) rhs[i] = v[i];
  rhs[n] = 1.0;
  return lp::feasible(rows, cols, A, rhs);
}

//! Largest delta <= target with the whole segment [0, delta]d inside the
//! velocity hull. Membership along the ray is an interval, so once 0 is
//! inside, bisection applies.
double certified_delta(const dynamics::GeneratorSet& gs, const Vec& d,
                       double target) {
  const Vec zero(d.size(), 0.0);
  if (!velocity_member(gs, zero)) return 0.0;
  if (velocity_member(gs, scaled(target, d))) return target;
  double lo = 0.0, hi = target;
  while (hi - lo > kBisectResolution) {
    const double mid = 0.5 * (lo + hi);
    (velocity_member(gs, scaled(mid, d)) ? lo : hi) = mid;
  }
  return lo;
}

//! Support-difference estimate of the Hausdorff distance between the
//! velocity hulls of two sets, over ambient axes and pairwise diagonals.
double hull_support_distance(const dynamics::GeneratorSet& a,
                             const dynamics::GeneratorSet& b,
                             std::size_t ambient) {
  auto support = [](const dynamics::GeneratorSet& gs, const Vec& d) {
    double m = -std::numeric_limits<double>::infinity();
    for (const auto& g : gs.generators()) m = std::max(m, dot(d, g.b));
    return m;
  };
  double worst = 0.0;
  auto probe = [&](Vec d) {
    const double len = norm2(d);
    for (double& c : d) c /= len;
    worst = std::max(worst, std::abs(support(a, d) - support(b, d)));
  };
  for (std::size_t i = 0; i < ambient; ++i)
    for (double s : {1.0, -1.0}) {
      Vec d(ambient, 0.0);
      d[i] = s;
      probe(d);
    }
  for (std::size_t i = 0; i < ambient; ++i)
    for (std::size_t j = i + 1; j < ambient; ++j)
      for (double si : {1.0, -1.0})
        for (double sj : {1.0, -1.0}) {
          Vec d(ambient, 0.0);
          d[i] = si;
          d[j] = sj;
          probe(d);
        }
  return worst;
}

}  // namespace

HamiltonianValue hamiltonian_full(const dynamics::GeneratorSet& gs,
                                  const Vec& p) {
  if (gs.empty()) throw ConfigError("hamiltonian_full: empty generator set");
  HamiltonianValue out;
  std::size_t best = 0;
  double best_v = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < gs.size(); ++j) {
    const double v = -dot(gs[j].b, p) - gs[j].l;
    if (v > best_v) {
      best_v = v;
      best = j;
    }
  }
  out.value = best_v;
  out.finite = true;
  out.argmax.assign(gs.size(), 0.0);
  out.argmax[best] = 1.0;
  out.active_velocity = gs[best].b;
  out.active_cost = gs[best].l;
  return out;
}

HamiltonianValue hamiltonian_tangential(const dynamics::GeneratorSet& gs,
                                        const geometry::Stratum& s,
                                        const Vec& p) {
  if (gs.empty())
    throw ConfigError("hamiltonian_tangential: empty generator set");
  if (s.normal_basis.empty()) return hamiltonian_full(gs, p);

  // The objective uses p_top only, making p_bot-invariance exact.
  const Vec p_top = geometry::split_covector(s, p).top;
  const std::size_t cols = gs.size();
  const std::size_t rows = s.normal_basis.size() + 1;
  std::vector<double> A(rows * cols), rhs(rows, 0.0), c(cols);
  for (std::size_t j = 0; j < cols; ++j) {
    for (std::size_t i = 0; i < s.normal_basis.size(); ++i)
      A[i * cols + j] = dot(gs[j].b, s.normal_basis[i]);
    A[s.normal_basis.size() * cols + j] = 1.0;
    c[j] = -dot(gs[j].b, p_top) - gs[j].l;
  }
  rhs[s.normal_basis.size()] = 1.0;

  const lp::Solution sol = lp::solve_max(rows, cols, A, rhs, c, true);
  HamiltonianValue out;
  if (sol.status != lp::Status::Optimal) {
    out.value = -std::numeric_limits<double>::infinity();
    out.finite = false;
    return out;
  }
  out.value = sol.value;
  out.finite = true;
  out.argmax = sol.x;
  out.active_velocity.assign(p.size(), 0.0);
  out.active_cost = 0.0;
  for (std::size_t j = 0; j < cols; ++j) {
    axpy(sol.x[j], gs[j].b, out.active_velocity);
    out.active_cost += sol.x[j] * gs[j].l;
  }
  return out;
}

report::AssumptionReport check_nc(const dynamics::BLMap& map,
                                  const geometry::FlatStratification& fs,
                                  double delta_target, double sample_density) {
  if (!(delta_target > 0.0))
    throw ConfigError("check_nc: delta_target must be positive");
  if (!(sample_density > 0.0))
    throw ConfigError("check_nc: sample_density must be positive");
  const double h = 1.0 / sample_density;
  report::AssumptionReport rep;
  rep.assumption = "nc";
  nlohmann::json deltas = nlohmann::json::object();

  for (const geometry::Stratum& s : fs.strata()) {
    if (s.dim == fs.dimension()) continue;
    report::CheckReport entry;
    entry.check = "nc:" + s.name;
    entry.tolerance = kBisectResolution;

    const auto dirs = sphere_directions(s.normal_basis, s.basepoint.size());
    auto base = geometry::sample_stratum(fs, s, sample_density, 256);
    const std::size_t stride = std::max<std::size_t>(1, base.size() / 8);

    // Probe points straddle the stratum inside the adjacent regions.
    std::vector<Vec> probes;
    for (std::size_t a = 0; a < base.size(); a += stride)
      for (const Vec& nb : s.normal_basis)
        for (double sign : {1.0, -1.0})
          for (double rho : {0.5 * h, 0.125 * h}) {
            Vec y = base[a];
            axpy(sign * rho, nb, y);
            if (fs.box().contains(y, -fs.snap_tol())) probes.push_back(y);
          }
    if (probes.empty()) probes.push_back(s.basepoint);

    double delta_entry = delta_target;
    std::vector<std::pair<Vec, dynamics::GeneratorSet>> evaluated;
    for (const Vec& y : probes) {
      const dynamics::GeneratorSet gs = dynamics::evaluate(map, fs, y, 0.0);
      double delta_y = delta_target;
      for (const Vec& d : dirs)
        delta_y = std::min(delta_y, certified_delta(gs, d, delta_target));
      report::Site site;
      site.location = y;
      site.stratum = s.id;
      site.residual = delta_y;
      site.pass = delta_y >= kBisectResolution;
      if (!site.pass) site.note = "no positive controllability radius";
      entry.add(std::move(site));
      delta_entry = std::min(delta_entry, delta_y);
      evaluated.emplace_back(y, gs);
    }

    // Hamiltonian-side lower bound implied by the set condition.
    double c2 = 0.0;
    for (const auto& [y, gs] : evaluated)
      c2 = std::max(c2, gs.max_velocity_norm() + gs.max_cost_abs());
    bool h_form = true;
    if (!s.normal_basis.empty()) {
      const Vec& nd = s.normal_basis.front();
      const Vec td = s.tangent_basis.empty() ? Vec(s.basepoint.size(), 0.0)
                                             : s.tangent_basis.front();
      for (const auto& [y, gs] : evaluated)
        for (const double alpha : {0.0, 1.0})
          for (const double beta : {1.0, 8.0}) {
            Vec p = scaled(alpha, td);
            axpy(beta, nd, p);
            const auto split = geometry::split_covector(s, p);
            const double lhs = hamiltonian_full(gs, p).value;
            const double rhs = delta_entry * norm2(split.bot) -
                               c2 * (1.0 + norm2(split.top));
            if (lhs < rhs - 1e-9) h_form = false;
          }
    }

    entry.extra["delta"] = delta_entry;
    entry.extra["c2"] = c2;
    entry.extra["h_form_pass"] = h_form;
    entry.pass = entry.pass && h_form;
    deltas[s.name] = delta_entry;
    rep.pass = rep.pass && entry.pass;
    rep.entries.push_back(std::move(entry));
  }
  rep.summary["nc_delta"] = std::move(deltas);
  rep.summary["delta_target"] = delta_target;
  return rep;
}

report::AssumptionReport check_tc(const dynamics::BLMap& map,
                                  const geometry::FlatStratification& fs,
                                  double sample_density) {
  if (!(sample_density > 0.0))
    throw ConfigError("check_tc: sample_density must be positive");
  const double h = 1.0 / sample_density;
  report::AssumptionReport rep;
  rep.assumption = "tc";
  double c1_global = 0.0, c1_sets_global = 0.0;
  nlohmann::json modulus_global = nlohmann::json::object();

  for (const geometry::Stratum& s : fs.strata()) {
    report::CheckReport entry;
    entry.check = "tc:" + s.name;
    entry.tolerance = kUnboundedFit;

    // Pair directions: the stratum's own tangents plus every lower stratum's
    // tangents that lie in this span (the translation-invariant directions).
    std::vector<Vec> dirs = s.tangent_basis;
    for (const geometry::Stratum& q : fs.strata()) {
      if (q.dim >= s.dim) continue;
      for (const Vec& v : q.tangent_basis) {
        const auto split = geometry::split_covector(s, v);
        if (norm2(split.bot) > 1e-9) continue;
        bool dup = false;
        for (const Vec& have : dirs)
          if (std::abs(std::abs(dot(have, v)) - 1.0) < 1e-9) dup = true;
        if (!dup) dirs.push_back(v);
      }
    }

    std::vector<Vec> p_unit;
    for (const Vec& t : s.tangent_basis) {
      p_unit.push_back(t);
      p_unit.push_back(scaled(-1.0, t));
    }
    if (p_unit.empty()) p_unit.push_back(Vec(s.basepoint.size(), 0.0));

    auto base = geometry::sample_stratum(fs, s, sample_density, 256);
    const std::size_t stride = std::max<std::size_t>(1, base.size() / 10);

    double c1 = 0.0, c1_sets = 0.0, c1_local = 0.0;
    bool unbounded = false;
    Vec witness = s.basepoint;
    nlohmann::json modulus = nlohmann::json::object();
    const geometry::Box& bx = fs.box();
    auto in_half_box = [&](const Vec& x) {
      for (std::size_t i = 0; i < x.size(); ++i) {
        const double q = 0.25 * (bx.hi[i] - bx.lo[i]);
        if (x[i] < bx.lo[i] + q || x[i] > bx.hi[i] - q) return false;
      }
      return true;
    };

    for (std::size_t a = 0; a < base.size(); a += stride) {
      const Vec& x = base[a];
      const dynamics::GeneratorSet gx = dynamics::evaluate_at(map, fs, s, x, 0.0);
      for (const Vec& v : dirs)
        for (const double dist : {h, 0.5 * h, 0.25 * h}) {
          Vec y = x;
          axpy(dist, v, y);
          if (!bx.contains(y, fs.snap_tol()) || !fs.member(s, y)) continue;
          const dynamics::GeneratorSet gy =
              dynamics::evaluate_at(map, fs, s, y, 0.0);

          double worst_unit = 0.0;
          bool feasibility_jump = false;
          for (const Vec& p : p_unit) {
            const auto hx = hamiltonian_tangential(gx, s, p);
            const auto hy = hamiltonian_tangential(gy, s, p);
            if (hx.finite != hy.finite) {
              feasibility_jump = true;
              continue;
            }
            if (!hx.finite) continue;
            worst_unit = std::max(worst_unit, std::abs(hx.value - hy.value));
          }
          const std::string key = "d=" + std::to_string(dist);
          const double prev = modulus.contains(key)
                                  ? modulus[key].get<double>()
                                  : 0.0;
          modulus[key] = std::max(prev, worst_unit);

          double slope = 0.0;
          if (!s.tangent_basis.empty()) {
            const Vec pb = scaled(kBigP, s.tangent_basis.front());
            const auto hx = hamiltonian_tangential(gx, s, pb);
            const auto hy = hamiltonian_tangential(gy, s, pb);
            if (hx.finite && hy.finite)
              slope = std::abs(hx.value - hy.value) / (kBigP * dist);
          }
          const double dh = hull_support_distance(gx, gy, x.size()) / dist;
          if (slope > c1 || feasibility_jump) witness = x;
          c1 = std::max(c1, slope);
          c1_sets = std::max(c1_sets, dh);
          if (in_half_box(x) && in_half_box(y))
            c1_local = std::max(c1_local, slope);
          if (feasibility_jump || slope > kUnboundedFit || dh > kUnboundedFit)
            unbounded = true;
        }
    }

    // Time modulus; the generator schema is autonomous so this is zero unless
    // a regularized map clips its sample ball near the time boundary.
    double m_time = 0.0;
    for (std::size_t a = 0; a < base.size(); a += stride) {
      const dynamics::GeneratorSet g0 =
          dynamics::evaluate_at(map, fs, s, base[a], 0.0);
      for (const double t : {0.5, 1.0}) {
        const dynamics::GeneratorSet gt =
            dynamics::evaluate_at(map, fs, s, base[a], t);
        for (const Vec& p : p_unit) {
          const auto h0 = hamiltonian_tangential(g0, s, p);
          const auto ht = hamiltonian_tangential(gt, s, p);
          if (h0.finite && ht.finite)
            m_time = std::max(m_time, std::abs(h0.value - ht.value));
        }
      }
    }

    report::Site site;
    site.location = witness;
    site.stratum = s.id;
    site.residual = c1;
    site.pass = !unbounded;
    if (unbounded) site.note = "unbounded continuity fit (jump witness)";
    entry.add(std::move(site));
    entry.extra["c1_hamiltonian"] = c1;
    entry.extra["c1_sets"] = c1_sets;
    entry.extra["c1_local_half_box"] = c1_local;
    entry.extra["locality_sharper"] = c1_local < 0.5 * c1;
    entry.extra["modulus"] = modulus;
    entry.extra["modulus_time"] = m_time;
    entry.pass = !unbounded;
    rep.pass = rep.pass && entry.pass;
    c1_global = std::max(c1_global, c1);
    c1_sets_global = std::max(c1_sets_global, c1_sets);
    modulus_global[s.name] = modulus;
    rep.entries.push_back(std::move(entry));
  }
  rep.summary["tc_constant"] = c1_global;
  rep.summary["tc_constant_sets"] = c1_sets_global;
  rep.summary["modulus"] = std::move(modulus_global);
  return rep;
}

report::AssumptionReport check_lp_constant(
    const dynamics::BLMap& map, const geometry::FlatStratification& fs,
    double sample_density) {
  if (!(sample_density > 0.0))
    throw ConfigError("check_lp_constant: sample_density must be positive");
  report::AssumptionReport rep;
  rep.assumption = "lp";
  double c3_global = 0.0;

  const std::size_t n = static_cast<std::size_t>(fs.dimension());
  std::vector<Vec> p_probe;
  for (std::size_t i = 0; i < n; ++i)
    for (double sgn : {1.0, -1.0}) {
      Vec p(n, 0.0);
      p[i] = sgn;
      p_probe.push_back(p);
      p[i] = 0.5 * sgn;
      p_probe.push_back(p);
    }
  p_probe.push_back(Vec(n, 0.0));

  for (const geometry::Stratum& s : fs.strata()) {
    report::CheckReport entry;
    entry.check = "lp:" + s.name;
    entry.tolerance = 1e-9;
    auto base = geometry::sample_stratum(fs, s, sample_density, 256);
    const std::size_t stride = std::max<std::size_t>(1, base.size() / 12);
    double c3 = 0.0;
    std::vector<dynamics::GeneratorSet> sets;
    for (std::size_t a = 0; a < base.size(); a += stride) {
      sets.push_back(dynamics::evaluate_at(map, fs, s, base[a], 0.0));
      c3 = std::max(c3, sets.back().max_velocity_norm());
    }
    bool verified = true;
    double worst = 0.0;
    for (const auto& gs : sets)
      for (std::size_t i = 0; i < p_probe.size(); ++i)
        for (std::size_t j = i + 1; j < p_probe.size(); ++j) {
          const double dh = std::abs(hamiltonian_full(gs, p_probe[i]).value -
                                     hamiltonian_full(gs, p_probe[j]).value);
          const double bound = c3 * dist2(p_probe[i], p_probe[j]);
          worst = std::max(worst, dh - bound);
          if (dh > bound + 1e-9) verified = false;
        }
    report::Site site;
    site.location = s.basepoint;
    site.stratum = s.id;
    site.residual = worst;
    site.pass = verified;
    entry.add(std::move(site));
    entry.extra["c3"] = c3;
    entry.pass = verified;
    rep.pass = rep.pass && verified;
    c3_global = std::max(c3_global, c3);
    rep.entries.push_back(std::move(entry));
  }
  rep.summary["lp_constant"] = c3_global;
  return rep;
}

}  // namespace strathjb::hamiltonians
