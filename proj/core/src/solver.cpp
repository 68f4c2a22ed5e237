#include "strathjb/solver.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <istream>
#include <limits>
#include <ostream>
#include <thread>

#include "strathjb/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "binary grid layout assumes a little-endian host");

namespace strathjb::solver {
namespace {

constexpr double kAlignTol = 1e-9;
constexpr long long kMaxSequences = 100000000LL;

double clamp(double v, double lo, double hi) {
  return std::min(hi, std::max(lo, v));
}

Vec clamp_to_box(Vec x, const geometry::Box& box, bool* clipped) {
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double c = clamp(x[i], box.lo[i], box.hi[i]);
    if (c != x[i] && clipped) *clipped = true;
    x[i] = c;
  }
  return x;
}

bool axis_aligned(const Vec& v) {
  std::size_t hits = 0;
  for (double c : v)
    if (std::abs(std::abs(c) - 1.0) < kAlignTol)
      ++hits;
    else if (std::abs(c) > kAlignTol)
      return false;
  return hits == 1;
}

template <typename T>
void write_raw(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_raw(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw ConfigError("truncated binary grid");
  return v;
}

}  // namespace

TerminalCost TerminalCost::distance_to_point(Vec center) {
  TerminalCost g;
  g.kind_ = Kind::DistanceToPoint;
  g.center_ = std::move(center);
  return g;
}

TerminalCost TerminalCost::clipped_cone(Vec center, double slope, double cap) {
  if (slope < 0.0 || cap < 0.0)
    throw ConfigError("clipped cone needs slope >= 0 and cap >= 0");
  TerminalCost g;
  g.kind_ = Kind::ClippedCone;
  g.center_ = std::move(center);
  g.slope_ = slope;
  g.cap_ = cap;
  return g;
}

TerminalCost TerminalCost::constant(double value) {
  TerminalCost g;
  g.kind_ = Kind::Constant;
  g.constant_ = value;
  return g;
}

TerminalCost TerminalCost::tabulated(Vec lo, Vec dx,
                                     std::vector<std::size_t> shape,
                                     std::vector<double> values) {
  if (lo.size() != dx.size() || lo.size() != shape.size())
    throw ConfigError("tabulated cost: inconsistent axis metadata");
  std::size_t n = 1;
  for (std::size_t s : shape) {
    if (s == 0) throw ConfigError("tabulated cost: empty axis");
    n *= s;
  }
  if (values.size() != n)
    throw ConfigError("tabulated cost: value count does not match shape");
  TerminalCost g;
  g.kind_ = Kind::Tabulated;
  g.tab_lo_ = std::move(lo);
  g.tab_dx_ = std::move(dx);
  g.tab_shape_ = std::move(shape);
  g.tab_values_ = std::move(values);
  return g;
}

double TerminalCost::operator()(const Vec& x) const {
  switch (kind_) {
    case Kind::DistanceToPoint:
      return dist2(x, center_);
    case Kind::ClippedCone:
      return std::min(cap_, slope_ * dist2(x, center_));
    case Kind::Constant:
      return constant_;
    case Kind::Tabulated: {
      const std::size_t n = tab_shape_.size();
      std::vector<std::size_t> base(n);
      std::vector<double> frac(n);
      for (std::size_t i = 0; i < n; ++i) {
        const double span = static_cast<double>(tab_shape_[i] - 1);
        const double u =
            clamp((x[i] - tab_lo_[i]) / tab_dx_[i], 0.0, std::max(span, 0.0));
        const double cell =
            std::min(std::floor(u), std::max(span - 1.0, 0.0));
        base[i] = static_cast<std::size_t>(cell);
        frac[i] = u - cell;
      }
      double out = 0.0;
      for (std::size_t corner = 0; corner < (std::size_t{1} << n); ++corner) {
        double w = 1.0;
        std::size_t flat = 0;
        for (std::size_t i = 0; i < n; ++i) {
          const bool hi = (corner >> i) & 1u;
          w *= hi ? frac[i] : 1.0 - frac[i];
          const std::size_t idx =
              std::min(base[i] + (hi ? 1 : 0), tab_shape_[i] - 1);
          flat = flat * tab_shape_[i] + idx;
        }
        out += w * tab_values_[flat];
      }
      return out;
    }
  }
  return 0.0;
}

double TerminalCost::sup_norm(const geometry::Box& box) const {
  switch (kind_) {
    case Kind::Constant:
      return std::abs(constant_);
    case Kind::Tabulated: {
      double m = 0.0;
      for (double v : tab_values_) m = std::max(m, std::abs(v));
      return m;
    }
    default: {
      const std::size_t n = box.lo.size();
      double far = 0.0;
      for (std::size_t corner = 0; corner < (std::size_t{1} << n); ++corner) {
        Vec c(n);
        for (std::size_t i = 0; i < n; ++i)
          c[i] = ((corner >> i) & 1u) ? box.hi[i] : box.lo[i];
        far = std::max(far, dist2(c, center_));
      }
      return kind_ == Kind::DistanceToPoint ? far
                                            : std::min(cap_, slope_ * far);
    }
  }
}

ValueGrid::ValueGrid(Vec lo, Vec dx, std::vector<std::size_t> shape, double dt,
                     std::size_t slices)
    : lo_(std::move(lo)),
      dx_(std::move(dx)),
      shape_(std::move(shape)),
      dt_(dt),
      slices_(slices) {
  if (lo_.size() != dx_.size() || lo_.size() != shape_.size())
    throw ConfigError("value grid: inconsistent axis metadata");
  nodes_ = 1;
  for (std::size_t s : shape_) {
    if (s < 2) throw ConfigError("value grid: each axis needs >= 2 nodes");
    nodes_ *= s;
  }
  if (slices_ == 0) throw ConfigError("value grid: needs >= 1 slice");
  values_.assign(nodes_ * slices_, 0.0);
}

double& ValueGrid::at(std::size_t slice, std::size_t flat) {
  return values_[slice * nodes_ + flat];
}

double ValueGrid::at(std::size_t slice, std::size_t flat) const {
  return values_[slice * nodes_ + flat];
}

std::vector<std::size_t> ValueGrid::unflatten(std::size_t flat) const {
  std::vector<std::size_t> idx(shape_.size());
  for (std::size_t i = shape_.size(); i-- > 0;) {
    idx[i] = flat % shape_[i];
    flat /= shape_[i];
  }
  return idx;
}

std::size_t ValueGrid::flatten(const std::vector<std::size_t>& idx) const {
  std::size_t flat = 0;
  for (std::size_t i = 0; i < shape_.size(); ++i)
    flat = flat * shape_[i] + idx[i];
  return flat;
}

Vec ValueGrid::node(std::size_t flat) const {
  const auto idx = unflatten(flat);
  Vec x(shape_.size());
  for (std::size_t i = 0; i < shape_.size(); ++i)
    x[i] = lo_[i] + static_cast<double>(idx[i]) * dx_[i];
  return x;
}

double ValueGrid::interpolate(std::size_t slice, const Vec& x,
                              bool* clamped) const {
  const std::size_t n = shape_.size();
  std::vector<std::size_t> base(n);
  std::vector<double> frac(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double hi = lo_[i] + static_cast<double>(shape_[i] - 1) * dx_[i];
    const double span = hi - lo_[i];
    const double xc = clamp(x[i], lo_[i], hi);
    if (clamped && std::abs(xc - x[i]) > 1e-12 * (1.0 + span)) *clamped = true;
    const double u = (xc - lo_[i]) / dx_[i];
    const double cell = std::min(std::floor(u),
                                 static_cast<double>(shape_[i] - 2));
    base[i] = static_cast<std::size_t>(std::max(cell, 0.0));
    frac[i] = u - static_cast<double>(base[i]);
  }
  double out = 0.0;
  for (std::size_t corner = 0; corner < (std::size_t{1} << n); ++corner) {
    double w = 1.0;
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) {
      const bool hi = (corner >> i) & 1u;
      w *= hi ? frac[i] : 1.0 - frac[i];
      idx[i] = std::min(base[i] + (hi ? 1 : 0), shape_[i] - 1);
    }
    if (w != 0.0) out += w * at(slice, flatten(idx));
  }
  return out;
}

double ValueGrid::interpolate_time(const Vec& x, double time) const {
  const double tmax = static_cast<double>(slices_ - 1) * dt_;
  const double t = clamp(time, 0.0, tmax);
  if (slices_ == 1 || dt_ == 0.0) return interpolate(0, x);
  const double u = t / dt_;
  const std::size_t s0 = static_cast<std::size_t>(
      std::min(std::floor(u), static_cast<double>(slices_ - 2)));
  const double theta = u - static_cast<double>(s0);
  const double a = interpolate(s0, x);
  if (theta == 0.0) return a;
  return (1.0 - theta) * a + theta * interpolate(s0 + 1, x);
}

void ValueGrid::write_csv(std::ostream& os) const {
  const std::size_t n = shape_.size();
  for (std::size_t i = 0; i < n; ++i) os << "x" << (i + 1) << ",";
  os << "t,value\n";
  char buf[64];
  for (std::size_t s = 0; s < slices_; ++s) {
    const double t = static_cast<double>(s) * dt_;
    for (std::size_t flat = 0; flat < nodes_; ++flat) {
      const Vec x = node(flat);
      for (std::size_t i = 0; i < n; ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g", x[i]);
        os << buf << ",";
      }
      std::snprintf(buf, sizeof(buf), "%.17g", t);
      os << buf << ",";
      std::snprintf(buf, sizeof(buf), "%.17g", at(s, flat));
      os << buf << "\n";
    }
  }
}

void ValueGrid::write_binary(std::ostream& os) const {
  os.write("SHJB", 4);
  write_raw<std::uint32_t>(os, 1u);
  write_raw<std::uint32_t>(os, static_cast<std::uint32_t>(shape_.size()));
  write_raw<std::uint32_t>(os, static_cast<std::uint32_t>(slices_));
  write_raw<double>(os, dt_);
  for (std::size_t i = 0; i < shape_.size(); ++i) {
    write_raw<std::uint32_t>(os, static_cast<std::uint32_t>(shape_[i]));
    write_raw<double>(os, lo_[i]);
    write_raw<double>(os, dx_[i]);
  }
  os.write(reinterpret_cast<const char*>(values_.data()),
           static_cast<std::streamsize>(values_.size() * sizeof(double)));
}

ValueGrid ValueGrid::read_binary(std::istream& is) {
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, "SHJB", 4) != 0)
    throw ConfigError("not a binary value grid (bad magic)");
  const auto version = read_raw<std::uint32_t>(is);
  if (version != 1u) throw ConfigError("unsupported grid version");
  const auto n = read_raw<std::uint32_t>(is);
  const auto slices = read_raw<std::uint32_t>(is);
  const auto dt = read_raw<double>(is);
  if (n == 0 || n > 8 || slices == 0)
    throw ConfigError("implausible grid header");
  Vec lo(n), dx(n);
  std::vector<std::size_t> shape(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    shape[i] = read_raw<std::uint32_t>(is);
    lo[i] = read_raw<double>(is);
    dx[i] = read_raw<double>(is);
  }
  ValueGrid g(std::move(lo), std::move(dx), std::move(shape), dt, slices);
  is.read(reinterpret_cast<char*>(g.values_.data()),
          static_cast<std::streamsize>(g.values_.size() * sizeof(double)));
  if (!is) throw ConfigError("truncated binary grid values");
  return g;
}

double one_step_cost(const ValueGrid& grid, std::size_t slice, const Vec& x,
                     const dynamics::GeneratorSet& gens, double dt,
                     std::size_t* pick, bool* clamped) {
  double best = std::numeric_limits<double>::infinity();
  std::size_t best_j = 0;
  for (std::size_t j = 0; j < gens.size(); ++j) {
    Vec foot = x;
    axpy(dt, gens[j].b, foot);
    const double v = dt * gens[j].l + grid.interpolate(slice, foot, clamped);
    if (v < best) {
      best = v;
      best_j = j;
    }
  }
  if (pick) *pick = best_j;
  return best;
}

ValueGrid solve_value(const StratifiedProblem& prob, double dx, double dt,
                      const SolveOptions& opts) {
  if (!(dx > 0.0) || !(dt > 0.0))
    throw ConfigError("solve_value: dx and dt must be positive");
  if (!(prob.horizon > 0.0))
    throw ConfigError("solve_value: horizon must be positive");
  const geometry::FlatStratification& fs = prob.strat;
  const geometry::Box& box = fs.box();
  const std::size_t n = static_cast<std::size_t>(fs.dimension());

  for (const geometry::Stratum& s : fs.strata()) {
    for (const Vec& v : s.tangent_basis)
      if (!axis_aligned(v))
        throw GridMisalignedError("stratum " + s.name +
                                  " is not axis-aligned");
    for (const Vec& v : s.normal_basis)
      if (!axis_aligned(v))
        throw GridMisalignedError("stratum " + s.name +
                                  " is not axis-aligned");
  }

  Vec lo = box.lo, dxv(n, dx);
  std::vector<std::size_t> shape(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double span = box.hi[i] - box.lo[i];
    const double steps = span / dx;
    if (std::abs(steps - std::round(steps)) > kAlignTol * std::max(1.0, steps))
      throw GridMisalignedError("dx does not divide the box span on axis " +
                                std::to_string(i + 1));
    shape[i] = static_cast<std::size_t>(std::llround(steps)) + 1;
  }
  for (const geometry::Stratum& s : fs.strata()) {
    for (const Vec& v : s.normal_basis) {
      std::size_t axis = 0;
      for (std::size_t i = 0; i < n; ++i)
        if (std::abs(std::abs(v[i]) - 1.0) < kAlignTol) axis = i;
      const double offs = (s.basepoint[axis] - box.lo[axis]) / dx;
      if (std::abs(offs - std::round(offs)) >
          kAlignTol * std::max(1.0, std::abs(offs)))
        throw GridMisalignedError("interface of stratum " + s.name +
                                  " misses the lattice on axis " +
                                  std::to_string(axis + 1));
    }
  }

  // Sampled CFL estimate up front; each evaluated set is also checked
  // exactly during the sweep.
  double vmax = 0.0;
  {
    const double density = 16.0 / box.diameter();
    for (const geometry::Stratum& s : fs.strata())
      for (const Vec& x : geometry::sample_stratum(fs, s, density, 64))
        for (const double t : {0.0, 0.5 * prob.horizon}) {
          const auto gs = dynamics::evaluate(prob.map, fs, x, t);
          vmax = std::max(vmax, gs.max_velocity_inf());
        }
  }
  if (vmax > 0.0 && dt > dx / vmax * (1.0 + 1e-9))
    throw CflViolationError("dt = " + std::to_string(dt) +
                            " exceeds the CFL bound dx/max|b| = " +
                            std::to_string(dx / vmax));

  std::size_t m = static_cast<std::size_t>(
      std::max<long long>(1, std::llround(prob.horizon / dt)));
  double dta = prob.horizon / static_cast<double>(m);
  if (vmax > 0.0 && dta > dx / vmax * (1.0 + 1e-9)) {
    ++m;
    dta = prob.horizon / static_cast<double>(m);
  }

  ValueGrid grid(std::move(lo), std::move(dxv), std::move(shape), dta, m + 1);
  const std::size_t nodes = grid.nodes();

  std::vector<const geometry::Stratum*> node_stratum(nodes);
  for (std::size_t flat = 0; flat < nodes; ++flat) {
    const Vec x = grid.node(flat);
    node_stratum[flat] = &fs.locate(x);
    grid.at(0, flat) = prob.g(x);
  }

  bool time_varying = prob.map.filippov.has_value();
  for (const auto& [id, rule] : prob.map.regions)
    if (rule.custom) time_varying = true;

  std::vector<dynamics::GeneratorSet> cache;
  const double cfl_cap = dx / dta * (1.0 + 1e-9);
  if (!time_varying) {
    cache.reserve(nodes);
    for (std::size_t flat = 0; flat < nodes; ++flat) {
      cache.push_back(dynamics::evaluate_at(prob.map, fs, *node_stratum[flat],
                                            grid.node(flat), 0.0));
      if (cache.back().max_velocity_inf() > cfl_cap)
        throw CflViolationError("CFL violated at a lattice node");
    }
  }

  const int threads =
      std::max(1, std::min(opts.threads, 64));
  std::vector<std::size_t> clamp_counts(static_cast<std::size_t>(threads), 0);

  for (std::size_t s = 0; s < m; ++s) {
    const double t_n = static_cast<double>(s) * dta;
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(threads));
    auto worker = [&](int tid) {
      try {
        const std::size_t chunk = (nodes + threads - 1) / threads;
        const std::size_t b0 = static_cast<std::size_t>(tid) * chunk;
        const std::size_t b1 = std::min(nodes, b0 + chunk);
        for (std::size_t flat = b0; flat < b1; ++flat) {
          const Vec x = grid.node(flat);
          bool clamped = false;
          double v;
          if (!time_varying) {
            v = one_step_cost(grid, s, x, cache[flat], dta, nullptr, &clamped);
          } else {
            const auto gs = dynamics::evaluate_at(prob.map, fs,
                                                  *node_stratum[flat], x, t_n);
            if (gs.max_velocity_inf() > cfl_cap)
              throw CflViolationError("CFL violated at a lattice node");
            v = one_step_cost(grid, s, x, gs, dta, nullptr, &clamped);
          }
          grid.at(s + 1, flat) = v;
          if (clamped) ++clamp_counts[static_cast<std::size_t>(tid)];
        }
      } catch (...) {
        errors[static_cast<std::size_t>(tid)] = std::current_exception();
      }
    };
    if (threads == 1) {
      worker(0);
    } else {
      std::vector<std::thread> pool;
      pool.reserve(static_cast<std::size_t>(threads));
      for (int tid = 0; tid < threads; ++tid) pool.emplace_back(worker, tid);
      for (auto& th : pool) th.join();
    }
    for (const auto& err : errors)
      if (err) std::rethrow_exception(err);
  }

  std::size_t clamped_total = 0;
  for (std::size_t c : clamp_counts) clamped_total += c;
  grid.set_clamped_feet(clamped_total);
  return grid;
}

double brute_force_value(const StratifiedProblem& prob, const Vec& x, double t,
                         int steps) {
  if (steps < 1 || steps > 14)
    throw ComplexityGuardError("brute force limited to 1..14 steps");
  if (t < 0.0) throw ConfigError("brute_force_value: negative time");
  const double ds = t / static_cast<double>(steps);
  double best = std::numeric_limits<double>::infinity();
  long long leaves = 0;

  std::function<void(const Vec&, int, double)> rec = [&](const Vec& y, int k,
                                                         double acc) {
    if (k == steps) {
      best = std::min(best, acc + prob.g(y));
      if (++leaves > kMaxSequences)
        throw ComplexityGuardError("generator sequence enumeration too large");
      return;
    }
    const auto gs = dynamics::evaluate(prob.map, prob.strat, y,
                                       t - static_cast<double>(k) * ds);
    if (gs.size() > 6)
      throw ComplexityGuardError(
          "brute force limited to 6 generators per point");
    for (std::size_t j = 0; j < gs.size(); ++j) {
      Vec z = y;
      axpy(ds, gs[j].b, z);
      z = clamp_to_box(std::move(z), prob.strat.box(), nullptr);
      rec(z, k + 1, acc + ds * gs[j].l);
    }
  };
  rec(x, 0, 0.0);
  return best;
}

Trajectory simulate(const StratifiedProblem& prob, const Vec& x, double t,
                    const Policy& policy, double ds) {
  if (!(ds > 0.0)) throw ConfigError("simulate: ds must be positive");
  if (t < 0.0) throw ConfigError("simulate: negative time");
  const int steps =
      std::max(1, static_cast<int>(std::ceil(t / ds - 1e-12)));
  const double dsa = t / static_cast<double>(steps);

  Trajectory traj;
  traj.times.push_back(0.0);
  traj.states.push_back(x);
  traj.accumulated_cost.push_back(0.0);

  Vec cur = x;
  for (int k = 0; k < steps; ++k) {
    const double remaining = t - static_cast<double>(k) * dsa;
    const auto gs = dynamics::evaluate(prob.map, prob.strat, cur, remaining);
    const PolicyChoice choice = policy(cur, remaining, gs);
    if (choice.b.size() != cur.size())
      throw InfeasibleSelectionError("policy returned a velocity of dimension " +
                                     std::to_string(choice.b.size()));
    if (!gs.contains(choice.b, choice.l))
      throw InfeasibleSelectionError("policy choice outside the hull at step " +
                                     std::to_string(k));
    axpy(dsa, choice.b, cur);
    cur = clamp_to_box(std::move(cur), prob.strat.box(), &traj.clipped);
    traj.times.push_back(static_cast<double>(k + 1) * dsa);
    traj.states.push_back(cur);
    traj.accumulated_cost.push_back(traj.accumulated_cost.back() +
                                    dsa * choice.l);
    traj.selected.push_back({choice.b, choice.l});
  }
  return traj;
}

Policy greedy_policy(const ValueGrid& grid) {
  // Lookahead horizon equals the grid's own dt regardless of the
  // simulation step, so the policy reads the same table the solver built.
  return [&grid](const Vec& x, double remaining,
                 const dynamics::GeneratorSet& gens) -> PolicyChoice {
    const double dt = grid.dt();
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_j = 0;
    for (std::size_t j = 0; j < gens.size(); ++j) {
      Vec foot = x;
      axpy(dt, gens[j].b, foot);
      const double v =
          dt * gens[j].l +
          grid.interpolate_time(foot, std::max(0.0, remaining - dt));
      if (v < best) {
        best = v;
        best_j = j;
      }
    }
    return {gens[best_j].b, gens[best_j].l};
  };
}

std::vector<ReachRecord> reaching_times(
    const Trajectory& traj, const geometry::FlatStratification& fs) {
  std::vector<ReachRecord> out;
  out.reserve(fs.strata().size());
  for (const geometry::Stratum& s : fs.strata())
    out.push_back({s.id, s.dim, std::numeric_limits<double>::infinity()});
  for (std::size_t k = 0; k < traj.states.size(); ++k) {
    const geometry::Stratum& s = fs.locate(traj.states[k]);
    auto& rec = out[static_cast<std::size_t>(s.id)];
    if (traj.times[k] < rec.time) rec.time = traj.times[k];
  }
  return out;
}

}  // namespace strathjb::solver
