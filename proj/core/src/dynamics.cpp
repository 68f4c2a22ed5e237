#include "strathjb/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "strathjb/errors.hpp"
#include "strathjb/lp.hpp"

namespace strathjb::dynamics {
namespace {

constexpr double kDedupTol = 1e-12;

bool same_generator(const Generator& a, const Generator& b) {
  if (std::abs(a.l - b.l) > kDedupTol) return false;
  for (std::size_t i = 0; i < a.b.size(); ++i)
    if (std::abs(a.b[i] - b.b[i]) > kDedupTol) return false;
  return true;
}

}  // namespace

GeneratorSet::GeneratorSet(std::vector<Generator> gens) {
  gens_.reserve(gens.size());
  for (Generator& g : gens) append(g);
}

void GeneratorSet::append(const Generator& g) {
  for (const Generator& have : gens_)
    if (same_generator(have, g)) return;
  gens_.push_back(g);
}

void GeneratorSet::append(const GeneratorSet& other) {
  for (const Generator& g : other.gens_) append(g);
}

double GeneratorSet::max_velocity_norm() const {
  double m = 0.0;
  for (const Generator& g : gens_) m = std::max(m, norm2(g.b));
  return m;
}

double GeneratorSet::max_velocity_inf() const {
  double m = 0.0;
  for (const Generator& g : gens_) m = std::max(m, norm_inf(g.b));
  return m;
}

double GeneratorSet::max_cost_abs() const {
  double m = 0.0;
  for (const Generator& g : gens_) m = std::max(m, std::abs(g.l));
  return m;
}

bool GeneratorSet::contains(const Vec& b, double l) const {
  if (gens_.empty()) return false;
  const std::size_t n = b.size();
  const std::size_t rows = n + 2;
  const std::size_t cols = gens_.size();
  std::vector<double> A(rows * cols), rhs(rows);
  for (std::size_t j = 0; j < cols; ++j) {
    for (std::size_t i = 0; i < n; ++i) A[i * cols + j] = gens_[j].b[i];
    A[n * cols + j] = gens_[j].l;
    A[(n + 1) * cols + j] = 1.0;
  }
  for (std::size_t i = 0; i < n; ++i) rhs[i] = b[i];
  rhs[n] = l;
  rhs[n + 1] = 1.0;
  return lp::feasible(rows, cols, A, rhs);
}

double ScaleRule::factor(const Vec& x) const {
  double f = 1.0;
  switch (kind) {
    case ScaleKind::None:
      return 1.0;
    case ScaleKind::Affine:
      f = a0;
      for (std::size_t i = 0; i < coeff.size() && i < x.size(); ++i)
        f += coeff[i] * x[i];
      break;
    case ScaleKind::Quadratic:
    case ScaleKind::SqrtQuadratic: {
      f = a0;
      for (std::size_t i = 0; i < coeff.size() && i < x.size(); ++i)
        f += coeff[i] * x[i] * x[i];
      if (kind == ScaleKind::SqrtQuadratic) {
        if (f < 0.0) throw ConfigError("scale: sqrt of a negative factor");
        f = std::sqrt(f);
      }
      break;
    }
  }
  if (!(f > 0.0)) throw ConfigError("scale: factor must stay positive on the box");
  return f;
}

GeneratorSet RegionRule::at(const Vec& x, double t) const {
  if (custom) return custom(x, t);
  const double f = scale.factor(x);
  if (f == 1.0) return base;
  std::vector<Generator> out;
  out.reserve(base.size());
  for (const Generator& g : base.generators())
    out.push_back({scaled(f, g.b), f * g.l});
  return GeneratorSet(std::move(out));
}

namespace {

GeneratorSet evaluate_base(const BLMap& map,
                           const geometry::FlatStratification& fs,
                           const geometry::Stratum& s, const Vec& x, double t) {
  if (s.dim == fs.dimension()) {
    const auto it = map.regions.find(s.id);
    if (it == map.regions.end())
      throw NoRuleForRegionError("no dynamics rule for region " + s.name);
    return it->second.at(x, t);
  }
  GeneratorSet out;
  for (int rid : fs.adjacent_tops(x)) {
    const auto it = map.regions.find(rid);
    if (it == map.regions.end())
      throw NoRuleForRegionError("no dynamics rule for region " +
                                 fs.stratum(rid).name);
    out.append(it->second.at(x, t));
  }
  if (map.mode == ClosureMode::HullOfLimitsUnionSpecific) {
    const auto it = map.specific.find(s.id);
    if (it != map.specific.end()) out.append(it->second);
  }
  if (out.empty())
    throw NoRuleForRegionError("no adjacent region provides dynamics at " +
                               s.name);
  return out;
}

GeneratorSet evaluate_filippov(const BLMap& map,
                               const geometry::FlatStratification& fs,
                               const geometry::Stratum& s, const Vec& x,
                               double t) {
  const FilippovParams& fp = *map.filippov;
  const GeneratorSet here = evaluate_base(map, fs, s, x, t);
  if (fp.eps <= 0.0) return here;

  const std::size_t n = x.size();
  const int m = std::max(1, fp.samples_per_eps);
  const double step = fp.eps / static_cast<double>(m);

  GeneratorSet out;
  std::vector<int> idx(n + 1, -m);  // spatial offsets + one time axis
  while (true) {
    Vec z = x;
    double dz = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double o = static_cast<double>(idx[i]) * step;
      z[i] += o;
      dz += o * o;
    }
    dz = std::sqrt(dz);
    const double ds = static_cast<double>(idx[n]) * step;
    const double r = dz + std::abs(ds);
    const double sample_t = t + ds;
    if (r <= fp.eps * (1.0 + 1e-12) && fs.box().contains(z, fs.snap_tol()) &&
        sample_t >= -1e-12 && sample_t <= fp.horizon + 1e-12) {
      const double w = std::max(0.0, 1.0 - r / fp.eps);
      const GeneratorSet there =
          evaluate_base(map, fs, fs.locate(z), z, sample_t);
      for (const Generator& g1 : there.generators())
        for (const Generator& g2 : here.generators()) {
          Generator blend;
          blend.b.resize(n);
          for (std::size_t i = 0; i < n; ++i)
            blend.b[i] = w * g1.b[i] + (1.0 - w) * g2.b[i];
          blend.l = w * g1.l + (1.0 - w) * g2.l;
          out.append(blend);
        }
    }
    std::size_t d = 0;
    for (; d <= n; ++d) {
      if (++idx[d] <= m) break;
      idx[d] = -m;
    }
    if (d > n) break;
  }
  return out;
}

}  // namespace

GeneratorSet evaluate_at(const BLMap& map,
                         const geometry::FlatStratification& fs,
                         const geometry::Stratum& s, const Vec& x, double t) {
  if (map.filippov) return evaluate_filippov(map, fs, s, x, t);
  return evaluate_base(map, fs, s, x, t);
}

GeneratorSet evaluate(const BLMap& map, const geometry::FlatStratification& fs,
                      const Vec& x, double t) {
  return evaluate_at(map, fs, fs.locate(x), x, t);
}

TangentialRestriction::TangentialRestriction(GeneratorSet gs,
                                             const geometry::Stratum& s)
    : gs_(std::move(gs)), normal_basis_(s.normal_basis) {
  if (gs_.empty()) {
    empty_ = true;
    return;
  }
  // Feasibility of {mu >= 0, sum mu = 1, sum mu (b . n_i) = 0 for normals}.
  const std::size_t cols = gs_.size();
  const std::size_t rows = normal_basis_.size() + 1;
  std::vector<double> A(rows * cols), rhs(rows, 0.0);
  for (std::size_t j = 0; j < cols; ++j) {
    for (std::size_t i = 0; i < normal_basis_.size(); ++i)
      A[i * cols + j] = dot(gs_[j].b, normal_basis_[i]);
    A[normal_basis_.size() * cols + j] = 1.0;
  }
  rhs[normal_basis_.size()] = 1.0;
  empty_ = !lp::feasible(rows, cols, A, rhs);
}

bool TangentialRestriction::contains(const Vec& b, double l) const {
  if (empty_) return false;
  double bot2 = 0.0;
  for (const Vec& nv : normal_basis_) {
    const double c = dot(b, nv);
    bot2 += c * c;
  }
  const double tol = 1e-10 * std::max(1.0, gs_.max_velocity_norm());
  if (std::sqrt(bot2) > tol) return false;
  return gs_.contains(b, l);
}

std::optional<double> TangentialRestriction::support(const Vec& d_b,
                                                     double d_l) const {
  if (empty_) return std::nullopt;
  const std::size_t cols = gs_.size();
  const std::size_t rows = normal_basis_.size() + 1;
  std::vector<double> A(rows * cols), rhs(rows, 0.0), c(cols);
  for (std::size_t j = 0; j < cols; ++j) {
    for (std::size_t i = 0; i < normal_basis_.size(); ++i)
      A[i * cols + j] = dot(gs_[j].b, normal_basis_[i]);
    A[normal_basis_.size() * cols + j] = 1.0;
    c[j] = dot(d_b, gs_[j].b) + d_l * gs_[j].l;
  }
  rhs[normal_basis_.size()] = 1.0;
  const lp::Solution s = lp::solve_max(rows, cols, A, rhs, c, false);
  if (s.status != lp::Status::Optimal) return std::nullopt;
  return s.value;
}

TangentialRestriction tangential_restriction(const GeneratorSet& gs,
                                             const geometry::Stratum& s) {
  return TangentialRestriction(gs, s);
}

BLMap filippov_regularize(const BLMap& map, double eps, int samples_per_eps,
                          double horizon) {
  if (map.filippov)
    throw ConfigError("filippov_regularize: map is already regularized");
  if (eps < 0.0) throw ConfigError("filippov_regularize: eps must be >= 0");
  BLMap out = map;
  if (eps == 0.0) return out;  // identity
  if (samples_per_eps < 1)
    throw ConfigError("filippov_regularize: samples_per_eps must be >= 1");
  out.filippov = FilippovParams{eps, samples_per_eps, horizon};
  return out;
}

namespace {

//! Sampled Hausdorff estimate between two tangential slices via support
//! differences along a fixed direction set (a lower bound on the true
//! distance; exact in the sampled directions).
double slice_distance(const TangentialRestriction& a,
                      const TangentialRestriction& b,
                      const geometry::Stratum& s) {
  if (a.empty() && b.empty()) return 0.0;
  if (a.empty() != b.empty()) return std::numeric_limits<double>::infinity();
  const std::size_t n = s.basepoint.size();
  std::vector<std::pair<Vec, double>> dirs;
  const Vec zero(n, 0.0);
  dirs.push_back({zero, 1.0});
  dirs.push_back({zero, -1.0});
  for (const Vec& t : s.tangent_basis) {
    dirs.push_back({t, 0.0});
    dirs.push_back({scaled(-1.0, t), 0.0});
    const double r = 1.0 / std::sqrt(2.0);
    dirs.push_back({scaled(r, t), r});
    dirs.push_back({scaled(r, t), -r});
    dirs.push_back({scaled(-r, t), r});
    dirs.push_back({scaled(-r, t), -r});
  }
  double worst = 0.0;
  for (const auto& [db, dl] : dirs) {
    const auto sa = a.support(db, dl);
    const auto sb = b.support(db, dl);
    if (sa && sb) worst = std::max(worst, std::abs(*sa - *sb));
  }
  return worst;
}

}  // namespace

report::CheckReport check_adapted(const BLMap& map,
                                  const geometry::FlatStratification& fs,
                                  double sample_density) {
  if (!(sample_density > 0.0))
    throw ConfigError("check_adapted: sample_density must be positive");
  const double h = 1.0 / sample_density;
  report::CheckReport rep;
  rep.check = "check_adapted";
  rep.tolerance = 0.0;
  nlohmann::json modulus = nlohmann::json::object();

  for (const geometry::Stratum& s : fs.strata()) {
    auto samples = geometry::sample_stratum(fs, s, sample_density, 512);
    const std::size_t stride = std::max<std::size_t>(1, samples.size() / 24);

    double m_h = 0.0, m_q = 0.0;
    Vec worst_at = s.basepoint;
    bool jump_to_empty = false;
    for (std::size_t a = 0; a < samples.size(); a += stride) {
      const Vec& x = samples[a];
      const TangentialRestriction rx =
          tangential_restriction(evaluate_at(map, fs, s, x, 0.0), s);
      for (const Vec& dir : s.tangent_basis) {
        for (const double dist : {h, 0.25 * h}) {
          Vec y = x;
          axpy(dist, dir, y);
          if (!fs.box().contains(y, fs.snap_tol()) || !fs.member(s, y))
            continue;
          const TangentialRestriction ry =
              tangential_restriction(evaluate_at(map, fs, s, y, 0.0), s);
          const double d = slice_distance(rx, ry, s);
          if (std::isinf(d)) {
            jump_to_empty = true;
            worst_at = x;
            continue;
          }
          double& acc = (dist == h) ? m_h : m_q;
          if (d > acc) {
            acc = d;
            if (d >= std::max(m_h, m_q)) worst_at = x;
          }
        }
      }
    }
    // A modulus that fails to contract when the pair distance contracts is a
    // jump; a Lipschitz modulus shrinks fourfold here.
    const bool flag = jump_to_empty || (m_q > 0.5 * m_h + 1e-9);
    report::Site site;
    site.location = worst_at;
    site.stratum = s.id;
    site.residual = std::max(m_h, m_q);
    site.pass = !flag;
    if (flag)
      site.note = "tangential slice jumps along " + s.name;
    rep.add(std::move(site));
    modulus[s.name] = {{"pair_distance", h},
                       {"modulus", m_h},
                       {"modulus_quarter", m_q},
                       {"jump_to_empty", jump_to_empty}};
  }
  rep.extra["modulus"] = std::move(modulus);
  return rep;
}

}  // namespace strathjb::dynamics
