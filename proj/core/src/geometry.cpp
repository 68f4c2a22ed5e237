#include "strathjb/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <utility>

#include "strathjb/errors.hpp"

namespace strathjb::geometry {
namespace {

constexpr double kOrthoTol = 1e-12;
constexpr std::size_t kMaxBoxSamples = 60000;
constexpr std::size_t kMaxStratumSamples = 4096;
constexpr std::size_t kMaxFaceSamples = 256;
constexpr std::size_t kMaxProbeSamples = 64;  // per-stratum axiom-(i) probes

Vec project_to_span(const Stratum& s, const Vec& x) {
  Vec p = s.basepoint;
  Vec r = diff(x, s.basepoint);
  for (const Vec& t : s.tangent_basis) axpy(dot(r, t), t, p);
  return p;
}

double span_residual(const Stratum& s, const Vec& x) {
  return dist2(x, project_to_span(s, x));
}

//! Orthonormal completion of the tangent basis to a full ambient basis.
std::vector<Vec> complete_basis(const std::vector<Vec>& tangent, std::size_t n) {
  std::vector<Vec> basis = tangent;
  std::vector<Vec> normals;
  for (std::size_t e = 0; e < n && basis.size() < n; ++e) {
    Vec v(n, 0.0);
    v[e] = 1.0;
    for (const Vec& b : basis) axpy(-dot(v, b), b, v);
    const double len = norm2(v);
    if (len > 1e-8) {
      for (double& c : v) c /= len;
      basis.push_back(v);
      normals.push_back(v);
    }
  }
  if (basis.size() != n)
    throw ConfigError("stratum basis completion failed (degenerate tangent basis)");
  return normals;
}

}  // namespace

SplitCovector split_covector(const Stratum& s, const Vec& p) {
  SplitCovector out;
  out.top.assign(p.size(), 0.0);
  for (const Vec& t : s.tangent_basis) axpy(dot(p, t), t, out.top);
  out.bot = diff(p, out.top);
  return out;
}

FlatStratification::FlatStratification(int dimension, Box box,
                                       std::vector<Stratum> strata)
    : dim_(dimension), box_(std::move(box)), strata_(std::move(strata)) {
  const std::size_t n = static_cast<std::size_t>(dim_);
  if (n == 0 || box_.lo.size() != n || box_.hi.size() != n)
    throw ConfigError("box: dimension mismatch");
  for (std::size_t i = 0; i < n; ++i)
    if (!(box_.lo[i] < box_.hi[i])) throw ConfigError("box: lo must be < hi");
  snap_ = 1e-9 * box_.diameter();

  by_dim_.assign(n + 1, {});
  int id = 0;
  for (Stratum& s : strata_) {
    s.id = id++;
    if (s.name.empty()) s.name = "stratum" + std::to_string(s.id);
    if (s.dim < 0 || s.dim > dim_)
      throw ConfigError("stratum " + s.name + ": dim out of range");
    if (s.basepoint.size() != n)
      throw ConfigError("stratum " + s.name + ": basepoint dimension mismatch");
    if (s.tangent_basis.size() != static_cast<std::size_t>(s.dim))
      throw ConfigError("stratum " + s.name + ": basis size != dim");
    for (std::size_t i = 0; i < s.tangent_basis.size(); ++i) {
      if (s.tangent_basis[i].size() != n)
        throw ConfigError("stratum " + s.name + ": basis vector dimension mismatch");
      for (std::size_t j = 0; j <= i; ++j) {
        const double want = (i == j) ? 1.0 : 0.0;
        if (std::abs(dot(s.tangent_basis[i], s.tangent_basis[j]) - want) > kOrthoTol)
          throw ConfigError("stratum " + s.name + ": tangent basis not orthonormal");
      }
    }
    s.normal_basis = complete_basis(s.tangent_basis, n);
    if (!box_.contains(s.basepoint, snap_))
      throw ConfigError("stratum " + s.name + ": basepoint outside box");
    for (HalfSpace& h : s.cell) {
      if (h.normal.size() != n)
        throw ConfigError("stratum " + s.name + ": cell normal dimension mismatch");
      const double len = norm2(h.normal);
      if (len < 1e-12)
        throw ConfigError("stratum " + s.name + ": zero cell normal");
      for (double& c : h.normal) c /= len;
      h.offset /= len;
      if (h.margin(s.basepoint) <= snap_)
        throw ConfigError("stratum " + s.name +
                          ": basepoint not in the relative interior of its cell");
    }
    by_dim_[static_cast<std::size_t>(s.dim)].push_back(s.id);
  }
  if (by_dim_[n].empty())
    throw ConfigError("stratification has no top-dimensional stratum");
}

bool FlatStratification::member_geometric(const Stratum& s, const Vec& x) const {
  if (span_residual(s, x) > snap_) return false;
  for (const HalfSpace& h : s.cell)
    if (h.margin(x) <= snap_) return false;
  return true;
}

// A stratum's point set is its geometric piece minus every lower-dimensional
// stratum, so lower strata may puncture the interior of a higher cell.
bool FlatStratification::member(const Stratum& s, const Vec& x) const {
  if (!member_geometric(s, x)) return false;
  for (const Stratum& q : strata_)
    if (q.dim < s.dim && member_geometric(q, x)) return false;
  return true;
}

bool FlatStratification::member_closed(const Stratum& s, const Vec& x) const {
  if (span_residual(s, x) > snap_) return false;
  for (const HalfSpace& h : s.cell)
    if (h.margin(x) < -snap_) return false;
  return true;
}

const Stratum& FlatStratification::locate(const Vec& x) const {
  if (x.size() != static_cast<std::size_t>(dim_))
    throw ConfigError("locate: point dimension mismatch");
  if (!box_.contains(x, snap_))
    throw OutOfBoxError("locate: point outside the stratification box");
  const Stratum* best = nullptr;
  bool ambiguous = false;
  for (const Stratum& s : strata_) {
    if (!member(s, x)) continue;
    if (!best || s.dim < best->dim) {
      best = &s;
      ambiguous = false;
    } else if (s.dim == best->dim) {
      ambiguous = true;
    }
  }
  if (!best)
    throw UncoveredPointError("locate: no stratum contains the point");
  if (ambiguous)
    throw AmbiguousLocationError(
        "locate: two strata of equal dimension claim the point");
  return *best;
}

std::vector<int> FlatStratification::adjacent_tops(const Vec& x) const {
  std::vector<int> out;
  for (int id : top_strata())
    if (member_closed(strata_[static_cast<std::size_t>(id)], x)) out.push_back(id);
  return out;
}

std::vector<Vec> sample_stratum(const FlatStratification& fs, const Stratum& s,
                                double density, std::size_t cap) {
  const double h = 1.0 / density;
  std::vector<Vec> pts;
  if (s.dim == 0) {
    pts.push_back(s.basepoint);
    return pts;
  }
  const double extent = fs.box().diameter();
  // Per-dimension step budget so the full lattice stays within the cap;
  // coarsening grows the spacing, never the covered range.
  const long budget = static_cast<long>(std::floor(
      (std::pow(static_cast<double>(cap),
                1.0 / static_cast<double>(s.dim)) -
       1.0) /
      2.0));
  const long steps =
      std::max<long>(1, std::min<long>(static_cast<long>(std::floor(extent / h)),
                                       std::max<long>(1, budget)));
  const double spacing = std::max(h, extent / static_cast<double>(steps));
  std::vector<long> idx(static_cast<std::size_t>(s.dim), -steps);
  while (true) {
    Vec p = s.basepoint;
    for (int d = 0; d < s.dim; ++d)
      axpy(static_cast<double>(idx[static_cast<std::size_t>(d)]) * spacing,
           s.tangent_basis[static_cast<std::size_t>(d)], p);
    if (fs.box().contains(p, fs.snap_tol()) && fs.member(s, p)) pts.push_back(p);
    int d = 0;
    for (; d < s.dim; ++d) {
      if (++idx[static_cast<std::size_t>(d)] <= steps) break;
      idx[static_cast<std::size_t>(d)] = -steps;
    }
    if (d == s.dim) break;
  }
  if (pts.empty()) pts.push_back(s.basepoint);
  return pts;
}

namespace {

std::vector<Vec> box_lattice(const Box& box, double h) {
  const std::size_t n = box.lo.size();
  std::vector<long> counts(n);
  double total = 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    counts[i] = std::max<long>(2, std::lround((box.hi[i] - box.lo[i]) / h) + 1);
    total *= static_cast<double>(counts[i]);
  }
  while (total > static_cast<double>(kMaxBoxSamples)) {
    total = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
      counts[i] = std::max<long>(2, (counts[i] + 1) / 2);
      total *= static_cast<double>(counts[i]);
    }
  }
  std::vector<Vec> pts;
  std::vector<long> idx(n, 0);
  while (true) {
    Vec p(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double f = static_cast<double>(idx[i]) /
                       static_cast<double>(counts[i] - 1);
      p[i] = box.lo[i] + f * (box.hi[i] - box.lo[i]);
    }
    pts.push_back(std::move(p));
    std::size_t d = 0;
    for (; d < n; ++d) {
      if (++idx[d] < counts[d]) break;
      idx[d] = 0;
    }
    if (d == n) break;
  }
  return pts;
}

//! Distance from x to stratum q: exact when the affine projection lands in
//! the closed cell, otherwise the minimum over q's lattice (an upper bound,
//! which is the honest direction for a sampled certificate).
double stratum_distance(const FlatStratification& fs, const Stratum& q,
                        const Vec& x, const std::vector<Vec>& q_lattice) {
  const Vec p = project_to_span(q, x);
  if (fs.member_closed(q, p)) return dist2(x, p);
  double best = std::numeric_limits<double>::infinity();
  for (const Vec& s : q_lattice) best = std::min(best, dist2(x, s));
  return best;
}

bool same_affine(const Stratum& a, const Stratum& b) {
  if (a.dim != b.dim) return false;
  if (span_residual(a, b.basepoint) > 1e-10) return false;
  for (const Vec& t : b.tangent_basis) {
    Vec r = t;
    for (const Vec& u : a.tangent_basis) axpy(-dot(r, u), u, r);
    if (norm2(r) > 1e-10) return false;
  }
  return true;
}

bool member_of_dim(const FlatStratification& fs, int k, const Vec& x,
                   bool closed) {
  for (int id : fs.strata_of_dim(k)) {
    const Stratum& s = fs.stratum(id);
    if (closed ? fs.member_closed(s, x) : fs.member(s, x)) return true;
  }
  return false;
}

//! In-span components of a cell normal; empty when the face is parallel to
//! the span and never cuts it.
std::optional<Vec> in_span_normal(const Stratum& s, const HalfSpace& h) {
  Vec m(s.basepoint.size(), 0.0);
  for (const Vec& t : s.tangent_basis) axpy(dot(h.normal, t), t, m);
  if (norm2(m) < 1e-10) return std::nullopt;
  return m;
}

//! Project p (already on affine(s)) onto the face {h active} within the span.
Vec face_project(const Vec& p, const HalfSpace& h, const Vec& m) {
  Vec out = p;
  const double lambda = (dot(h.normal, p) - h.offset) / dot(h.normal, m);
  axpy(-lambda, m, out);
  return out;
}

struct FaceProbeSet {
  int stratum = -1;           // the stratum T whose closure is being probed
  std::vector<Vec> points;    // probe points on the relative boundary of T
};

//! Candidate touch points on the relative boundary of every stratum: exact
//! projections of all basepoints onto each cell face (and face pairs), plus a
//! lattice over each face. Exact projections make measure-zero touch points
//! (a closure meeting a single lower point) detectable.
std::vector<FaceProbeSet> boundary_probes(const FlatStratification& fs,
                                          double h) {
  std::vector<FaceProbeSet> out;
  for (const Stratum& t : fs.strata()) {
    if (t.dim == 0 || t.cell.empty()) continue;
    FaceProbeSet set;
    set.stratum = t.id;
    std::vector<Vec> anchors;
    anchors.push_back(t.basepoint);
    for (const Stratum& s : fs.strata())
      if (s.id != t.id) anchors.push_back(project_to_span(t, s.basepoint));

    for (std::size_t f = 0; f < t.cell.size(); ++f) {
      const auto m1 = in_span_normal(t, t.cell[f]);
      if (!m1) continue;
      std::vector<Vec> on_face;
      for (const Vec& a : anchors)
        on_face.push_back(face_project(a, t.cell[f], *m1));
      // Face pairs: project onto a second active inequality, orthogonalized
      // within the span against the first.
      for (std::size_t g = f + 1; g < t.cell.size(); ++g) {
        const auto m2 = in_span_normal(t, t.cell[g]);
        if (!m2) continue;
        Vec m2o = *m2;
        axpy(-dot(m2o, *m1) / dot(*m1, *m1), *m1, m2o);
        if (norm2(m2o) < 1e-10) continue;
        if (std::abs(dot(t.cell[g].normal, m2o)) < 1e-12) continue;
        for (const Vec& a : anchors) {
          Vec p = face_project(a, t.cell[f], *m1);
          on_face.push_back(face_project(p, t.cell[g], m2o));
        }
      }
      // Face lattice along the in-span directions orthogonal to m1.
      std::vector<Vec> dirs;
      for (const Vec& tb : t.tangent_basis) {
        Vec d = tb;
        axpy(-dot(d, *m1) / dot(*m1, *m1), *m1, d);
        for (const Vec& u : dirs) axpy(-dot(d, u), u, d);
        const double len = norm2(d);
        if (len > 1e-8) {
          for (double& c : d) c /= len;
          dirs.push_back(d);
        }
      }
      const Vec anchor0 = face_project(t.basepoint, t.cell[f], *m1);
      if (!dirs.empty()) {
        const long steps = static_cast<long>(
            std::min<double>(8.0, std::floor(fs.box().diameter() / h)));
        std::size_t added = 0;
        std::vector<long> idx(dirs.size(), -steps);
        while (added < kMaxFaceSamples) {
          Vec p = anchor0;
          for (std::size_t d = 0; d < dirs.size(); ++d)
            axpy(static_cast<double>(idx[d]) * h, dirs[d], p);
          on_face.push_back(std::move(p));
          ++added;
          std::size_t d = 0;
          for (; d < dirs.size(); ++d) {
            if (++idx[d] <= steps) break;
            idx[d] = -steps;
          }
          if (d == dirs.size()) break;
        }
      }
      for (Vec& p : on_face) {
        if (!fs.box().contains(p, fs.snap_tol())) continue;
        if (!fs.member_closed(t, p)) continue;  // probes must touch closure(T)
        set.points.push_back(std::move(p));
      }
    }
    if (!set.points.empty()) out.push_back(std::move(set));
  }
  return out;
}

}  // namespace

report::CheckReport validate_afs(const FlatStratification& fs,
                                 double sample_density) {
  if (!(sample_density > 0.0))
    throw ConfigError("validate_afs: sample_density must be positive");
  const double h = 1.0 / sample_density;
  report::CheckReport rep;
  rep.check = "validate_afs";
  rep.tolerance = fs.snap_tol();

  bool ok_disjoint = true, ok_cover = true, ok_i = true, ok_ii = true,
       ok_iii = true, ok_flat = true;

  const std::size_t n_strata = fs.strata().size();
  std::vector<std::vector<Vec>> lattice(n_strata);
  for (std::size_t i = 0; i < n_strata; ++i)
    lattice[i] =
        sample_stratum(fs, fs.strata()[i], sample_density, kMaxStratumSamples);

  auto claims_of = [&](const Vec& x) {
    std::vector<int> out;
    for (const Stratum& s : fs.strata())
      if (fs.member(s, x)) out.push_back(s.id);
    return out;
  };

  auto add_fail = [&](const char* axiom, const Vec& where, std::string note,
                      bool* flag) {
    *flag = false;
    report::Site site;
    site.location = where;
    site.pass = false;
    site.residual = 0.0;
    site.note = std::string(axiom) + ": " + std::move(note);
    rep.add(std::move(site));
  };

  // Partition axioms: every probed point claimed exactly once.
  for (const Vec& x : box_lattice(fs.box(), h)) {
    const auto c = claims_of(x);
    if (c.empty() && ok_cover)
      add_fail("cover", x, "no stratum contains the point", &ok_cover);
    if (c.size() > 1 && ok_disjoint)
      add_fail("disjointness", x,
               fs.stratum(c[0]).name + " and " + fs.stratum(c[1]).name +
                   " both claim the point",
               &ok_disjoint);
  }
  for (std::size_t i = 0; i < n_strata && ok_disjoint; ++i)
    for (const Vec& x : lattice[i]) {
      const auto c = claims_of(x);
      if (c.size() > 1) {
        add_fail("disjointness", x,
                 fs.stratum(c[0]).name + " and " + fs.stratum(c[1]).name +
                     " both claim the point",
                 &ok_disjoint);
        break;
      }
    }

  // Axiom (i): around each sampled stratum point a positive radius exists in
  // which the stratum set coincides with its tangent plane slice.
  nlohmann::json radius_json = nlohmann::json::object();
  std::vector<std::vector<double>> probe_radius(n_strata);
  std::vector<std::vector<Vec>> probe_points(n_strata);
  for (std::size_t i = 0; i < n_strata; ++i) {
    const Stratum& s = fs.strata()[i];
    const std::size_t stride =
        std::max<std::size_t>(1, lattice[i].size() / kMaxProbeSamples);
    double worst = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < lattice[i].size(); a += stride) {
      const Vec& x = lattice[i][a];
      double r_cap = fs.box().diameter();
      for (const Stratum& q : fs.strata()) {
        if (q.id == s.id) continue;
        if (q.dim > s.dim) continue;
        if (q.dim == s.dim && same_affine(s, q)) continue;
        r_cap = std::min(r_cap,
                         stratum_distance(fs, q, x,
                                          lattice[static_cast<std::size_t>(q.id)]));
      }
      double r_span = r_cap;
      if (s.dim > 0 && r_cap > fs.snap_tol()) {
        r_span = 0.0;
        for (int j = 1; j <= 8 && r_span == 0.0; ++j) {
          const double rho = r_cap * std::pow(0.5, j);
          bool all_ok = true;
          auto probe = [&](const Vec& dir) {
            Vec p = x;
            axpy(rho, dir, p);
            if (!fs.box().contains(p, -fs.snap_tol())) return;  // outside box
            if (!member_of_dim(fs, s.dim, p, false)) all_ok = false;
          };
          for (int d = 0; d < s.dim && all_ok; ++d) {
            probe(s.tangent_basis[static_cast<std::size_t>(d)]);
            if (all_ok) probe(scaled(-1.0, s.tangent_basis[static_cast<std::size_t>(d)]));
          }
          for (int d = 0; d < s.dim && all_ok; ++d)
            for (int e = d + 1; e < s.dim && all_ok; ++e) {
              Vec diag = s.tangent_basis[static_cast<std::size_t>(d)];
              axpy(1.0, s.tangent_basis[static_cast<std::size_t>(e)], diag);
              const double len = norm2(diag);
              for (double& c : diag) c /= len;
              probe(diag);
              if (all_ok) probe(scaled(-1.0, diag));
            }
          if (all_ok) r_span = rho;
        }
      }
      const double r_max = std::min(r_cap, r_span);
      probe_radius[i].push_back(r_max);
      probe_points[i].push_back(x);
      worst = std::min(worst, r_max);
      if (r_max <= 10.0 * fs.snap_tol() && ok_i)
        add_fail("afs-i", x,
                 "no positive radius matches " + s.name +
                     " with its tangent slice",
                 &ok_i);
    }
    radius_json[s.name] = worst;
  }

  // Axiom (ii): if the closure of a dim-l stratum meets a lower stratum S,
  // then S lies inside the closure of the dim-l layer. Probes are exact face
  // projections so single-point touches are found.
  std::map<std::pair<int, int>, std::optional<Vec>> subset_cache;
  auto layer_contains = [&](int s_id, int l) -> std::optional<Vec> {
    const auto key = std::make_pair(s_id, l);
    auto it = subset_cache.find(key);
    if (it != subset_cache.end()) return it->second;
    std::optional<Vec> counterexample;
    for (const Vec& p : lattice[static_cast<std::size_t>(s_id)]) {
      if (!member_of_dim(fs, l, p, true)) {
        counterexample = p;
        break;
      }
    }
    subset_cache[key] = counterexample;
    return counterexample;
  };

  for (const FaceProbeSet& probes : boundary_probes(fs, h)) {
    const Stratum& t = fs.stratum(probes.stratum);
    for (const Vec& a : probes.points) {
      const auto c = claims_of(a);
      bool has_low = false;
      for (int id : c) {
        const Stratum& s = fs.stratum(id);
        if (s.dim <= t.dim) has_low = true;
        if (s.dim < t.dim) {
          const auto bad = layer_contains(s.id, t.dim);
          if (bad && ok_ii)
            add_fail("afs-ii", a,
                     "closure of " + t.name + " meets " + s.name +
                         " which leaves the dim-" + std::to_string(t.dim) +
                         " layer closure",
                     &ok_ii);
        }
      }
      if (!has_low && ok_iii)
        add_fail("afs-iii", a,
                 "closure point of " + t.name +
                     " not claimed by any stratum of dim <= " +
                     std::to_string(t.dim),
                 &ok_iii);
    }
  }

  // Tangential translation lemma: near a sampled x in S, translating points
  // of a higher layer along S's tangent directions stays inside that layer.
  for (std::size_t i = 0; i < n_strata && ok_flat; ++i) {
    const Stratum& s = fs.strata()[i];
    if (s.dim == 0) continue;  // translations along V_0 are trivial
    for (std::size_t a = 0; a < probe_points[i].size() && ok_flat; ++a) {
      const Vec& x = probe_points[i][a];
      const double r = probe_radius[i][a];
      if (r <= 10.0 * fs.snap_tol()) continue;
      const double shift = std::min(0.2 * r, h);
      for (const Stratum& tq : fs.strata()) {
        if (tq.dim <= s.dim) continue;
        for (const Vec& y : lattice[static_cast<std::size_t>(tq.id)]) {
          if (dist2(y, x) > 0.7 * r) continue;
          for (int d = 0; d < s.dim; ++d)
            for (double sign : {1.0, -1.0}) {
              Vec p = y;
              axpy(sign * shift, s.tangent_basis[static_cast<std::size_t>(d)], p);
              if (!fs.box().contains(p, -fs.snap_tol())) continue;
              if (!member_of_dim(fs, tq.dim, p, false)) {
                add_fail("flat-lemma", p,
                         "tangential translate of a point of " + tq.name +
                             " near " + s.name + " leaves its layer",
                         &ok_flat);
                break;
              }
            }
          if (!ok_flat) break;
        }
        if (!ok_flat) break;
      }
    }
  }

  rep.extra["axioms"] = {
      {"disjointness", ok_disjoint}, {"cover", ok_cover},
      {"afs_i", ok_i},               {"afs_ii", ok_ii},
      {"afs_iii", ok_iii},           {"flat_lemma", ok_flat}};
  rep.extra["afs_i_largest_radius"] = radius_json;
  rep.pass = ok_disjoint && ok_cover && ok_i && ok_ii && ok_iii && ok_flat;
  return rep;
}

}  // namespace strathjb::geometry
