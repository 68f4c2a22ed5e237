#pragma once

#include <optional>
#include <string>
#include <vector>

#include "strathjb/report.hpp"
#include "strathjb/vec.hpp"

namespace strathjb::geometry {

//! Strict linear inequality in ambient coordinates:
//!   normal . x > offset   (greater)   or   normal . x < offset.
//! Normals are unit length after construction, so margins are distances.
struct HalfSpace {
  Vec normal;
  double offset = 0.0;
  bool greater = true;

  //! Signed margin toward the interior: positive strictly inside.
  double margin(const Vec& x) const {
    const double v = dot(normal, x) - offset;
    return greater ? v : -v;
  }
};

struct Box {
  Vec lo, hi;
  double diameter() const { return dist2(lo, hi); }
  bool contains(const Vec& x, double tol) const {
    for (std::size_t i = 0; i < lo.size(); ++i)
      if (x[i] < lo[i] - tol || x[i] > hi[i] + tol) return false;
    return true;
  }
};

//! One relatively open polyhedral piece M_i^k of the decomposition: the
//! affine subspace through `basepoint` spanned by the orthonormal
//! `tangent_basis`, cut down by strict cell inequalities. An empty cell means
//! the whole subspace within the box. `normal_basis` is the orthonormal
//! completion, computed at construction.
struct Stratum {
  int id = -1;
  std::string name;
  int dim = 0;
  Vec basepoint;
  std::vector<Vec> tangent_basis;
  std::vector<Vec> normal_basis;
  std::vector<HalfSpace> cell;
};

//! Covector split against a stratum: p = top + bot with top in the span of
//! the tangent basis and bot orthogonal to it, both in ambient coordinates.
struct SplitCovector {
  Vec top, bot;
};

SplitCovector split_covector(const Stratum& s, const Vec& p);

//! A flat stratification of a box: finitely many disjoint relatively open
//! convex polyhedral strata whose union covers the box. Membership snaps to
//! strata within 1e-9 of the box diameter, so points within snapping distance
//! of an interface belong to the interface, never to an adjacent open region.
class FlatStratification {
 public:
  FlatStratification(int dimension, Box box, std::vector<Stratum> strata);

  int dimension() const { return dim_; }
  const Box& box() const { return box_; }
  double snap_tol() const { return snap_; }
  const std::vector<Stratum>& strata() const { return strata_; }
  const Stratum& stratum(int id) const { return strata_.at(id); }
  const std::vector<int>& strata_of_dim(int k) const { return by_dim_.at(k); }
  const std::vector<int>& top_strata() const { return by_dim_.at(dim_); }

  //! Point-set membership. A stratum's set is its geometric piece minus all
  //! lower-dimensional strata, so a line stratum may puncture the interior of
  //! a region without breaking disjointness.
  bool member(const Stratum& s, const Vec& x) const;

  //! Geometric piece alone: within snap of the affine span and strictly
  //! inside every cell inequality by more than snap.
  bool member_geometric(const Stratum& s, const Vec& x) const;

  //! Closure membership: within snap of the span, margins >= -snap.
  bool member_closed(const Stratum& s, const Vec& x) const;

  //! Unique stratum containing x. Lower dimension wins when a snapped point
  //! is claimed across dimensions; equal-dimension double claims throw
  //! AmbiguousLocationError, points outside the box throw OutOfBoxError and
  //! uncovered points (invalid decompositions) throw UncoveredPointError.
  const Stratum& locate(const Vec& x) const;

  //! Ids of top-dimensional strata whose closure contains x (the regions
  //! whose one-sided limits exist at x).
  std::vector<int> adjacent_tops(const Vec& x) const;

 private:
  int dim_;
  Box box_;
  std::vector<Stratum> strata_;
  std::vector<std::vector<int>> by_dim_;
  double snap_;
};

//! Deterministic lattice of points on one stratum: basepoint-anchored steps
//! of 1/density along the tangent basis, kept inside the box and the open
//! cell, capped in size. Shared by all sampled checkers.
std::vector<Vec> sample_stratum(const FlatStratification& fs, const Stratum& s,
                                double density, std::size_t cap = 4096);

//! Sampled validation of the admissibility axioms. Probes per-stratum
//! lattices at `sample_density` points per unit length, plus exact anchor
//! projections onto cell faces so touch points of closures are hit exactly.
//! The report carries pass/fail per axiom (disjointness, cover, the three
//! admissibility axioms and the tangential translation lemma), a witness
//! point for every failure, and for the first axiom the largest sampled
//! radius that passed per stratum.
report::CheckReport validate_afs(const FlatStratification& strat,
                                 double sample_density);

}  // namespace strathjb::geometry
