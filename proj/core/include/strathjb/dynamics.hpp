#pragma once

#include <functional>
#include <map>
#include <optional>
#include <vector>

#include "strathjb/geometry.hpp"
#include "strathjb/report.hpp"
#include "strathjb/vec.hpp"

namespace strathjb::dynamics {

//! One admissible (velocity, running-cost) pair.
struct Generator {
  Vec b;
  double l = 0.0;
};

//! Compact convex dynamics-cost set represented as the convex hull of
//! finitely many generators. Construction deduplicates within 1e-12
//! componentwise, preserving first-seen order; every consumer that minimizes
//! or maximizes over the set is order-insensitive, so ordering only shows in
//! serialized output.
class GeneratorSet {
 public:
  GeneratorSet() = default;
  explicit GeneratorSet(std::vector<Generator> gens);

  const std::vector<Generator>& generators() const { return gens_; }
  std::size_t size() const { return gens_.size(); }
  bool empty() const { return gens_.empty(); }
  const Generator& operator[](std::size_t i) const { return gens_[i]; }

  void append(const Generator& g);        // dedup-preserving push
  void append(const GeneratorSet& other); // union of generator lists

  double max_velocity_norm() const;  // max Euclidean |b|
  double max_velocity_inf() const;   // max per-axis |b_i|
  double max_cost_abs() const;

  //! Hull membership of (b,l), decided by a feasibility LP. The tolerance
  //! scales with max|b| so the test is resolution-independent.
  bool contains(const Vec& b, double l) const;

 private:
  std::vector<Generator> gens_;
};

enum class ScaleKind { None, Affine, Quadratic, SqrtQuadratic };

//! Smooth positive spatial factor applied to a base generator list; the
//! factor multiplies both the velocity and the cost components.
//!   None:          1
//!   Affine:        a0 + coeff . x
//!   Quadratic:     a0 + sum coeff_i x_i^2
//!   SqrtQuadratic: sqrt(a0 + sum coeff_i x_i^2)
struct ScaleRule {
  ScaleKind kind = ScaleKind::None;
  double a0 = 1.0;
  Vec coeff;

  double factor(const Vec& x) const;
};

//! Dynamics rule of one open region. Config files produce the
//! base-list-plus-scale form; `custom`, when set, overrides it and exists for
//! programmatic construction (an arbitrary generator-valued function of
//! (x,t), e.g. to probe the checkers with deliberately bad maps).
struct RegionRule {
  GeneratorSet base;
  ScaleRule scale;
  std::function<GeneratorSet(const Vec&, double)> custom;

  GeneratorSet at(const Vec& x, double t) const;
};

enum class ClosureMode { HullOfLimits, HullOfLimitsUnionSpecific };

struct FilippovParams {
  double eps = 0.0;
  int samples_per_eps = 3;  // lattice resolution per eps along each axis
  double horizon = 0.0;     // time samples are restricted to [0, horizon]
};

//! The full map (x,t) -> BL(x,t): per-region rules on top strata; on a lower
//! stratum the convex hull of the one-sided limits of every adjacent region,
//! united with the stratum's specific generator list when the closure mode
//! says so. An optional Filippov regularization blends nearby evaluations.
struct BLMap {
  ClosureMode mode = ClosureMode::HullOfLimits;
  std::map<int, RegionRule> regions;     // keyed by top-stratum id
  std::map<int, GeneratorSet> specific;  // keyed by stratum id
  std::optional<FilippovParams> filippov;
};

//! Evaluate the set at a located point. Throws NoRuleForRegionError when a
//! top stratum has no rule.
GeneratorSet evaluate(const BLMap& map, const geometry::FlatStratification& fs,
                      const Vec& x, double t);

//! Same, with the locate step already done (the solver caches it per node).
GeneratorSet evaluate_at(const BLMap& map,
                         const geometry::FlatStratification& fs,
                         const geometry::Stratum& s, const Vec& x, double t);

//! The tangential slice {(b,l) in hull : b_bot = 0} of a set against a
//! stratum; answers emptiness, membership and support queries by LP.
class TangentialRestriction {
 public:
  TangentialRestriction(GeneratorSet gs, const geometry::Stratum& s);

  bool empty() const { return empty_; }
  const GeneratorSet& base() const { return gs_; }

  //! Membership of (b,l); b must itself be tangential within tolerance.
  bool contains(const Vec& b, double l) const;

  //! max (d_b . b + d_l * l) over the slice; nullopt when the slice is empty.
  std::optional<double> support(const Vec& d_b, double d_l) const;

 private:
  GeneratorSet gs_;
  std::vector<Vec> normal_basis_;
  bool empty_ = false;
};

TangentialRestriction tangential_restriction(const GeneratorSet& gs,
                                             const geometry::Stratum& s);

//! Filippov-style regularization: the returned map evaluates to the hull of
//! blended samples over the ball |z-x| + |s-t| <= eps. eps = 0 returns the
//! map unchanged; regularizing twice is rejected.
BLMap filippov_regularize(const BLMap& map, double eps, int samples_per_eps,
                          double horizon);

//! Sampled continuity of the tangential slices along each stratum: estimates
//! a modulus at pair distances h and h/4 (h = 1/sample_density) and flags a
//! discontinuity when the modulus does not contract with h.
report::CheckReport check_adapted(const BLMap& map,
                                  const geometry::FlatStratification& fs,
                                  double sample_density);

}  // namespace strathjb::dynamics
