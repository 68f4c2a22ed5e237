#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "strathjb/dynamics.hpp"
#include "strathjb/geometry.hpp"
#include "strathjb/vec.hpp"

namespace strathjb::solver {

//! Terminal cost g. The built-in forms are bounded and uniformly continuous
//! on any box; Tabulated interpolates multilinearly with clamped lookups.
class TerminalCost {
 public:
  enum class Kind { DistanceToPoint, ClippedCone, Constant, Tabulated };

  static TerminalCost distance_to_point(Vec center);
  static TerminalCost clipped_cone(Vec center, double slope, double cap);
  static TerminalCost constant(double value);
  static TerminalCost tabulated(Vec lo, Vec dx, std::vector<std::size_t> shape,
                                std::vector<double> values);

  double operator()(const Vec& x) const;
  //! Exact sup of |g| over the box (corner maximum for the cone forms).
  double sup_norm(const geometry::Box& box) const;
  Kind kind() const { return kind_; }
  const Vec& center() const { return center_; }
  double slope() const { return slope_; }
  double cap() const { return cap_; }
  double constant_value() const { return constant_; }

 private:
  TerminalCost() = default;
  Kind kind_ = Kind::Constant;
  Vec center_;
  double slope_ = 1.0;
  double cap_ = 0.0;
  double constant_ = 0.0;
  Vec tab_lo_, tab_dx_;
  std::vector<std::size_t> tab_shape_;
  std::vector<double> tab_values_;
};

struct StratifiedProblem {
  geometry::FlatStratification strat;
  dynamics::BLMap map;
  TerminalCost g;
  double horizon = 1.0;
  double bound = 1.0;  // M_bound: sup of |b| and |l| over the admissible sets
};

//! Backward-in-time value table on a uniform lattice. Slice s holds U at
//! remaining time s*dt; slice 0 is the terminal cost at the nodes.
class ValueGrid {
 public:
  ValueGrid() = default;
  ValueGrid(Vec lo, Vec dx, std::vector<std::size_t> shape, double dt,
            std::size_t slices);

  std::size_t dimension() const { return shape_.size(); }
  const Vec& lo() const { return lo_; }
  const Vec& dx() const { return dx_; }
  const std::vector<std::size_t>& shape() const { return shape_; }
  double dt() const { return dt_; }
  std::size_t slices() const { return slices_; }
  std::size_t nodes() const { return nodes_; }
  std::size_t clamped_feet() const { return clamped_feet_; }
  void set_clamped_feet(std::size_t n) { clamped_feet_ = n; }

  double& at(std::size_t slice, std::size_t flat);
  double at(std::size_t slice, std::size_t flat) const;
  std::vector<std::size_t> unflatten(std::size_t flat) const;
  std::size_t flatten(const std::vector<std::size_t>& idx) const;
  Vec node(std::size_t flat) const;

  //! Multilinear interpolation within slice; coordinates clamp to the box
  //! (constant extension). `clamped` reports whether clamping occurred.
  double interpolate(std::size_t slice, const Vec& x,
                     bool* clamped = nullptr) const;
  //! Interpolation in space and linearly in remaining time.
  double interpolate_time(const Vec& x, double time) const;

  //! CSV rows "x1,..,xN,t,value" with %.17g formatting, slice-major order.
  void write_csv(std::ostream& os) const;
  //! Little-endian layout: magic "SHJB", u32 version, u32 N, u32 slices,
  //! f64 dt, then per axis (u32 shape, f64 lo, f64 dx), then the values as
  //! f64 slice-major row-major.
  void write_binary(std::ostream& os) const;
  static ValueGrid read_binary(std::istream& is);

 private:
  Vec lo_, dx_;
  std::vector<std::size_t> shape_;
  double dt_ = 0.0;
  std::size_t slices_ = 0;
  std::size_t nodes_ = 0;
  std::size_t clamped_feet_ = 0;
  std::vector<double> values_;
};

struct SolveOptions {
  int threads = 1;
};

//! One backward step at x against slice `slice`: the minimum over the
//! generators of dt*l + I[U_slice](x + dt*b). Vertex minimization is exact
//! for the linear one-step cost; ties pick the lowest generator index.
double one_step_cost(const ValueGrid& grid, std::size_t slice, const Vec& x,
                     const dynamics::GeneratorSet& gens, double dt,
                     std::size_t* pick = nullptr, bool* clamped = nullptr);

//! Semi-Lagrangian backward solve. dx must divide the box spans and every
//! stratum's fixed coordinates must land on lattice nodes (strata must be
//! axis-aligned); dt is adjusted to divide the horizon exactly.
ValueGrid solve_value(const StratifiedProblem& prob, double dx, double dt,
                      const SolveOptions& opts = {});

//! Exact minimum over all generator sequences of length `steps`, with the
//! set re-evaluated at every visited point. Upper-bound oracle for U.
double brute_force_value(const StratifiedProblem& prob, const Vec& x, double t,
                         int steps);

struct PolicyChoice {
  Vec b;
  double l = 0.0;
};
using Policy = std::function<PolicyChoice(
    const Vec& x, double remaining, const dynamics::GeneratorSet& gens)>;

struct Trajectory {
  std::vector<double> times;
  std::vector<Vec> states;
  std::vector<double> accumulated_cost;  // accumulated_cost[0] == 0
  std::vector<dynamics::Generator> selected;
  bool clipped = false;  // some state was clamped to the box
};

//! Euler simulation; every policy choice is certified against the local
//! hull by a feasibility solve before it is applied.
Trajectory simulate(const StratifiedProblem& prob, const Vec& x, double t,
                    const Policy& policy, double ds);

//! Feedback rule minimizing the one-step cost against `grid`. The grid must
//! outlive the returned policy.
Policy greedy_policy(const ValueGrid& grid);

struct ReachRecord {
  int stratum = -1;
  int dim = -1;
  double time = 0.0;  // +infinity when the stratum is never visited
};

//! First-hit time of every stratum along the trajectory, in stratum id
//! order; locating uses the stratification's open membership.
std::vector<ReachRecord> reaching_times(const Trajectory& traj,
                                        const geometry::FlatStratification& fs);

}  // namespace strathjb::solver
