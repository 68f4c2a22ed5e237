#pragma once

#include <vector>

#include "strathjb/dynamics.hpp"
#include "strathjb/geometry.hpp"
#include "strathjb/report.hpp"
#include "strathjb/vec.hpp"

namespace strathjb::hamiltonians {

//! Value of a Hamiltonian optimization together with its optimizer. When the
//! feasible slice is empty the value is -infinity and `finite` is false.
//! Otherwise argmax holds mixture weights over the generators (mu >= 0,
//! sum mu = 1) and value = -active_velocity.p - active_cost.
struct HamiltonianValue {
  double value = 0.0;
  bool finite = false;
  std::vector<double> argmax;
  Vec active_velocity;
  double active_cost = 0.0;
};

//! H(p) = max over the hull of (-b.p - l); attained at a generator.
HamiltonianValue hamiltonian_full(const dynamics::GeneratorSet& gs,
                                  const Vec& p);

//! Tangential Hamiltonian: the same maximum restricted to hull elements with
//! b_bot = 0 against the stratum, solved as an LP in mixture weights. The
//! objective is built from p_top, so the value is exactly invariant under
//! changes of p_bot. Degenerate ties resolve to the lexicographically
//! smallest mu.
HamiltonianValue hamiltonian_tangential(const dynamics::GeneratorSet& gs,
                                        const geometry::Stratum& s,
                                        const Vec& p);

//! Normal controllability of the sets: near each stratum of positive
//! codimension, certifies by bisection (resolution 1e-6) the largest
//! delta <= delta_target such that every sampled unit normal direction d has
//! the whole segment [0, delta]d inside the velocity hull. Near dim-0 strata
//! the normal space is everything, which is the full-controllability form.
//! A derived entry also verifies the Hamiltonian-side lower bound
//! H >= delta|p_bot| - C2(1+|p_top|) with C2 = max|b| + max|l|.
report::AssumptionReport check_nc(const dynamics::BLMap& map,
                                  const geometry::FlatStratification& fs,
                                  double delta_target, double sample_density);

//! Tangential continuity: samples same-stratum pairs separated along each
//! lower stratum's tangent directions (and the stratum's own), fits the
//! smallest slope constant C1 from large-|p| probes, tabulates the empirical
//! modulus at unit |p|, and runs the analogous Hausdorff estimate on the raw
//! velocity hulls. A fitted constant above 1e6 flags a jump with a witness
//! pair.
report::AssumptionReport check_tc(const dynamics::BLMap& map,
                                  const geometry::FlatStratification& fs,
                                  double sample_density);

//! Lipschitz-in-p constant: C3 = max generator |b| over all sampled
//! evaluations, plus a direct sampled verification of
//! |H(p) - H(q)| <= C3 |p - q|.
report::AssumptionReport check_lp_constant(
    const dynamics::BLMap& map, const geometry::FlatStratification& fs,
    double sample_density);

}  // namespace strathjb::hamiltonians
