#pragma once

#include <cstddef>
#include <vector>

#include "strathjb/report.hpp"
#include "strathjb/solver.hpp"

namespace strathjb::verify {

//! Subsolution residual u_t + H^k at stratum nodes: backward time
//! difference, one-sided tangential differences along stratum lattice
//! directions with the most favorable combination scored, mirroring the
//! supersolution convention.  At a kink of U the superdifferential is
//! empty, so the best combination keeps the residual at the scheme's
//! consistency order.  Dimension 0 uses H^0, full dimension the full H.
//! Site residual is u_t + H^k; a site passes iff residual <= tol.
report::CheckReport viscosity_sub_check(const solver::ValueGrid& grid,
                                        const solver::StratifiedProblem& prob,
                                        double tol);

//! Supersolution residual over the 2^N one-sided gradient combinations,
//! taking the most favorable combination; stratum nodes use the hull set.
//! Site residual is -(u_t + H); a site passes iff residual <= tol.
report::CheckReport viscosity_super_check(
    const solver::ValueGrid& grid, const solver::StratifiedProblem& prob,
    double tol);

struct SiteSpec {
  std::size_t count = 16;
  unsigned seed = 0;
};

//! Multi-step dynamic-programming residual at sampled lattice nodes:
//! compares the stored value against the exact minimum over generator
//! sequences of length tau_steps. Residual is 0 to the bit at tau_steps=1;
//! otherwise it must stay within tau_steps times the per-step
//! interpolation bound (max second difference / 4).
report::CheckReport dpp_check(const solver::ValueGrid& grid,
                              const solver::StratifiedProblem& prob,
                              int tau_steps, const SiteSpec& sites = {});

//! Regularization convergence study: solves for each eps and reports
//! e(eps) = max |U_eps - U| over inner-half-box nodes. Passes iff e is
//! nonincreasing up to 10% slack and the final value is <= tol.
//! Every eps must be >= 2*dx so the blend is grid-resolvable.
report::CheckReport filippov_study(const solver::StratifiedProblem& prob,
                                   const std::vector<double>& eps_list,
                                   double dx, double dt, double tol,
                                   const solver::SolveOptions& opts = {});

//! Refinement agreement study: solves at (dx1,dt1), (dx2,dt2) and a
//! continuation step (dx2^2/dx1, dt2^2/dt1), comparing final slices on
//! common inner-half-box nodes. Passes iff refinement does not increase
//! the disagreement; the reduction ratio is reported.
report::CheckReport scheme_agreement(const solver::StratifiedProblem& prob,
                                     double dx1, double dt1, double dx2,
                                     double dt2,
                                     const solver::SolveOptions& opts = {});

}  // namespace strathjb::verify
