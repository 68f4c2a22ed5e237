#pragma once

#include <cstddef>
#include <vector>

namespace strathjb::lp {

enum class Status { Optimal, Infeasible, Unbounded };

struct Solution {
  Status status = Status::Infeasible;
  double value = 0.0;      //!< objective at the optimum (maximization)
  std::vector<double> x;   //!< primal point, empty unless Optimal
};

//! Solve  max c.x  s.t.  A x = b, x >= 0  with a dense two-phase simplex.
//!
//! A is row-major with `rows` x `cols` entries. Problem sizes here are tiny
//! (rows <= ambient dim + 2 per mixture problem, cols <= 64 generators), so a
//! full tableau with Bland's entering rule is both fast enough and immune to
//! cycling. All pivot choices are index-deterministic: identical inputs give
//! bitwise identical outputs.
//!
//! When `lex_refine` is set and the optimal face is not a single vertex, the
//! returned x is the lexicographically smallest point of the optimal face
//! (coordinate 0 minimized first, then coordinate 1, ...).
Solution solve_max(std::size_t rows, std::size_t cols,
                   const std::vector<double>& A, const std::vector<double>& b,
                   const std::vector<double>& c, bool lex_refine = true);

//! Feasibility of  A x = b, x >= 0  (phase 1 only). If feasible and
//! `witness` is non-null it receives one feasible point.
bool feasible(std::size_t rows, std::size_t cols, const std::vector<double>& A,
              const std::vector<double>& b, std::vector<double>* witness = nullptr);

}  // namespace strathjb::lp
