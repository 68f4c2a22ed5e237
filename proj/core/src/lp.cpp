#include "strathjb/lp.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>

#include "strathjb/errors.hpp"

namespace strathjb::lp {
namespace {

constexpr std::size_t kMaxPivots = 20000;

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

//! Dense tableau: `a` holds B^{-1}A columns for originals and artificials,
//! `rhs` holds B^{-1}b >= 0, `basis[i]` is the variable basic in row i.
struct Tableau {
  std::size_t m = 0;       // constraint rows
  std::size_t n = 0;       // original variables
  std::size_t ncols = 0;   // originals + artificials
  std::vector<double> a;   // m x ncols, row-major
  std::vector<double> rhs;
  std::vector<std::size_t> basis;
  double eps_pivot = 0.0;

  double& at(std::size_t i, std::size_t j) { return a[i * ncols + j]; }
  double at(std::size_t i, std::size_t j) const { return a[i * ncols + j]; }

  void pivot(std::size_t r, std::size_t e) {
    const double p = at(r, e);
    const double inv = 1.0 / p;
    for (std::size_t j = 0; j < ncols; ++j) at(r, j) *= inv;
    at(r, e) = 1.0;  // exact
    rhs[r] *= inv;
    for (std::size_t i = 0; i < m; ++i) {
      if (i == r) continue;
      const double f = at(i, e);
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < ncols; ++j) at(i, j) -= f * at(r, j);
      at(i, e) = 0.0;  // exact
      rhs[i] -= f * rhs[r];
    }
    basis[r] = e;
  }

  //! Maximize sum_j cost[j] x_j over the current feasible basis.
  //! `allow` restricts entering candidates. Returns false on unbounded.
  bool run(const std::vector<double>& cost, std::size_t first_col,
           std::size_t last_col) {
    const double eps_rc =
        1e-9 * std::max(1.0, std::max(max_abs(cost), max_abs(a)));
    for (std::size_t iter = 0; iter < kMaxPivots; ++iter) {
      // Reduced costs computed fresh each pass; sizes are tiny.
      std::size_t enter = ncols;
      for (std::size_t j = first_col; j < last_col; ++j) {
        bool is_basic = false;
        for (std::size_t i = 0; i < m; ++i)
          if (basis[i] == j) { is_basic = true; break; }
        if (is_basic) continue;
        double rc = cost[j];
        for (std::size_t i = 0; i < m; ++i) {
          const double cb = cost[basis[i]];
          if (cb != 0.0) rc -= cb * at(i, j);
        }
        if (rc > eps_rc) { enter = j; break; }  // Bland: lowest index
      }
      if (enter == ncols) return true;  // optimal

      // Min-ratio test. Ties break toward basic artificials (driving them
      // out on degenerate pivots), then toward the lowest basis index.
      std::size_t leave = m;
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < m; ++i) {
        const double aie = at(i, enter);
        if (aie <= eps_pivot) continue;
        const double ratio = rhs[i] / aie;
        if (leave == m || ratio < best - 1e-12 * (1.0 + std::abs(best))) {
          best = ratio;
          leave = i;
        } else if (ratio <= best + 1e-12 * (1.0 + std::abs(best))) {
          const bool art_i = basis[i] >= n, art_l = basis[leave] >= n;
          if ((art_i && !art_l) || (art_i == art_l && basis[i] < basis[leave]))
            leave = i;
          best = std::min(best, ratio);
        }
      }
      if (leave == m) return false;  // unbounded
      pivot(leave, enter);
      // Degenerate pivots can leave tiny negative rhs; clamp to keep the
      // invariant rhs >= 0 exact.
      for (double& r : rhs)
        if (r < 0.0 && r > -1e-12) r = 0.0;
    }
    throw Error("simplex: pivot limit exceeded");
  }

  std::vector<double> extract() const {
    std::vector<double> x(n, 0.0);
    for (std::size_t i = 0; i < m; ++i)
      if (basis[i] < n) x[basis[i]] = rhs[i];
    return x;
  }
};

//! Two-phase solve without lexicographic refinement. If `ties` is non-null it
//! is set when some nonbasic column prices out to ~0 at the optimum, i.e. the
//! optimal face may contain more than one vertex.
Solution solve_plain(std::size_t rows, std::size_t cols,
                     const std::vector<double>& A, const std::vector<double>& b,
                     const std::vector<double>& c, bool* ties = nullptr) {
  Tableau t;
  t.m = rows;
  t.n = cols;
  t.ncols = cols + rows;
  t.a.assign(rows * t.ncols, 0.0);
  t.rhs.assign(rows, 0.0);
  t.basis.resize(rows);
  const double scale_a = std::max(1.0, std::max(max_abs(A), max_abs(b)));
  t.eps_pivot = 1e-11 * scale_a;

  for (std::size_t i = 0; i < rows; ++i) {
    const double sign = b[i] < 0.0 ? -1.0 : 1.0;
    for (std::size_t j = 0; j < cols; ++j) t.at(i, j) = sign * A[i * cols + j];
    t.rhs[i] = sign * b[i];
    t.at(i, cols + i) = 1.0;
    t.basis[i] = cols + i;
  }

  // Phase 1: maximize -(sum of artificials).
  std::vector<double> cost1(t.ncols, 0.0);
  for (std::size_t j = cols; j < t.ncols; ++j) cost1[j] = -1.0;
  t.run(cost1, 0, t.ncols);
  double infeas = 0.0;
  for (std::size_t i = 0; i < rows; ++i)
    if (t.basis[i] >= cols) infeas += t.rhs[i];
  const double eps_feas = 1e-10 * scale_a;
  Solution s;
  if (infeas > eps_feas) {
    s.status = Status::Infeasible;
    return s;
  }

  // Drive zero-level artificials out of the basis so phase-2 pivots cannot
  // silently grow them. A pivot on a zero-rhs row preserves feasibility for
  // any entry sign; rows with no original entry left are redundant and stay
  // inert (phase 2 never touches them).
  for (std::size_t i = 0; i < rows; ++i) {
    if (t.basis[i] < cols) continue;
    for (std::size_t j = 0; j < cols; ++j)
      if (std::abs(t.at(i, j)) > t.eps_pivot) {
        t.pivot(i, j);
        break;
      }
  }

  // Phase 2 over the original columns only.
  std::vector<double> cost2(t.ncols, 0.0);
  for (std::size_t j = 0; j < cols; ++j) cost2[j] = c[j];
  if (!t.run(cost2, 0, cols)) {
    s.status = Status::Unbounded;
    return s;
  }
  s.status = Status::Optimal;
  s.x = t.extract();
  s.value = 0.0;
  for (std::size_t j = 0; j < cols; ++j) s.value += c[j] * s.x[j];

  if (ties) {
    *ties = false;
    const double eps_rc = 1e-9 * std::max(1.0, std::max(max_abs(c), scale_a));
    for (std::size_t j = 0; j < cols && !*ties; ++j) {
      bool is_basic = false;
      for (std::size_t i = 0; i < rows; ++i)
        if (t.basis[i] == j) { is_basic = true; break; }
      if (is_basic) continue;
      double rc = cost2[j];
      for (std::size_t i = 0; i < rows; ++i) {
        const double cb = cost2[t.basis[i]];
        if (cb != 0.0) rc -= cb * t.at(i, j);
      }
      if (std::abs(rc) <= eps_rc) *ties = true;
    }
  }
  return s;
}

}  // namespace

Solution solve_max(std::size_t rows, std::size_t cols,
                   const std::vector<double>& A, const std::vector<double>& b,
                   const std::vector<double>& c, bool lex_refine) {
  bool ties = false;
  Solution s = solve_plain(rows, cols, A, b, c, &ties);
  if (!lex_refine || s.status != Status::Optimal || !ties) return s;

  // Sequential lexicographic minimum over the optimal face:
  //   for k = 0..n-1: v_k = min x_k  s.t.  Ax=b, x>=0, c.x = v*, x_j = v_j (j<k)
  const double scale =
      std::max(1.0, std::max(max_abs(A), std::max(max_abs(b), max_abs(c))));
  std::vector<double> A2(A);
  std::vector<double> b2(b);
  std::size_t rows2 = rows;
  auto push_row = [&](const std::vector<double>& row, double rhs) {
    A2.insert(A2.end(), row.begin(), row.end());
    b2.push_back(rhs);
    ++rows2;
  };
  push_row(c, s.value);

  bool moved = false;
  std::vector<double> fixed(cols, 0.0);
  std::vector<double> obj(cols, 0.0);
  for (std::size_t k = 0; k < cols; ++k) {
    obj.assign(cols, 0.0);
    obj[k] = -1.0;
    Solution sub = solve_plain(rows2, cols, A2, b2, obj);
    if (sub.status != Status::Optimal) {
      // The face can be marginally infeasible after fixing computed values;
      // keep the unrefined vertex in that case.
      return s;
    }
    fixed[k] = -sub.value;
    if (std::abs(fixed[k]) < 1e-13 * scale) fixed[k] = 0.0;
    if (std::abs(fixed[k] - s.x[k]) > 1e-9 * scale) moved = true;
    std::vector<double> ek(cols, 0.0);
    ek[k] = 1.0;
    push_row(ek, fixed[k]);
  }
  if (moved) {
    s.x = fixed;
    s.value = 0.0;
    for (std::size_t j = 0; j < cols; ++j) s.value += c[j] * s.x[j];
  }
  return s;
}

bool feasible(std::size_t rows, std::size_t cols, const std::vector<double>& A,
              const std::vector<double>& b, std::vector<double>* witness) {
  std::vector<double> c(cols, 0.0);
  Solution s = solve_plain(rows, cols, A, b, c);
  if (s.status != Status::Optimal) return false;
  if (witness) *witness = s.x;
  return true;
}

}  // namespace strathjb::lp
