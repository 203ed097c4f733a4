#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <vector>

#include "ppse/sets/types.hpp"

namespace ppse::sets {

/// minimize cᵀx  s.t.  A_ub x ≤ b_ub,  A_eq x = b_eq,  lower ≤ x ≤ upper.
/// Infinite bounds are allowed. Empty A_ub / A_eq must still have x.size() columns.
template <typename Scalar>
struct LinearProgram {
  VectorX<Scalar> cost;
  MatrixX<Scalar> A_ub;
  VectorX<Scalar> b_ub;
  MatrixX<Scalar> A_eq;
  VectorX<Scalar> b_eq;
  VectorX<Scalar> lower;
  VectorX<Scalar> upper;

  explicit LinearProgram(Index num_vars)
      : cost(VectorX<Scalar>::Zero(num_vars)),
        A_ub(0, num_vars),
        b_ub(0),
        A_eq(0, num_vars),
        b_eq(0),
        lower(VectorX<Scalar>::Constant(num_vars, -std::numeric_limits<Scalar>::infinity())),
        upper(VectorX<Scalar>::Constant(num_vars, std::numeric_limits<Scalar>::infinity())) {}

  Index num_vars() const { return cost.size(); }
};

enum class LpStatus { kOptimal, kInfeasible, kUnbounded, kIterationLimit };

template <typename Scalar>
struct LpResult {
  LpStatus status = LpStatus::kIterationLimit;
  VectorX<Scalar> x;
  Scalar objective = Scalar(0);

  bool optimal() const { return status == LpStatus::kOptimal; }
};

struct LpOptions {
  double pivot_tol = 1e-10;
  double cost_tol = 1e-10;
  double feas_tol = 1e-9;
  int degenerate_switch = 50;  // degenerate pivots before falling back to Bland's rule
};

namespace detail {

// Dense two-phase tableau simplex on  min cᵀz, M z = r, z ≥ 0.
template <typename Scalar>
class Tableau {
 public:
  Tableau(MatrixX<Scalar> M, VectorX<Scalar> r, LpOptions opts)
      : opts_(opts), rows_(M.rows()), structural_(M.cols()) {
    // Make right-hand sides nonnegative, then add one artificial per row.
    for (Index i = 0; i < rows_; ++i) {
      if (r(i) < 0) {
        M.row(i) *= Scalar(-1);
        r(i) = -r(i);
      }
    }
    cols_ = structural_ + rows_;
    T_ = MatrixX<Scalar>::Zero(rows_ + 1, cols_ + 1);
    T_.topLeftCorner(rows_, structural_) = M;
    T_.block(0, structural_, rows_, rows_).setIdentity();
    T_.topRightCorner(rows_, 1) = r;
    basis_.resize(rows_);
    for (Index i = 0; i < rows_; ++i) basis_[i] = structural_ + i;
    scale_ = Scalar(1) + (rows_ > 0 ? r.cwiseAbs().maxCoeff() : Scalar(0));
  }

  LpStatus phase1() {
    // objective: sum of artificials  -> reduced costs = -(column sums) on structurals
    T_.row(rows_).setZero();
    for (Index i = 0; i < rows_; ++i) {
      T_.row(rows_).head(structural_) -= T_.row(i).head(structural_);
      T_(rows_, cols_) -= T_(i, cols_);
    }
    const LpStatus st = iterate(cols_);
    if (st == LpStatus::kIterationLimit) return st;
    const Scalar infeas = -T_(rows_, cols_);
    if (infeas > Scalar(opts_.feas_tol) * scale_) return LpStatus::kInfeasible;
    // Drive zero-level artificials out of the basis where possible.
    for (Index i = 0; i < rows_; ++i) {
      if (basis_[i] < structural_) continue;
      Index best = -1;
      Scalar best_abs = Scalar(opts_.pivot_tol);
      for (Index j = 0; j < structural_; ++j) {
        if (std::abs(T_(i, j)) > best_abs) {
          best_abs = std::abs(T_(i, j));
          best = j;
        }
      }
      if (best >= 0) pivot(i, best);
    }
    return LpStatus::kOptimal;
  }

  LpStatus phase2(const VectorX<Scalar>& cost) {
    T_.row(rows_).setZero();
    T_.row(rows_).head(structural_) = cost.transpose();
    for (Index i = 0; i < rows_; ++i) {
      const Index bj = basis_[i];
      if (bj < structural_ && cost(bj) != Scalar(0)) T_.row(rows_) -= cost(bj) * T_.row(i);
    }
    return iterate(structural_);
  }

  VectorX<Scalar> solution() const {
    VectorX<Scalar> z = VectorX<Scalar>::Zero(structural_);
    for (Index i = 0; i < rows_; ++i) {
      if (basis_[i] < structural_) z(basis_[i]) = std::max(T_(i, cols_), Scalar(0));
    }
    return z;
  }

 private:
  // Primal simplex over columns [0, allowed).
  LpStatus iterate(Index allowed) {
    const long limit = 200 * (rows_ + cols_) + 1000;
    int degenerate = 0;
    bool bland = false;
    for (long iter = 0; iter < limit; ++iter) {
      Index enter = -1;
      Scalar best = -Scalar(opts_.cost_tol);
      for (Index j = 0; j < allowed; ++j) {
        const Scalar d = T_(rows_, j);
        if (d < best) {
          enter = j;
          if (bland) break;
          best = d;
        }
      }
      if (enter < 0) return LpStatus::kOptimal;

      Index leave = -1;
      Scalar best_ratio = std::numeric_limits<Scalar>::infinity();
      for (Index i = 0; i < rows_; ++i) {
        const Scalar a = T_(i, enter);
        if (a <= Scalar(opts_.pivot_tol)) continue;
        const Scalar ratio = T_(i, cols_) / a;
        const Scalar slack = Scalar(1e-12) * (Scalar(1) + std::abs(best_ratio));
        if (leave < 0 || ratio < best_ratio - slack) {
          leave = i;
          best_ratio = ratio;
        } else if (ratio <= best_ratio + slack) {
          // tie: Bland picks the smallest basic index, otherwise the largest pivot
          const bool take = bland ? basis_[i] < basis_[leave] : a > T_(leave, enter);
          if (take) {
            leave = i;
            best_ratio = std::min(best_ratio, ratio);
          }
        }
      }
      if (leave < 0) return LpStatus::kUnbounded;

      if (best_ratio <= Scalar(opts_.pivot_tol)) {
        if (++degenerate > opts_.degenerate_switch) bland = true;
      } else {
        degenerate = 0;
      }
      pivot(leave, enter);
    }
    return LpStatus::kIterationLimit;
  }

  void pivot(Index r, Index s) {
    const Scalar p = T_(r, s);
    T_.row(r) /= p;
    for (Index i = 0; i <= rows_; ++i) {
      if (i == r) continue;
      const Scalar f = T_(i, s);
      if (f != Scalar(0)) T_.row(i) -= f * T_.row(r);
    }
    basis_[r] = s;
  }

  LpOptions opts_;
  Index rows_;
  Index structural_;
  Index cols_ = 0;
  MatrixX<Scalar> T_;
  std::vector<Index> basis_;
  Scalar scale_ = Scalar(1);
};

}  // namespace detail

/// Solves a small dense LP with a two-phase tableau simplex.
///
/// Bounded variables are shifted to z ≥ 0 with explicit upper-bound rows and
/// free variables are split, which keeps the tableau simple at the cost of
/// size; the problems met here have at most a few hundred columns.
template <typename Scalar>
LpResult<Scalar> solve_lp(const LinearProgram<Scalar>& lp, const LpOptions& opts = {}) {
  const Index nv = lp.num_vars();
  detail::require(lp.A_ub.cols() == nv && lp.A_eq.cols() == nv, "LP matrix width differs from variables");
  detail::require(lp.A_ub.rows() == lp.b_ub.size() && lp.A_eq.rows() == lp.b_eq.size(),
                  "LP right-hand side size mismatch");
  detail::require(lp.lower.size() == nv && lp.upper.size() == nv, "LP bound size mismatch");

  // x_j = offset_j + sign_j * z_{col_j}  (− z_{col_j+1} when free)
  enum class Kind { kShift, kMirror, kFree };
  std::vector<Kind> kind(nv);
  std::vector<Index> col(nv);
  VectorX<Scalar> offset = VectorX<Scalar>::Zero(nv);
  Index nz = 0;
  Index bound_rows = 0;
  for (Index j = 0; j < nv; ++j) {
    const bool lo = std::isfinite(lp.lower(j));
    const bool hi = std::isfinite(lp.upper(j));
    if (lo && hi && lp.upper(j) < lp.lower(j)) {
      return LpResult<Scalar>{LpStatus::kInfeasible, {}, Scalar(0)};
    }
    col[j] = nz;
    if (lo) {
      kind[j] = Kind::kShift;
      offset(j) = lp.lower(j);
      nz += 1;
      if (hi) ++bound_rows;
    } else if (hi) {
      kind[j] = Kind::kMirror;
      offset(j) = lp.upper(j);
      nz += 1;
    } else {
      kind[j] = Kind::kFree;
      nz += 2;
    }
  }

  // Map an original row a·x onto z: returns coefficients, rhs shift a·offset.
  auto map_row = [&](const auto& a, VectorX<Scalar>& out) {
    out.setZero(nz);
    for (Index j = 0; j < nv; ++j) {
      const Scalar v = a(j);
      if (v == Scalar(0)) continue;
      switch (kind[j]) {
        case Kind::kShift: out(col[j]) += v; break;
        case Kind::kMirror: out(col[j]) -= v; break;
        case Kind::kFree:
          out(col[j]) += v;
          out(col[j] + 1) -= v;
          break;
      }
    }
    return a.dot(offset);
  };

  const Index n_le = lp.A_ub.rows() + bound_rows;
  const Index n_eq = lp.A_eq.rows();
  const Index m = n_le + n_eq;
  MatrixX<Scalar> M = MatrixX<Scalar>::Zero(m, nz + n_le);
  VectorX<Scalar> r(m);
  VectorX<Scalar> row;
  Index i = 0;
  for (Index k = 0; k < lp.A_ub.rows(); ++k, ++i) {
    const VectorX<Scalar> a = lp.A_ub.row(k).transpose();
    const Scalar shift = map_row(a, row);
    M.row(i).head(nz) = row.transpose();
    M(i, nz + i) = Scalar(1);
    r(i) = lp.b_ub(k) - shift;
  }
  for (Index j = 0; j < nv; ++j) {
    if (kind[j] == Kind::kShift && std::isfinite(lp.upper(j))) {
      M(i, col[j]) = Scalar(1);
      M(i, nz + i) = Scalar(1);
      r(i) = lp.upper(j) - lp.lower(j);
      ++i;
    }
  }
  for (Index k = 0; k < n_eq; ++k, ++i) {
    const VectorX<Scalar> a = lp.A_eq.row(k).transpose();
    const Scalar shift = map_row(a, row);
    M.row(i).head(nz) = row.transpose();
    r(i) = lp.b_eq(k) - shift;
  }

  VectorX<Scalar> zcost = VectorX<Scalar>::Zero(nz + n_le);
  map_row(lp.cost, row);
  zcost.head(nz) = row;

  detail::Tableau<Scalar> tab(std::move(M), std::move(r), opts);
  LpResult<Scalar> result;
  result.status = tab.phase1();
  if (result.status != LpStatus::kOptimal) return result;
  result.status = tab.phase2(zcost);
  if (result.status != LpStatus::kOptimal) return result;

  const VectorX<Scalar> z = tab.solution();
  result.x.resize(nv);
  for (Index j = 0; j < nv; ++j) {
    switch (kind[j]) {
      case Kind::kShift: result.x(j) = offset(j) + z(col[j]); break;
      case Kind::kMirror: result.x(j) = offset(j) - z(col[j]); break;
      case Kind::kFree: result.x(j) = z(col[j]) - z(col[j] + 1); break;
    }
  }
  result.objective = lp.cost.dot(result.x);
  return result;
}

}  // namespace ppse::sets
