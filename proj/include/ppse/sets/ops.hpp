#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cstdint>
#include <cmath>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "ppse/error.hpp"
#include "ppse/sets/lp.hpp"
#include "ppse/sets/types.hpp"

namespace ppse::sets {

inline constexpr double kFeasTol = 1e-9;

/// Uniform draw in [lo, hi) from the top 53 bits of a 64-bit engine.
template <typename Urbg>
double uniform(Urbg& rng, double lo, double hi) {
  const double u = double(std::uint64_t(rng()) >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * u;
}

template <typename Scalar>
Zonotope<Scalar> minkowski_sum(const Zonotope<Scalar>& a, const Zonotope<Scalar>& b) {
  detail::require(a.dim() == b.dim(), "Minkowski sum of sets with different dimensions");
  MatrixX<Scalar> G(a.dim(), a.num_generators() + b.num_generators());
  G << a.G, b.G;
  return Zonotope<Scalar>(a.c + b.c, std::move(G));
}

template <typename Scalar, typename Derived>
Zonotope<Scalar> linear_map(const Eigen::MatrixBase<Derived>& M, const Zonotope<Scalar>& z) {
  detail::require(M.cols() == z.dim(), "linear map width differs from set dimension");
  return Zonotope<Scalar>(M * z.c, M * z.G);
}

template <typename Scalar, typename Derived>
ConstrainedZonotope<Scalar> linear_map(const Eigen::MatrixBase<Derived>& M,
                                       const ConstrainedZonotope<Scalar>& z) {
  detail::require(M.cols() == z.dim(), "linear map width differs from set dimension");
  return ConstrainedZonotope<Scalar>(M * z.c, M * z.G, z.A, z.b);
}

/// Frobenius norm of the generator matrix.
template <typename Scalar>
Scalar f_radius(const Zonotope<Scalar>& z) {
  return z.G.norm();
}

namespace detail {

inline LpIndeterminate lp_failure(const char* what, LpStatus status) {
  const char* name = status == LpStatus::kInfeasible   ? "infeasible"
                     : status == LpStatus::kUnbounded ? "unbounded"
                                                       : "iteration limit";
  return LpIndeterminate(std::string(what) + ": LP ended " + name);
}

template <typename Scalar>
LinearProgram<Scalar> factor_polytope_lp(const ConstrainedZonotope<Scalar>& z) {
  LinearProgram<Scalar> lp(z.num_generators());
  lp.A_eq = z.A;
  lp.b_eq = z.b;
  lp.lower.setConstant(Scalar(-1));
  lp.upper.setConstant(Scalar(1));
  return lp;
}

}  // namespace detail

/// Smallest t with |c + Gβ - x| ≤ t, |Aβ - b| ≤ t, ‖β‖∞ ≤ 1.
/// Zero means x is a member; the LP is always feasible.
template <typename Scalar, typename Derived>
Scalar membership_residual(const ConstrainedZonotope<Scalar>& z, const Eigen::MatrixBase<Derived>& x) {
  detail::require(x.size() == z.dim(), "point dimension differs from set dimension");
  const Index n = z.dim();
  const Index e = z.num_generators();
  const Index nc = z.num_constraints();
  if (e == 0) {
    Scalar r = n > 0 ? (z.c - x).cwiseAbs().maxCoeff() : Scalar(0);
    if (nc > 0) r = std::max(r, z.b.cwiseAbs().maxCoeff());
    return r;
  }
  LinearProgram<Scalar> lp(e + 1);
  lp.cost(e) = Scalar(1);
  lp.lower.head(e).setConstant(Scalar(-1));
  lp.upper.head(e).setConstant(Scalar(1));
  lp.lower(e) = Scalar(0);
  const Index rows = 2 * (n + nc);
  lp.A_ub = MatrixX<Scalar>::Zero(rows, e + 1);
  lp.b_ub.resize(rows);
  const VectorX<Scalar> d = x - z.c;
  lp.A_ub.topLeftCorner(n, e) = z.G;
  lp.A_ub.block(n, 0, n, e) = -z.G;
  lp.A_ub.block(0, e, 2 * n, 1).setConstant(Scalar(-1));
  lp.b_ub.head(n) = d;
  lp.b_ub.segment(n, n) = -d;
  if (nc > 0) {
    lp.A_ub.block(2 * n, 0, nc, e) = z.A;
    lp.A_ub.block(2 * n + nc, 0, nc, e) = -z.A;
    lp.A_ub.block(2 * n, e, 2 * nc, 1).setConstant(Scalar(-1));
    lp.b_ub.segment(2 * n, nc) = z.b;
    lp.b_ub.segment(2 * n + nc, nc) = -z.b;
  }
  const LpResult<Scalar> res = solve_lp(lp);
  if (!res.optimal()) throw detail::lp_failure("membership test", res.status);
  return std::max(res.objective, Scalar(0));
}

template <typename Scalar, typename Derived>
Scalar membership_residual(const Zonotope<Scalar>& z, const Eigen::MatrixBase<Derived>& x) {
  return membership_residual(ConstrainedZonotope<Scalar>(z), x);
}

template <typename Scalar, typename Derived>
bool contains(const ConstrainedZonotope<Scalar>& z, const Eigen::MatrixBase<Derived>& x,
              Scalar tol = Scalar(kFeasTol)) {
  return membership_residual(z, x) <= tol;
}

template <typename Scalar, typename Derived>
bool contains(const Zonotope<Scalar>& z, const Eigen::MatrixBase<Derived>& x, Scalar tol = Scalar(kFeasTol)) {
  return membership_residual(z, x) <= tol;
}

/// True when {β : Aβ = b, ‖β‖∞ ≤ 1} has no point.
template <typename Scalar>
bool is_empty(const ConstrainedZonotope<Scalar>& z) {
  if (z.num_constraints() == 0) return false;
  if (z.num_generators() == 0) return z.b.cwiseAbs().maxCoeff() > Scalar(kFeasTol);
  const LpResult<Scalar> res = solve_lp(detail::factor_polytope_lp(z));
  if (res.status == LpStatus::kInfeasible) return true;
  if (!res.optimal()) throw detail::lp_failure("emptiness test", res.status);
  return false;
}

/// max dᵀx over the set.
template <typename Scalar, typename Derived>
Scalar support(const Zonotope<Scalar>& z, const Eigen::MatrixBase<Derived>& d) {
  detail::require(d.size() == z.dim(), "direction dimension differs from set dimension");
  return d.dot(z.c) + (z.G.transpose() * d).cwiseAbs().sum();
}

template <typename Scalar, typename Derived>
Scalar support(const ConstrainedZonotope<Scalar>& z, const Eigen::MatrixBase<Derived>& d) {
  detail::require(d.size() == z.dim(), "direction dimension differs from set dimension");
  if (z.num_constraints() == 0) return support(Zonotope<Scalar>(z.c, z.G), d);
  LinearProgram<Scalar> lp = detail::factor_polytope_lp(z);
  lp.cost = -(z.G.transpose() * d);
  const LpResult<Scalar> res = solve_lp(lp);
  if (res.status == LpStatus::kInfeasible) throw EmptySet("support of an empty constrained zonotope");
  if (!res.optimal()) throw detail::lp_failure("support function", res.status);
  return d.dot(z.c) - res.objective;
}

template <typename Scalar>
Box<Scalar> interval_hull(const Zonotope<Scalar>& z) {
  const VectorX<Scalar> r = z.G.cwiseAbs().rowwise().sum();
  return Box<Scalar>{z.c - r, z.c + r};
}

/// Per-coordinate min and max over the factor polytope, 2n LPs.
template <typename Scalar>
Box<Scalar> interval_hull(const ConstrainedZonotope<Scalar>& z) {
  if (z.num_constraints() == 0) return interval_hull(Zonotope<Scalar>(z.c, z.G));
  if (is_empty(z)) throw EmptySet("interval hull of an empty constrained zonotope");
  Box<Scalar> box{z.c, z.c};
  LinearProgram<Scalar> lp = detail::factor_polytope_lp(z);
  for (Index i = 0; i < z.dim(); ++i) {
    for (int sign : {1, -1}) {
      lp.cost = Scalar(sign) * z.G.row(i).transpose();
      const LpResult<Scalar> res = solve_lp(lp);
      if (res.status == LpStatus::kInfeasible) throw EmptySet("interval hull of an empty constrained zonotope");
      if (!res.optimal()) throw detail::lp_failure("interval hull", res.status);
      if (sign > 0) {
        box.lower(i) = z.c(i) + res.objective;
      } else {
        box.upper(i) = z.c(i) - res.objective;
      }
    }
  }
  return box;
}

/// Center of the largest ball inscribed in {β : Aβ = b, ‖β‖∞ ≤ 1} (within the
/// affine hull of the constraints), mapped through c + Gβ.
template <typename Scalar>
VectorX<Scalar> chebyshev_center(const ConstrainedZonotope<Scalar>& z) {
  const Index e = z.num_generators();
  if (z.num_constraints() == 0) return z.c;
  if (e == 0) {
    if (z.b.cwiseAbs().maxCoeff() > Scalar(kFeasTol)) throw EmptySet("Chebyshev center of an empty set");
    return z.c;
  }
  // β = β0 + N t with N spanning ker A.
  Eigen::JacobiSVD<MatrixX<Scalar>> svd(z.A, Eigen::ComputeFullU | Eigen::ComputeFullV);
  svd.setThreshold(Scalar(1e-10));
  const Index rank = svd.rank();
  const VectorX<Scalar> beta0 = svd.solve(z.b);
  const Scalar scale = Scalar(1) + z.b.cwiseAbs().maxCoeff();
  if ((z.A * beta0 - z.b).cwiseAbs().maxCoeff() > Scalar(kFeasTol) * scale) {
    throw EmptySet("constraints of the constrained zonotope are inconsistent");
  }
  const MatrixX<Scalar> N = svd.matrixV().rightCols(e - rank);
  const Index k = N.cols();
  if (k == 0) {
    if (beta0.cwiseAbs().maxCoeff() > Scalar(1) + Scalar(kFeasTol)) throw EmptySet("Chebyshev center of an empty set");
    return z.c + z.G * beta0;
  }
  // maximize r s.t. ±N_i t + r ‖N_i‖ ≤ 1 ∓ β0_i, r ≥ 0
  LinearProgram<Scalar> lp(k + 1);
  lp.cost(k) = Scalar(-1);
  lp.lower(k) = Scalar(0);
  lp.A_ub.resize(2 * e, k + 1);
  lp.b_ub.resize(2 * e);
  for (Index i = 0; i < e; ++i) {
    const Scalar nn = N.row(i).norm();
    lp.A_ub.row(i) << N.row(i), nn;
    lp.A_ub.row(e + i) << -N.row(i), nn;
    lp.b_ub(i) = Scalar(1) - beta0(i);
    lp.b_ub(e + i) = Scalar(1) + beta0(i);
  }
  const LpResult<Scalar> res = solve_lp(lp);
  if (res.status == LpStatus::kInfeasible) throw EmptySet("Chebyshev center of an empty set");
  if (!res.optimal()) throw detail::lp_failure("Chebyshev center", res.status);
  const VectorX<Scalar> beta = beta0 + N * res.x.head(k);
  return z.c + z.G * beta;
}

/// Uniform permutation of 0..count-1. Fisher-Yates with explicit draws so the
/// result does not depend on the standard library's distribution implementations.
template <typename Urbg>
std::vector<Index> random_permutation(Index count, Urbg& rng) {
  std::vector<Index> perm(std::size_t(std::max<Index>(count, 0)));
  std::iota(perm.begin(), perm.end(), Index(0));
  for (Index i = Index(perm.size()) - 1; i > 0; --i) {
    std::swap(perm[i], perm[Index(std::uint64_t(rng()) % std::uint64_t(i + 1))]);
  }
  return perm;
}

/// Column j of the result is column perm[j] of M.
template <typename Scalar>
MatrixX<Scalar> permute_columns(const MatrixX<Scalar>& M, const std::vector<Index>& perm) {
  detail::require(Index(perm.size()) == M.cols(), "permutation length differs from column count");
  MatrixX<Scalar> out(M.rows(), M.cols());
  for (Index j = 0; j < M.cols(); ++j) out.col(j) = M.col(perm[j]);
  return out;
}

/// Random column permutation; the represented set is unchanged.
template <typename Scalar, typename Urbg>
Zonotope<Scalar> shuffle_generators(const Zonotope<Scalar>& z, Urbg& rng) {
  return Zonotope<Scalar>(z.c, permute_columns(z.G, random_permutation(z.num_generators(), rng)));
}

}  // namespace ppse::sets
