#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "ppse/error.hpp"
#include "ppse/sets/types.hpp"

namespace ppse::sets {

inline constexpr int kDefaultOrder = 5;

/// Girard reduction of a generator matrix to at most rows·q columns. The
/// e - rows·(q-1) columns with the smallest ‖g‖₁ - ‖g‖∞ are replaced by the
/// diagonal matrix of their absolute row sums (zero rows of that box dropped).
template <typename Scalar>
MatrixX<Scalar> reduce_generators(const MatrixX<Scalar>& G, int order) {
  if (order < 1) throw ContractViolation("reduction order must be at least 1");
  const Index n = G.rows();
  const Index e = G.cols();
  if (e <= n * order) return G;
  std::vector<Index> idx(e);
  std::iota(idx.begin(), idx.end(), Index(0));
  std::vector<Scalar> score(e);
  for (Index j = 0; j < e; ++j) score[j] = G.col(j).template lpNorm<1>() - G.col(j).template lpNorm<Eigen::Infinity>();
  std::stable_sort(idx.begin(), idx.end(), [&](Index a, Index b) { return score[a] < score[b]; });

  const Index boxed = e - n * (order - 1);
  VectorX<Scalar> radius = VectorX<Scalar>::Zero(n);
  for (Index k = 0; k < boxed; ++k) radius += G.col(idx[k]).cwiseAbs();
  std::vector<Index> keep(idx.begin() + boxed, idx.end());
  std::sort(keep.begin(), keep.end());

  Index nonzero = 0;
  for (Index i = 0; i < n; ++i) nonzero += radius(i) != Scalar(0);
  MatrixX<Scalar> out(n, Index(keep.size()) + nonzero);
  Index col = 0;
  for (Index j : keep) out.col(col++) = G.col(j);
  for (Index i = 0; i < n; ++i) {
    if (radius(i) == Scalar(0)) continue;
    out.col(col).setZero();
    out(i, col++) = radius(i);
  }
  return out;
}

template <typename Scalar>
Zonotope<Scalar> reduce_order(const Zonotope<Scalar>& z, int order) {
  return Zonotope<Scalar>(z.c, reduce_generators(z.G, order));
}

/// Girard reduction of the lifted generators [G; A]; c and b are untouched.
template <typename Scalar>
void reduce_lifted(MatrixX<Scalar>& G, MatrixX<Scalar>& A, int order) {
  const Index n = G.rows();
  MatrixX<Scalar> lifted(n + A.rows(), G.cols());
  lifted << G, A;
  const MatrixX<Scalar> reduced = reduce_generators(lifted, order);
  G = reduced.topRows(n);
  A = reduced.bottomRows(A.rows());
}

template <typename Scalar>
ConstrainedZonotope<Scalar> reduce_lifted(const ConstrainedZonotope<Scalar>& z, int order) {
  MatrixX<Scalar> G = z.G;
  MatrixX<Scalar> A = z.A;
  reduce_lifted(G, A, order);
  return ConstrainedZonotope<Scalar>(z.c, std::move(G), std::move(A), z.b);
}

namespace detail {

// Interval of β_j solved from row i with every other factor in [-1, 1].
template <typename Scalar>
std::pair<Scalar, Scalar> solved_factor_range(const MatrixX<Scalar>& A, const VectorX<Scalar>& b, Index i,
                                              Index j) {
  const Scalar a = A(i, j);
  const Scalar spread = (A.row(i).cwiseAbs().sum() - std::abs(a)) / std::abs(a);
  const Scalar mid = b(i) / a;
  return {mid - spread, mid + spread};
}

}  // namespace detail

/// Removes one constraint and one factor by substitution: β_j is solved from
/// row i and eliminated. The pair is chosen to minimize how far the solved
/// factor's interval enclosure exceeds [-1, 1], weighted by ‖G_j‖, so that
/// redundant bounds are dropped first. Result ⊇ input.
template <typename Scalar>
ConstrainedZonotope<Scalar> eliminate_constraint(const ConstrainedZonotope<Scalar>& z) {
  const Index nc = z.num_constraints();
  const Index e = z.num_generators();
  if (nc == 0) return z;
  const Scalar tiny = Scalar(1e-10) * std::max<Scalar>(Scalar(1), z.A.cwiseAbs().maxCoeff());

  Index best_i = -1;
  Index best_j = -1;
  Scalar best = std::numeric_limits<Scalar>::infinity();
  for (Index i = 0; i < nc; ++i) {
    for (Index j = 0; j < e; ++j) {
      if (std::abs(z.A(i, j)) <= tiny) continue;
      const auto [lo, hi] = detail::solved_factor_range(z.A, z.b, i, j);
      const Scalar excess = std::max<Scalar>(Scalar(0), std::max(hi - Scalar(1), Scalar(-1) - lo));
      const Scalar cost = excess * z.G.col(j).norm();
      // prefer larger pivots among ties for numerical stability
      if (cost < best || (cost == best && std::abs(z.A(i, j)) > std::abs(z.A(best_i, best_j)))) {
        best = cost;
        best_i = i;
        best_j = j;
      }
    }
  }
  if (best_i < 0) {
    // Every row is numerically zero: the constraints are 0 = b_i. Dropping a
    // row is exact when its offset vanishes; otherwise the set is empty.
    for (Index i = 0; i < nc; ++i) {
      if (std::abs(z.b(i)) <= Scalar(1e-9)) {
        MatrixX<Scalar> A(nc - 1, e);
        VectorX<Scalar> b(nc - 1);
        A << z.A.topRows(i), z.A.bottomRows(nc - i - 1);
        b << z.b.head(i), z.b.tail(nc - i - 1);
        return ConstrainedZonotope<Scalar>(z.c, z.G, std::move(A), std::move(b));
      }
    }
    throw EmptySet("constraint rows reduce to 0 = b with b nonzero");
  }

  const Index i = best_i;
  const Index j = best_j;
  const Scalar a = z.A(i, j);
  const VectorX<Scalar> Gj = z.G.col(j);
  const VectorX<Scalar> Aj = z.A.col(j);
  const VectorX<Scalar> Ai = z.A.row(i).transpose();

  VectorX<Scalar> c = z.c + Gj * (z.b(i) / a);
  MatrixX<Scalar> G = z.G - Gj * Ai.transpose() / a;
  MatrixX<Scalar> A = z.A - Aj * Ai.transpose() / a;
  VectorX<Scalar> b = z.b - Aj * (z.b(i) / a);

  auto drop_col = [&](const MatrixX<Scalar>& M) {
    MatrixX<Scalar> out(M.rows(), e - 1);
    out << M.leftCols(j), M.rightCols(e - j - 1);
    return out;
  };
  MatrixX<Scalar> G2 = drop_col(G);
  MatrixX<Scalar> A1 = drop_col(A);
  MatrixX<Scalar> A2(nc - 1, e - 1);
  VectorX<Scalar> b2(nc - 1);
  A2 << A1.topRows(i), A1.bottomRows(nc - i - 1);
  b2 << b.head(i), b.tail(nc - i - 1);
  return ConstrainedZonotope<Scalar>(std::move(c), std::move(G2), std::move(A2), std::move(b2));
}

/// Drops rows reading 0 = 0, which constrain nothing.
template <typename Scalar>
ConstrainedZonotope<Scalar> drop_trivial_constraints(const ConstrainedZonotope<Scalar>& z, Scalar tol = Scalar(1e-12)) {
  std::vector<Index> keep;
  for (Index i = 0; i < z.num_constraints(); ++i) {
    if (z.A.row(i).cwiseAbs().maxCoeff() > tol || std::abs(z.b(i)) > tol) keep.push_back(i);
  }
  if (Index(keep.size()) == z.num_constraints()) return z;
  MatrixX<Scalar> A(Index(keep.size()), z.num_generators());
  VectorX<Scalar> b(Index(keep.size()));
  for (std::size_t k = 0; k < keep.size(); ++k) {
    A.row(Index(k)) = z.A.row(keep[k]);
    b(Index(k)) = z.b(keep[k]);
  }
  return ConstrainedZonotope<Scalar>(z.c, z.G, std::move(A), std::move(b));
}

/// Full reduction: trivial rows dropped, constraint elimination down to
/// max_constraints rows, then lifted Girard reduction to the given order.
/// Result ⊇ input.
template <typename Scalar>
ConstrainedZonotope<Scalar> reduce_order_cons(const ConstrainedZonotope<Scalar>& z, int order,
                                              Index max_constraints) {
  if (order < 1) throw ContractViolation("reduction order must be at least 1");
  if (max_constraints < 0) throw ContractViolation("constraint budget must be nonnegative");
  ConstrainedZonotope<Scalar> out = drop_trivial_constraints(z);
  while (out.num_constraints() > max_constraints) out = eliminate_constraint(out);
  return reduce_lifted(out, order);
}

template <typename Scalar>
ConstrainedZonotope<Scalar> reduce_order_cons(const ConstrainedZonotope<Scalar>& z, int order = kDefaultOrder) {
  return reduce_order_cons(z, order, 3 * z.dim());
}

/// ⟨F c, ↓q [F G, Q]⟩.
template <typename Scalar>
Zonotope<Scalar> time_update(const Zonotope<Scalar>& z, const SystemModel<Scalar>& model, int order) {
  detail::require(model.dim() == z.dim(), "model dimension differs from set dimension");
  MatrixX<Scalar> G(z.dim(), z.num_generators() + model.Q.cols());
  G << model.F * z.G, model.Q;
  return Zonotope<Scalar>(model.F * z.c, reduce_generators(G, order));
}

/// F c, b unchanged, {Ĝ, Â} = ↓q {[F G, Q], [A, 0]} via the lifted reduction.
template <typename Scalar>
ConstrainedZonotope<Scalar> time_update(const ConstrainedZonotope<Scalar>& z, const SystemModel<Scalar>& model,
                                        int order) {
  detail::require(model.dim() == z.dim(), "model dimension differs from set dimension");
  const Index q = model.Q.cols();
  MatrixX<Scalar> G(z.dim(), z.num_generators() + q);
  G << model.F * z.G, model.Q;
  MatrixX<Scalar> A = MatrixX<Scalar>::Zero(z.num_constraints(), z.num_generators() + q);
  A.leftCols(z.num_generators()) = z.A;
  reduce_lifted(G, A, order);
  return ConstrainedZonotope<Scalar>(model.F * z.c, std::move(G), std::move(A), z.b);
}

}  // namespace ppse::sets
