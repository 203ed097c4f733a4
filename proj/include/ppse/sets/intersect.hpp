#pragma once

#include <Eigen/Dense>

#include <vector>

#include "ppse/error.hpp"
#include "ppse/sets/ops.hpp"
#include "ppse/sets/types.hpp"

namespace ppse::sets {

namespace detail {

template <typename Scalar>
void check_strips(Index n, const std::vector<Strip<Scalar>>& strips) {
  for (const auto& s : strips) require(s.dim() == n, "strip dimension differs from set dimension");
}

template <typename Scalar>
std::vector<Index> strip_offsets(const std::vector<Strip<Scalar>>& strips) {
  std::vector<Index> off{0};
  for (const auto& s : strips) off.push_back(off.back() + s.rows());
  return off;
}

template <typename Scalar>
void check_gain(Index n, const std::vector<Strip<Scalar>>& strips, const LambdaGain<Scalar>& lambda) {
  require(lambda.offsets == strip_offsets(strips), "gain blocks do not match the strip family");
  require(lambda.stacked.rows() == n, "gain rows differ from set dimension");
}

// H̄ (all strip rows stacked) and the matching stacked half-widths.
template <typename Scalar>
void stack_strips(Index n, const std::vector<Strip<Scalar>>& strips, MatrixX<Scalar>& H,
                  VectorX<Scalar>& R) {
  const Index total = strip_offsets(strips).back();
  H.resize(total, n);
  R.resize(total);
  Index row = 0;
  for (const auto& s : strips) {
    H.middleRows(row, s.rows()) = s.H;
    R.segment(row, s.rows()) = s.R;
    row += s.rows();
  }
}

}  // namespace detail

/// Gain minimizing ‖Ḡ(Λ)‖_F² for the zonotope-strip intersection:
/// Λ* = P H̄ᵀ (H̄ P H̄ᵀ + D)⁻¹ with P = Ĝ Ĝᵀ and D = diag(R̄)².
template <typename Scalar>
LambdaGain<Scalar> compute_lambda(const Zonotope<Scalar>& zhat, const std::vector<Strip<Scalar>>& strips) {
  const Index n = zhat.dim();
  detail::check_strips(n, strips);
  MatrixX<Scalar> H;
  VectorX<Scalar> R;
  detail::stack_strips(n, strips, H, R);
  const MatrixX<Scalar> P = zhat.G * zhat.G.transpose();
  const MatrixX<Scalar> PHt = P * H.transpose();
  MatrixX<Scalar> S = H * PHt;
  S.diagonal() += R.cwiseAbs2();

  LambdaGain<Scalar> out;
  out.offsets = detail::strip_offsets(strips);
  // Λ S = P H̄ᵀ, S symmetric: solve S Λᵀ = (P H̄ᵀ)ᵀ.
  Eigen::LLT<MatrixX<Scalar>> llt(S);
  if (llt.info() == Eigen::Success) {
    out.stacked = llt.solve(PHt.transpose()).transpose();
  } else {
    Eigen::CompleteOrthogonalDecomposition<MatrixX<Scalar>> cod(S);
    out.stacked = PHt * cod.pseudoInverse();
  }
  return out;
}

/// Gain with every entry drawn uniformly from [-1, 1].
template <typename Scalar, typename Urbg>
LambdaGain<Scalar> random_lambda(Index n, const std::vector<Strip<Scalar>>& strips, Urbg& rng) {
  LambdaGain<Scalar> out;
  out.offsets = detail::strip_offsets(strips);
  out.stacked.resize(n, out.offsets.back());
  for (Index j = 0; j < out.stacked.cols(); ++j) {
    for (Index i = 0; i < n; ++i) out.stacked(i, j) = Scalar(uniform(rng, -1.0, 1.0));
  }
  return out;
}

/// Random gain Λ = α H̄ᵀ diag(d) with d_j uniform in (0, 1] and α chosen so
/// that ‖Λ H̄‖₂ = 1. I - Λ H̄ then has its eigenvalues in [0, 1] and repeated
/// updates never inflate the generators. Depends on the public H only.
template <typename Scalar, typename Urbg>
LambdaGain<Scalar> random_contractive_lambda(Index n, const std::vector<Strip<Scalar>>& strips, Urbg& rng) {
  detail::check_strips(n, strips);
  MatrixX<Scalar> H;
  VectorX<Scalar> R;
  detail::stack_strips(n, strips, H, R);
  VectorX<Scalar> d(H.rows());
  for (Index i = 0; i < d.size(); ++i) d(i) = Scalar(1.0 - uniform(rng, 0.0, 1.0));
  LambdaGain<Scalar> out;
  out.offsets = detail::strip_offsets(strips);
  out.stacked = H.transpose() * d.asDiagonal();
  const MatrixX<Scalar> K = out.stacked * H;
  const Scalar top = K.size() == 0 ? Scalar(0) : Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>>(K).eigenvalues().maxCoeff();
  if (top > Scalar(0)) out.stacked /= top;
  return out;
}

template <typename Scalar>
LambdaGain<Scalar> zero_lambda(Index n, const std::vector<Strip<Scalar>>& strips) {
  LambdaGain<Scalar> out;
  out.offsets = detail::strip_offsets(strips);
  out.stacked = MatrixX<Scalar>::Zero(n, out.offsets.back());
  return out;
}

/// I - Σ λ_j H_j.
template <typename Scalar>
MatrixX<Scalar> gain_complement(Index n, const std::vector<Strip<Scalar>>& strips,
                                const LambdaGain<Scalar>& lambda) {
  MatrixX<Scalar> M = MatrixX<Scalar>::Identity(n, n);
  for (std::size_t j = 0; j < strips.size(); ++j) M -= lambda.block(Index(j)) * strips[j].H;
  return M;
}

/// Ḡ = [(I - Σ λ_j H_j) Ĝ, λ_1 diag(R_1), …, λ_m diag(R_m)]. Depends on shapes only.
template <typename Scalar>
MatrixX<Scalar> strip_generators(const MatrixX<Scalar>& Ghat, const std::vector<Strip<Scalar>>& strips,
                                 const LambdaGain<Scalar>& lambda) {
  const Index n = Ghat.rows();
  detail::check_strips(n, strips);
  detail::check_gain(n, strips, lambda);
  MatrixX<Scalar> G(n, Ghat.cols() + lambda.stacked.cols());
  G.leftCols(Ghat.cols()) = gain_complement(n, strips, lambda) * Ghat;
  for (std::size_t j = 0; j < strips.size(); ++j) {
    const Index off = lambda.offsets[j];
    G.middleCols(Ghat.cols() + off, strips[j].rows()) = lambda.block(Index(j)) * strips[j].R.asDiagonal();
  }
  return G;
}

/// ‖Ḡ(Λ)‖_F², the quantity compute_lambda minimizes.
template <typename Scalar>
Scalar frobenius_cost(const Zonotope<Scalar>& zhat, const std::vector<Strip<Scalar>>& strips,
                      const LambdaGain<Scalar>& lambda) {
  return strip_generators(zhat.G, strips, lambda).squaredNorm();
}

/// Zonotope enclosing ẑ ∩ strips:
/// c̄ = ĉ + Σ λ_j (y_j - H_j ĉ), generators from strip_generators.
template <typename Scalar>
Zonotope<Scalar> intersect_zono_strips(const Zonotope<Scalar>& zhat, const std::vector<Strip<Scalar>>& strips,
                                       const LambdaGain<Scalar>& lambda) {
  MatrixX<Scalar> G = strip_generators(zhat.G, strips, lambda);
  VectorX<Scalar> c = zhat.c;
  for (std::size_t j = 0; j < strips.size(); ++j) {
    c += lambda.block(Index(j)) * (strips[j].y - strips[j].H * zhat.c);
  }
  return Zonotope<Scalar>(std::move(c), std::move(G));
}

/// Constraint rows added by the exact strip intersection:
/// Ā = [Â 0; H_j Ĝ … -diag(R_j) …]. The offsets b̄ = [b̂; y_j - H_j ĉ] are
/// assembled by the caller, in the clear or over ciphertexts.
template <typename Scalar>
MatrixX<Scalar> strip_constraints(const MatrixX<Scalar>& Ghat, const MatrixX<Scalar>& Ahat,
                                  const std::vector<Strip<Scalar>>& strips) {
  const auto off = detail::strip_offsets(strips);
  const Index e = Ghat.cols();
  const Index extra = off.back();
  MatrixX<Scalar> A = MatrixX<Scalar>::Zero(Ahat.rows() + extra, e + extra);
  A.topLeftCorner(Ahat.rows(), e) = Ahat;
  for (std::size_t j = 0; j < strips.size(); ++j) {
    const Index p = strips[j].rows();
    A.block(Ahat.rows() + off[j], 0, p, e) = strips[j].H * Ghat;
    A.block(Ahat.rows() + off[j], e + off[j], p, p) = -MatrixX<Scalar>(strips[j].R.asDiagonal());
  }
  return A;
}

/// Exact intersection of a constrained zonotope with strips. Any Λ gives the
/// same set; Λ only changes the representation.
template <typename Scalar>
ConstrainedZonotope<Scalar> intersect_conszono_strips(const ConstrainedZonotope<Scalar>& chat,
                                                      const std::vector<Strip<Scalar>>& strips,
                                                      const LambdaGain<Scalar>& lambda) {
  const Zonotope<Scalar> outer = intersect_zono_strips(Zonotope<Scalar>(chat.c, chat.G), strips, lambda);
  MatrixX<Scalar> A = strip_constraints(chat.G, chat.A, strips);
  VectorX<Scalar> b(A.rows());
  b.head(chat.num_constraints()) = chat.b;
  Index row = chat.num_constraints();
  for (const auto& s : strips) {
    b.segment(row, s.rows()) = s.y - s.H * chat.c;
    row += s.rows();
  }
  return ConstrainedZonotope<Scalar>(outer.c, outer.G, std::move(A), std::move(b));
}

/// w_j ∝ 1/‖G_j‖_F², normalized to sum 1. Sets with no extent share all weight.
template <typename Scalar>
WeightVector<Scalar> compute_weights(const std::vector<Zonotope<Scalar>>& zs) {
  const Index d = Index(zs.size());
  WeightVector<Scalar> out{VectorX<Scalar>::Zero(d)};
  if (d == 0) return out;
  VectorX<Scalar> t(d);
  for (Index j = 0; j < d; ++j) t(j) = zs[j].G.squaredNorm();
  if ((t.array() == Scalar(0)).any()) {
    for (Index j = 0; j < d; ++j) out.w(j) = t(j) == Scalar(0) ? Scalar(1) : Scalar(0);
  } else {
    out.w = t.cwiseInverse();
  }
  out.w /= out.w.sum();
  return out;
}

/// Generators of the weighted fusion, [w_1 G_1, …, w_d G_d] / Σ w.
template <typename Scalar>
MatrixX<Scalar> weighted_generators(const std::vector<MatrixX<Scalar>>& Gs, const WeightVector<Scalar>& w) {
  detail::require(!Gs.empty(), "weighted fusion needs at least one set");
  detail::require(w.w.size() == Index(Gs.size()), "one weight per set is required");
  const Scalar total = w.w.sum();
  if (total == Scalar(0)) throw ContractViolation("weights must not sum to zero");
  const Index n = Gs.front().rows();
  Index cols = 0;
  for (const auto& G : Gs) {
    detail::require(G.rows() == n, "fused sets have different dimensions");
    cols += G.cols();
  }
  MatrixX<Scalar> out(n, cols);
  Index at = 0;
  for (std::size_t j = 0; j < Gs.size(); ++j) {
    out.middleCols(at, Gs[j].cols()) = (w.w(Index(j)) / total) * Gs[j];
    at += Gs[j].cols();
  }
  return out;
}

/// Zonotope enclosing ⋂ Z_j: ć = Σ w_j c_j / Σ w, Ǵ = [w_1 G_1, …] / Σ w.
template <typename Scalar>
Zonotope<Scalar> intersect_zonos_weighted(const std::vector<Zonotope<Scalar>>& zs, const WeightVector<Scalar>& w) {
  std::vector<MatrixX<Scalar>> Gs;
  Gs.reserve(zs.size());
  for (const auto& z : zs) Gs.push_back(z.G);
  MatrixX<Scalar> G = weighted_generators(Gs, w);
  const Scalar total = w.w.sum();
  VectorX<Scalar> c = VectorX<Scalar>::Zero(zs.front().dim());
  for (std::size_t j = 0; j < zs.size(); ++j) c += (w.w(Index(j)) / total) * zs[j].c;
  return Zonotope<Scalar>(std::move(c), std::move(G));
}

/// Plaintext parts of the exact fusion: Ǵ = [G_1, 0, …], Á = blockdiag(A_j)
/// followed by the rows [G_1, …, -G_j, …] for j ≥ 2.
template <typename Scalar>
void fusion_shapes(const std::vector<ConstrainedZonotope<Scalar>>& cs, MatrixX<Scalar>& G, MatrixX<Scalar>& A) {
  detail::require(!cs.empty(), "fusion needs at least one set");
  const Index n = cs.front().dim();
  Index cols = 0;
  Index rows = 0;
  for (const auto& c : cs) {
    detail::require(c.dim() == n, "fused sets have different dimensions");
    cols += c.num_generators();
    rows += c.num_constraints();
  }
  rows += n * (Index(cs.size()) - 1);
  G = MatrixX<Scalar>::Zero(n, cols);
  A = MatrixX<Scalar>::Zero(rows, cols);
  G.leftCols(cs.front().num_generators()) = cs.front().G;
  Index r = 0;
  Index col = 0;
  for (const auto& c : cs) {
    A.block(r, col, c.num_constraints(), c.num_generators()) = c.A;
    r += c.num_constraints();
    col += c.num_generators();
  }
  col = cs.front().num_generators();
  for (std::size_t j = 1; j < cs.size(); ++j) {
    A.block(r, 0, n, cs.front().num_generators()) = cs.front().G;
    A.block(r, col, n, cs[j].num_generators()) = -cs[j].G;
    r += n;
    col += cs[j].num_generators();
  }
}

/// Exact intersection of constrained zonotopes.
template <typename Scalar>
ConstrainedZonotope<Scalar> intersect_conszonos(const std::vector<ConstrainedZonotope<Scalar>>& cs) {
  MatrixX<Scalar> G;
  MatrixX<Scalar> A;
  fusion_shapes(cs, G, A);
  VectorX<Scalar> b(A.rows());
  Index r = 0;
  for (const auto& c : cs) {
    b.segment(r, c.num_constraints()) = c.b;
    r += c.num_constraints();
  }
  const Index n = cs.front().dim();
  for (std::size_t j = 1; j < cs.size(); ++j) {
    b.segment(r, n) = cs[j].c - cs.front().c;
    r += n;
  }
  return ConstrainedZonotope<Scalar>(cs.front().c, std::move(G), std::move(A), std::move(b));
}

}  // namespace ppse::sets
