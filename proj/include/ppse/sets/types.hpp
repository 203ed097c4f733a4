#pragma once

#include <Eigen/Dense>

#include <string>
#include <utility>
#include <vector>

#include "ppse/error.hpp"

namespace ppse::sets {

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using Index = Eigen::Index;

namespace detail {
inline void require(bool ok, const std::string& what) {
  if (!ok) throw DimensionMismatch(what);
}
}  // namespace detail

/// ⟨c, G⟩ = { c + G β : ‖β‖∞ ≤ 1 }. Zero generator columns make a point.
template <typename Scalar>
struct Zonotope {
  VectorX<Scalar> c;
  MatrixX<Scalar> G;

  Zonotope() = default;
  Zonotope(VectorX<Scalar> center, MatrixX<Scalar> generators)
      : c(std::move(center)), G(std::move(generators)) {
    detail::require(c.size() == G.rows(), "zonotope center and generator rows differ");
  }

  static Zonotope point(VectorX<Scalar> center) {
    const Index n = center.size();
    return Zonotope(std::move(center), MatrixX<Scalar>(n, 0));
  }

  Index dim() const { return c.size(); }
  Index num_generators() const { return G.cols(); }
};

/// ⟨c, G, A, b⟩ = { c + G β : A β = b, ‖β‖∞ ≤ 1 }. May be empty.
template <typename Scalar>
struct ConstrainedZonotope {
  VectorX<Scalar> c;
  MatrixX<Scalar> G;
  MatrixX<Scalar> A;
  VectorX<Scalar> b;

  ConstrainedZonotope() = default;
  ConstrainedZonotope(VectorX<Scalar> center, MatrixX<Scalar> generators,
                      MatrixX<Scalar> constraints, VectorX<Scalar> offsets)
      : c(std::move(center)), G(std::move(generators)), A(std::move(constraints)),
        b(std::move(offsets)) {
    detail::require(c.size() == G.rows(), "constrained zonotope center and generator rows differ");
    detail::require(A.cols() == G.cols(), "constraint and generator column counts differ");
    detail::require(A.rows() == b.size(), "constraint rows and offset size differ");
  }

  /// Unconstrained embedding of a zonotope.
  explicit ConstrainedZonotope(const Zonotope<Scalar>& z)
      : c(z.c), G(z.G), A(MatrixX<Scalar>(0, z.G.cols())), b(VectorX<Scalar>(0)) {}

  Index dim() const { return c.size(); }
  Index num_generators() const { return G.cols(); }
  Index num_constraints() const { return A.rows(); }
};

/// { x : |H x - y| ≤ R } componentwise, with H ∈ ℝ^{p×n}.
template <typename Scalar>
struct Strip {
  MatrixX<Scalar> H;
  VectorX<Scalar> y;
  VectorX<Scalar> R;

  Strip() = default;
  Strip(MatrixX<Scalar> rows, VectorX<Scalar> measurement, VectorX<Scalar> half_width)
      : H(std::move(rows)), y(std::move(measurement)), R(std::move(half_width)) {
    detail::require(H.rows() == y.size() && y.size() == R.size(), "strip H, y, R sizes differ");
    if ((R.array() <= Scalar(0)).any()) throw ContractViolation("strip half-widths must be positive");
  }

  Index dim() const { return H.cols(); }
  Index rows() const { return H.rows(); }
  bool contains(const VectorX<Scalar>& x, Scalar tol = Scalar(0)) const {
    return ((H * x - y).array().abs() <= R.array() + tol).all();
  }
};

/// x_{k+1} = F x_k + n_k with n_k ∈ ⟨0, Q⟩.
template <typename Scalar>
struct SystemModel {
  MatrixX<Scalar> F;
  MatrixX<Scalar> Q;

  SystemModel() = default;
  SystemModel(MatrixX<Scalar> process, MatrixX<Scalar> noise)
      : F(std::move(process)), Q(std::move(noise)) {
    detail::require(F.rows() == F.cols(), "process matrix must be square");
    detail::require(Q.rows() == F.rows(), "noise generators must match the state dimension");
  }

  Index dim() const { return F.rows(); }
};

/// Stacked per-strip gains Λ = [λ_1 … λ_m], λ_j ∈ ℝ^{n×p_j}.
template <typename Scalar>
struct LambdaGain {
  MatrixX<Scalar> stacked;
  std::vector<Index> offsets;  // column offset of λ_j; offsets.back() == stacked.cols()

  Index num_blocks() const { return offsets.empty() ? 0 : Index(offsets.size()) - 1; }
  auto block(Index j) const {
    return stacked.middleCols(offsets[j], offsets[j + 1] - offsets[j]);
  }
};

template <typename Scalar>
struct WeightVector {
  VectorX<Scalar> w;
};

/// Axis-aligned box [lower, upper].
template <typename Scalar>
struct Box {
  VectorX<Scalar> lower;
  VectorX<Scalar> upper;

  VectorX<Scalar> width() const { return upper - lower; }
  bool contains(const VectorX<Scalar>& x, Scalar tol = Scalar(0)) const {
    return (x.array() >= lower.array() - tol).all() && (x.array() <= upper.array() + tol).all();
  }
};

using Zonotoped = Zonotope<double>;
using ConstrainedZonotoped = ConstrainedZonotope<double>;
using Stripd = Strip<double>;
using SystemModeld = SystemModel<double>;
using LambdaGaind = LambdaGain<double>;
using WeightVectord = WeightVector<double>;
using Boxd = Box<double>;

}  // namespace ppse::sets
