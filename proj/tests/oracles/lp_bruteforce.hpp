#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <optional>

// Minimum of cᵀx over {x ∈ ℝ² : A x ≤ b} by enumerating every pairwise
// intersection of constraint lines. Assumes the feasible set is bounded.
namespace oracle {

inline std::optional<double> lp_min_2d(const Eigen::Vector2d& c, const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                                       double tol = 1e-9) {
  std::optional<double> best;
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < A.rows(); ++j) {
      Eigen::Matrix2d M;
      M << A.row(i), A.row(j);
      if (std::abs(M.determinant()) < 1e-12) continue;
      const Eigen::Vector2d x = M.fullPivLu().solve(Eigen::Vector2d(b(i), b(j)));
      if (((A * x - b).array() > tol).any()) continue;
      const double v = c.dot(x);
      if (!best || v < *best) best = v;
    }
  }
  return best;
}

}  // namespace oracle
