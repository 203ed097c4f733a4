#pragma once

#include <Eigen/Dense>

#include "ppse/protocol/roles.hpp"
#include "ppse/sets/ops.hpp"
#include "ppse/sets/types.hpp"

namespace ppse::sim {

/// x_{k+1} = F x_k + Q β with every β_i uniform in [-1, 1], so the noise
/// always lies in ⟨0, Q⟩.
template <typename Urbg>
Eigen::VectorXd plant_step(const Eigen::VectorXd& x, const sets::SystemModeld& model, Urbg& rng) {
  Eigen::VectorXd beta(model.Q.cols());
  for (sets::Index i = 0; i < beta.size(); ++i) beta(i) = sets::uniform(rng, -1.0, 1.0);
  return model.F * x + model.Q * beta;
}

/// y = H x + v with v_i uniform in [-R_i, R_i].
template <typename Urbg>
Eigen::VectorXd measure(const Eigen::VectorXd& x, const protocol::SensorModel& sensor, Urbg& rng) {
  Eigen::VectorXd y = sensor.H * x;
  for (sets::Index i = 0; i < y.size(); ++i) y(i) += sets::uniform(rng, -sensor.R(i), sensor.R(i));
  return y;
}

/// Uniform point of the box center ± half_widths.
template <typename Urbg>
Eigen::VectorXd sample_box(const Eigen::VectorXd& center, const Eigen::VectorXd& half_widths, Urbg& rng) {
  Eigen::VectorXd x = center;
  for (sets::Index i = 0; i < x.size(); ++i) x(i) += sets::uniform(rng, -half_widths(i), half_widths(i));
  return x;
}

}  // namespace ppse::sim
