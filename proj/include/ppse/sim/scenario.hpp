#pragma once

#include <Eigen/Dense>
#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ppse/protocol/roles.hpp"
#include "ppse/sets/types.hpp"

namespace ppse::sim {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using sets::Index;

struct Scenario {
  std::string name = "scenario";
  sets::SystemModeld model;
  std::vector<protocol::SensorModel> sensors;
  /// Partition of sensor indices; group j is managed by "group:j".
  std::vector<std::vector<int>> groups;
  int steps = 100;
  VectorXd initial_center;
  VectorXd initial_half_widths;
  /// True state at k = 0; drawn inside the initial box when absent.
  std::optional<VectorXd> initial_state;
  int key_bits = 1024;
  int frac_bits = 48;
  protocol::ProtocolConfig protocol;
  std::uint64_t seed = 1;
  double fp_tolerance = 1e-6;

  Index dim() const { return model.dim(); }
  /// The axis-aligned initial box as a set.
  sets::ConstrainedZonotoped initial_set() const;
};

/// Synthetic desk scenario: 3-D random walk (F = I, Q = 0.01 I), eight
/// single-row sensors with random unit H rows and R = 0.1, an 8×8×8 initial
/// box, 100 steps, two groups of four.
Scenario default_scenario();

struct ScenarioParse {
  std::optional<Scenario> scenario;
  /// Every problem found, each prefixed with the JSON path it concerns.
  std::vector<std::string> errors;

  bool ok() const { return errors.empty(); }
};

/// Checks the whole document and reports every error instead of stopping at the first.
ScenarioParse parse_scenario(const nlohmann::json& j);
ScenarioParse read_scenario(const std::filesystem::path& path);

/// Problems that depend on the selected variant (groups for Protocol 2,
/// swap and refresh only meaning something for Protocol 1).
std::vector<std::string> check_variant(const Scenario& s);

nlohmann::json to_json(const Scenario& s);

/// Independent per-purpose seed derived from the scenario seed.
std::uint64_t derive_seed(std::uint64_t base, std::string_view label);

}  // namespace ppse::sim
