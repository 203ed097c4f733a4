#pragma once

#include <Eigen/Dense>

#include <functional>
#include <map>
#include <optional>
#include <vector>

#include "ppse/phe/paillier.hpp"
#include "ppse/protocol/roles.hpp"
#include "ppse/protocol/transcript.hpp"
#include "ppse/sets/types.hpp"
#include "ppse/sim/scenario.hpp"

namespace ppse::sim {

/// Wall time of one step in milliseconds. `sensor_ms` is the mean over the
/// sensors (Protocol 1) or group managers (Protocol 2).
struct RoleTimes {
  double sensor_ms = 0.0;
  double aggregator_ms = 0.0;
  double query_ms = 0.0;
};

struct TraceRecord {
  int k = 0;
  /// True state; absent in replay mode.
  std::optional<VectorXd> truth;
  /// Decrypted set at the query (a zonotope has no constraint rows).
  sets::ConstrainedZonotoped set;
  sets::Boxd hull;
  /// Zonotope center, or Chebyshev center of a constrained zonotope.
  VectorXd estimate;
  std::optional<bool> contained;
  /// ‖estimate - truth‖₂, NaN without a truth.
  double error = 0.0;
  /// Largest deviation of the decrypted set from the plaintext reference:
  /// ∞-norm over c, G, A, b.
  double fp_error = 0.0;
  /// ‖estimate - reference estimate‖∞.
  double estimate_gap = 0.0;
  RoleTimes time;
};

struct RunOutput {
  protocol::ProtocolConfig config;
  std::vector<TraceRecord> trace;
  protocol::Transcript transcript;
};

/// Strips of every sensor for round k (each measures the state at k - 1).
using StripFeed = std::function<std::vector<sets::Stripd>(int k)>;

/// Containment tolerance: LP feasibility plus the codec's rounding slack.
double containment_tolerance(int frac_bits);

/// Runs the scenario's protocol over the bus against a simulated plant and
/// the plaintext reference pipeline. Throws ScaleOverflow / ProtocolStall
/// with the failing step in the message.
RunOutput run(const Scenario& scenario, const phe::KeyPair& keys);

/// Same with measurements from `feed` for rounds 1..steps; no true state.
RunOutput run_with_feed(const Scenario& scenario, const phe::KeyPair& keys, int steps, const StripFeed& feed);

}  // namespace ppse::sim
