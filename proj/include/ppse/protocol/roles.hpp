#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "ppse/encsets/encsets.hpp"
#include "ppse/phe/codec.hpp"
#include "ppse/phe/paillier.hpp"
#include "ppse/protocol/message.hpp"
#include "ppse/protocol/transcript.hpp"
#include "ppse/sets/reduce.hpp"
#include "ppse/sets/types.hpp"

namespace ppse::protocol {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using sets::Index;

/// Protocol 1 runs sensors straight into the aggregator; Protocol 2 runs
/// sensor groups whose managers intersect locally.
enum class Variant { kP1Zono, kP1Cons, kP2Zono, kP2Cons };

std::string_view to_string(Variant v);
/// Accepts "p1-zono", "p1-cons", "p2-zono", "p2-cons". Throws ParseError.
Variant variant_from_string(std::string_view text);
inline bool uses_groups(Variant v) { return v == Variant::kP2Zono || v == Variant::kP2Cons; }
inline bool constrained(Variant v) { return v == Variant::kP1Cons || v == Variant::kP2Cons; }

struct ProtocolConfig {
  Variant variant = Variant::kP1Zono;
  /// Protocol 1 only: R goes to the aggregator under the restricted tag and
  /// the aggregator permutes generator columns before answering.
  bool swap = false;
  /// Protocol 1 only: the query re-encrypts its reduced result as the next prior.
  bool refresh = true;
  int order = sets::kDefaultOrder;
};

struct SensorModel {
  MatrixXd H;
  VectorXd R;
};

/// Reduction the query applies before feeding a result back: Girard for
/// zonotopes, elimination down to 3n constraints plus lifted Girard otherwise.
sets::ConstrainedZonotoped reduce_for_feedback(const sets::ConstrainedZonotoped& s, bool is_constrained, int order);

class Sensor {
 public:
  Sensor(int id, phe::PublicContext ctx, SensorModel model, bool restricted_R, std::uint64_t seed);

  /// Encrypts y and emits ⟨⟦y⟧, H, R⟩ to the aggregator.
  Message step(int k, const VectorXd& y, Transcript* transcript = nullptr);
  /// Same with the shape taken from `strip` (replayed, pre-linearized rows).
  Message step(int k, const sets::Stripd& strip, Transcript* transcript = nullptr);

  const std::string& name() const { return name_; }

 private:
  std::string name_;
  phe::PublicContext ctx_;
  SensorModel model_;
  bool restricted_;
  phe::Rng rng_;
};

/// Protocol 2 group manager: owns its sensors' measurements, intersects them
/// with the last broadcast prior in the clear and ships the encrypted result.
class GroupManager {
 public:
  GroupManager(int id, phe::PublicContext ctx, std::vector<SensorModel> sensors, ProtocolConfig cfg,
               std::uint64_t seed);

  /// Accepts the query's plaintext InitSet or Result broadcast.
  void receive(const Message& m);
  /// One measurement per sensor, in the order given at construction.
  Message step(int k, const std::vector<VectorXd>& measurements, Transcript* transcript = nullptr);
  /// Same with one strip per sensor.
  Message step(int k, const std::vector<sets::Stripd>& strips, Transcript* transcript = nullptr);

  const std::string& name() const { return name_; }

 private:
  std::string name_;
  phe::PublicContext ctx_;
  std::vector<SensorModel> sensors_;
  ProtocolConfig cfg_;
  phe::Rng rng_;
  std::optional<sets::ConstrainedZonotoped> prior_;
};

/// Untrusted cloud node. Holds the public key only.
class Aggregator {
 public:
  /// `inputs` is the number of strips (Protocol 1) or group sets (Protocol 2)
  /// expected per round.
  Aggregator(phe::PublicContext ctx, sets::SystemModeld model, ProtocolConfig cfg, int inputs, std::uint64_t seed);

  void receive(const Message& m);
  /// Runs round k and emits the Result to the query. Throws ProtocolStall
  /// when inputs for k are missing or no prior is held.
  Message step(int k, Transcript* transcript = nullptr);

 private:
  Message step_p1(int k, Transcript* transcript);
  Message step_p2(int k, Transcript* transcript);

  phe::PublicContext ctx_;
  sets::SystemModeld model_;
  ProtocolConfig cfg_;
  int inputs_;
  std::mt19937_64 rng_;
  std::optional<encsets::EncZonotope> zono_;
  std::optional<encsets::EncConsZonotope> cons_;
  std::map<int, std::map<int, encsets::EncStrip>> strips_;
  std::map<int, std::map<int, encsets::EncZonotope>> zsets_;
  std::map<int, std::map<int, encsets::EncConsZonotope>> csets_;
};

struct QueryOutput {
  /// Decrypted result of the round (a zonotope has no constraint rows).
  sets::ConstrainedZonotoped set;
  /// Refresh for the aggregator or plaintext broadcasts to the groups.
  std::vector<Message> outgoing;
};

/// The only role holding the secret key.
class QueryNode {
 public:
  QueryNode(phe::KeyPair keys, int frac_bits, ProtocolConfig cfg, int groups, std::uint64_t seed);

  /// Round-0 messages carrying the initial set: encrypted to the aggregator
  /// (Protocol 1) or plaintext to every group (Protocol 2).
  std::vector<Message> initialize(const sets::ConstrainedZonotoped& initial, Transcript* transcript = nullptr);

  /// Decrypts a Result and prepares the feedback for the next round.
  QueryOutput step(const Message& result, Transcript* transcript = nullptr);

  const phe::PublicContext& context() const { return ctx_; }

 private:
  std::vector<Message> feedback(int k, const sets::ConstrainedZonotoped& reduced);

  phe::PrivateKey sk_;
  phe::PublicContext ctx_;
  ProtocolConfig cfg_;
  int groups_;
  phe::Rng rng_;
};

}  // namespace ppse::protocol
