#include "ppse/protocol/roles.hpp"

#include <array>
#include <utility>

#include "ppse/error.hpp"
#include "ppse/sets/intersect.hpp"
#include "ppse/sets/json.hpp"
#include "ppse/sets/ops.hpp"

namespace ppse::protocol {

using nlohmann::json;

namespace {

constexpr std::array<std::pair<Variant, std::string_view>, 4> kVariants{{
    {Variant::kP1Zono, "p1-zono"},
    {Variant::kP1Cons, "p1-cons"},
    {Variant::kP2Zono, "p2-zono"},
    {Variant::kP2Cons, "p2-cons"},
}};

std::string at_step(int k, const std::string& what) { return "step " + std::to_string(k) + ": " + what; }

Message make(MessageKind kind, std::string sender, std::string receiver, int k) {
  Message m;
  m.kind = kind;
  m.sender = std::move(sender);
  m.receiver = std::move(receiver);
  m.k = k;
  return m;
}

void put_enc(Message& m, const encsets::EncZonotope& z) {
  m.with("c", encsets::to_json(z.enc_c), Tag::kCiphertext).with("G", sets::matrix_to_json(z.G), Tag::kPublic);
}

void put_enc(Message& m, const encsets::EncConsZonotope& z) {
  m.with("c", encsets::to_json(z.enc_c), Tag::kCiphertext)
      .with("G", sets::matrix_to_json(z.G), Tag::kPublic)
      .with("A", sets::matrix_to_json(z.A), Tag::kPublic)
      .with("b", encsets::to_json(z.enc_b), Tag::kCiphertext);
}

// An unconstrained set may arrive without A and b.
json cons_payload(const json& p) {
  json j = p;
  if (!j.contains("A")) {
    j["A"] = json::array();
    j["b"] = json::array();
  }
  return j;
}

void put_plain(Message& m, const sets::ConstrainedZonotoped& s, bool is_constrained) {
  m.with("c", sets::vector_to_json(s.c), Tag::kPublic).with("G", sets::matrix_to_json(s.G), Tag::kPublic);
  if (is_constrained) {
    m.with("A", sets::matrix_to_json(s.A), Tag::kPublic).with("b", sets::vector_to_json(s.b), Tag::kPublic);
  }
}

sets::ConstrainedZonotoped plain_from(const Message& m) {
  const json& p = m.payload;
  try {
    VectorXd c = sets::vector_from_json(p.at("c"));
    MatrixXd G = sets::matrix_from_json(p.at("G"));
    if (G.rows() == 0) G.resize(c.size(), 0);
    if (!p.contains("A")) return sets::ConstrainedZonotoped(sets::Zonotoped(std::move(c), std::move(G)));
    MatrixXd A = sets::matrix_from_json(p.at("A"), G.cols());
    VectorXd b = sets::vector_from_json(p.at("b"));
    return sets::ConstrainedZonotoped(std::move(c), std::move(G), std::move(A), std::move(b));
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed set payload: ") + e.what());
  }
}

json gain_coins(const sets::LambdaGaind& gain) { return json{{"gain", sets::matrix_to_json(gain.stacked)}}; }

}  // namespace

std::string_view to_string(Variant v) {
  for (const auto& [value, name] : kVariants) {
    if (value == v) return name;
  }
  throw ContractViolation("unknown variant");
}

Variant variant_from_string(std::string_view text) {
  for (const auto& [value, name] : kVariants) {
    if (name == text) return value;
  }
  throw ParseError("unknown variant '" + std::string(text) + "' (expected p1-zono, p1-cons, p2-zono or p2-cons)");
}

sets::ConstrainedZonotoped reduce_for_feedback(const sets::ConstrainedZonotoped& s, bool is_constrained, int order) {
  if (!is_constrained) {
    return sets::ConstrainedZonotoped(sets::reduce_order(sets::Zonotoped(s.c, s.G), order));
  }
  return sets::reduce_order_cons(s, order);
}

// ---- Sensor -------------------------------------------------------------------

Sensor::Sensor(int id, phe::PublicContext ctx, SensorModel model, bool restricted_R, std::uint64_t seed)
    : name_(sensor_name(id)), ctx_(std::move(ctx)), model_(std::move(model)), restricted_(restricted_R), rng_(seed) {
  if (model_.H.rows() != model_.R.size()) throw DimensionMismatch("sensor H rows and R size differ");
}

Message Sensor::step(int k, const VectorXd& y, Transcript* transcript) {
  if (y.size() != model_.H.rows()) throw DimensionMismatch("measurement size differs from sensor rows");
  return step(k, sets::Stripd(model_.H, y, model_.R), transcript);
}

Message Sensor::step(int k, const sets::Stripd& strip, Transcript* transcript) {
  if (strip.dim() != model_.H.cols()) throw DimensionMismatch("strip dimension differs from the sensor's");
  if (transcript) transcript->input(name_, k, sets::to_json(strip));
  Message m = make(MessageKind::kEncStrip, name_, std::string(kAggregator), k);
  m.with("y", encsets::to_json(encsets::encrypt_vector(ctx_, strip.y, rng_)), Tag::kCiphertext)
      .with("H", sets::matrix_to_json(strip.H), Tag::kPublic)
      .with("R", sets::vector_to_json(strip.R), restricted_ ? Tag::kRestricted : Tag::kPublic);
  return m;
}

// ---- GroupManager ---------------------------------------------------------------

GroupManager::GroupManager(int id, phe::PublicContext ctx, std::vector<SensorModel> sensors, ProtocolConfig cfg,
                           std::uint64_t seed)
    : name_(group_name(id)), ctx_(std::move(ctx)), sensors_(std::move(sensors)), cfg_(cfg), rng_(seed) {}

void GroupManager::receive(const Message& m) {
  if (m.sender != kQuery || (m.kind != MessageKind::kInitSet && m.kind != MessageKind::kResult)) {
    throw ProtocolStall(at_step(m.k, name_ + " cannot accept " + std::string(to_string(m.kind)) + " from " +
                                         m.sender));
  }
  prior_ = plain_from(m);
}

Message GroupManager::step(int k, const std::vector<VectorXd>& measurements, Transcript* transcript) {
  if (measurements.size() != sensors_.size()) {
    throw ProtocolStall(at_step(k, name_ + " expected " + std::to_string(sensors_.size()) + " measurements"));
  }
  std::vector<sets::Stripd> strips;
  for (std::size_t i = 0; i < sensors_.size(); ++i) strips.emplace_back(sensors_[i].H, measurements[i], sensors_[i].R);
  return step(k, strips, transcript);
}

Message GroupManager::step(int k, const std::vector<sets::Stripd>& strips, Transcript* transcript) {
  if (!prior_) throw ProtocolStall(at_step(k, name_ + " has no prior set"));
  if (strips.size() != sensors_.size()) {
    throw ProtocolStall(at_step(k, name_ + " expected " + std::to_string(sensors_.size()) + " strips"));
  }
  if (transcript) {
    json local = json::array();
    for (const auto& s : strips) local.push_back(sets::to_json(s));
    transcript->input(name_, k, json{{"strips", std::move(local)}});
  }

  Message m = make(MessageKind::kEncSet, name_, std::string(kAggregator), k);
  const sets::Zonotoped outer(prior_->c, prior_->G);
  if (constrained(cfg_.variant)) {
    sets::ConstrainedZonotoped local = *prior_;
    if (!strips.empty()) local = sets::intersect_conszono_strips(local, strips, sets::compute_lambda(outer, strips));
    put_enc(m, encsets::encrypt_cons(ctx_, local, rng_));
  } else {
    sets::Zonotoped local = outer;
    if (!strips.empty()) local = sets::intersect_zono_strips(local, strips, sets::compute_lambda(outer, strips));
    put_enc(m, encsets::encrypt_zono(ctx_, local, rng_));
  }
  return m;
}

// ---- Aggregator ------------------------------------------------------------------

Aggregator::Aggregator(phe::PublicContext ctx, sets::SystemModeld model, ProtocolConfig cfg, int inputs,
                       std::uint64_t seed)
    : ctx_(std::move(ctx)), model_(std::move(model)), cfg_(cfg), inputs_(inputs), rng_(seed) {
  if (inputs < 0) throw ContractViolation("input count must be nonnegative");
}

void Aggregator::receive(const Message& m) {
  const bool from_query = m.sender == kQuery;
  const bool p1 = !uses_groups(cfg_.variant);
  try {
    switch (m.kind) {
      case MessageKind::kInitSet:
      case MessageKind::kRefresh:
        if (!from_query || !p1) break;
        if (constrained(cfg_.variant)) {
          cons_ = encsets::enc_cons_from_json(cons_payload(m.payload));
          encsets::check(*cons_);
        } else {
          zono_ = encsets::enc_zono_from_json(m.payload);
          encsets::check(*zono_);
        }
        return;
      case MessageKind::kEncStrip: {
        const int i = sensor_index(m.sender);
        if (i < 0 || !p1) break;
        encsets::EncStrip s = encsets::enc_strip_from_json(m.payload);
        encsets::check(s);
        strips_[m.k][i] = std::move(s);
        return;
      }
      case MessageKind::kEncSet: {
        const int j = group_index(m.sender);
        if (j < 0 || p1) break;
        if (constrained(cfg_.variant)) {
          csets_[m.k][j] = encsets::enc_cons_from_json(cons_payload(m.payload));
        } else {
          zsets_[m.k][j] = encsets::enc_zono_from_json(m.payload);
        }
        return;
      }
      case MessageKind::kResult:
        break;
    }
  } catch (const json::exception& e) {
    throw ProtocolStall(at_step(m.k, std::string("malformed payload from ") + m.sender + ": " + e.what()));
  }
  throw ProtocolStall(at_step(m.k, "aggregator cannot accept " + std::string(to_string(m.kind)) + " from " +
                                       m.sender));
}

Message Aggregator::step(int k, Transcript* transcript) {
  try {
    return uses_groups(cfg_.variant) ? step_p2(k, transcript) : step_p1(k, transcript);
  } catch (const ScaleOverflow& e) {
    throw ScaleOverflow(at_step(k, e.what()));
  }
}

Message Aggregator::step_p1(int k, Transcript* transcript) {
  if (!zono_ && !cons_) throw ProtocolStall(at_step(k, "aggregator holds no prior set"));
  auto& pending = strips_[k];
  if (int(pending.size()) != inputs_) {
    throw ProtocolStall(at_step(k, "aggregator has " + std::to_string(pending.size()) + " of " +
                                       std::to_string(inputs_) + " strips"));
  }
  std::vector<encsets::EncStrip> strips;
  for (auto& [i, s] : pending) strips.push_back(std::move(s));
  strips_.erase(k);
  const std::vector<sets::Stripd> shapes = encsets::strip_shapes(strips);
  const Index n = model_.dim();

  Message out = make(MessageKind::kResult, std::string(kAggregator), std::string(kQuery), k);
  if (constrained(cfg_.variant)) {
    encsets::EncConsZonotope c = *cons_;
    if (!strips.empty()) {
      const sets::LambdaGaind gain = sets::random_contractive_lambda(n, shapes, rng_);
      if (transcript) transcript->coins(std::string(kAggregator), k, gain_coins(gain));
      c = encsets::enc_meas_update_cons(ctx_, c, strips, gain);
    }
    c = encsets::enc_time_update(ctx_, c, model_, cfg_.order);
    put_enc(out, c);
    cons_ = std::move(c);
  } else {
    encsets::EncZonotope z = *zono_;
    if (!strips.empty()) {
      const sets::LambdaGaind gain = sets::compute_lambda(sets::Zonotoped(VectorXd::Zero(n), z.G), shapes);
      z = encsets::enc_meas_update_zono(ctx_, z, strips, gain);
    }
    z = encsets::enc_time_update(ctx_, z, model_, cfg_.order);
    if (cfg_.swap) {
      const std::vector<Index> perm = sets::random_permutation(z.num_generators(), rng_);
      if (transcript) transcript->coins(std::string(kAggregator), k, json{{"permutation", perm}});
      z.G = sets::permute_columns(z.G, perm);
    }
    put_enc(out, z);
    zono_ = std::move(z);
  }
  return out;
}

Message Aggregator::step_p2(int k, Transcript*) {
  const std::size_t have = constrained(cfg_.variant) ? csets_[k].size() : zsets_[k].size();
  if (int(have) != inputs_ || inputs_ == 0) {
    throw ProtocolStall(at_step(k, "aggregator has " + std::to_string(have) + " of " + std::to_string(inputs_) +
                                       " group sets"));
  }
  Message out = make(MessageKind::kResult, std::string(kAggregator), std::string(kQuery), k);
  if (constrained(cfg_.variant)) {
    std::vector<encsets::EncConsZonotope> cs;
    for (auto& [j, c] : csets_[k]) cs.push_back(std::move(c));
    csets_.erase(k);
    put_enc(out, encsets::enc_time_update(ctx_, encsets::enc_diffusion_cons(ctx_, cs), model_, cfg_.order));
  } else {
    std::vector<encsets::EncZonotope> zs;
    for (auto& [j, z] : zsets_[k]) zs.push_back(std::move(z));
    zsets_.erase(k);
    const encsets::EncZonotope fused = encsets::enc_diffusion_zono(ctx_, zs, encsets::weights_of(zs));
    put_enc(out, encsets::enc_time_update(ctx_, fused, model_, cfg_.order));
  }
  return out;
}

// ---- QueryNode ----------------------------------------------------------------------

QueryNode::QueryNode(phe::KeyPair keys, int frac_bits, ProtocolConfig cfg, int groups, std::uint64_t seed)
    : sk_(std::move(keys.priv)), ctx_(std::move(keys.pub), frac_bits), cfg_(cfg), groups_(groups), rng_(seed) {}

std::vector<Message> QueryNode::initialize(const sets::ConstrainedZonotoped& initial, Transcript* transcript) {
  const bool is_constrained = constrained(cfg_.variant);
  if (!is_constrained && initial.num_constraints() > 0) {
    throw ContractViolation("zonotope variants need an unconstrained initial set");
  }
  if (transcript) transcript->input(std::string(kQuery), 0, json{{"initial_set", sets::to_json(initial)}});
  std::vector<Message> out;
  if (uses_groups(cfg_.variant)) {
    for (int j = 0; j < groups_; ++j) {
      Message m = make(MessageKind::kInitSet, std::string(kQuery), group_name(j), 0);
      put_plain(m, initial, is_constrained);
      out.push_back(std::move(m));
    }
    return out;
  }
  Message m = make(MessageKind::kInitSet, std::string(kQuery), std::string(kAggregator), 0);
  if (is_constrained) {
    put_enc(m, encsets::encrypt_cons(ctx_, initial, rng_));
  } else {
    put_enc(m, encsets::encrypt_zono(ctx_, sets::Zonotoped(initial.c, initial.G), rng_));
  }
  out.push_back(std::move(m));
  return out;
}

QueryOutput QueryNode::step(const Message& result, Transcript*) {
  if (result.kind != MessageKind::kResult || result.sender != kAggregator) {
    throw ProtocolStall(at_step(result.k, "query expected a Result from the aggregator"));
  }
  const bool is_constrained = constrained(cfg_.variant);
  QueryOutput out;
  try {
    if (is_constrained) {
      const encsets::EncConsZonotope c = encsets::enc_cons_from_json(cons_payload(result.payload));
      encsets::check(c);
      out.set = encsets::decrypt_cons(sk_, ctx_.codec, c);
    } else {
      const encsets::EncZonotope z = encsets::enc_zono_from_json(result.payload);
      encsets::check(z);
      out.set = sets::ConstrainedZonotoped(encsets::decrypt_zono(sk_, ctx_.codec, z));
    }
  } catch (const json::exception& e) {
    throw ParseError(at_step(result.k, std::string("malformed result: ") + e.what()));
  }
  out.outgoing = feedback(result.k, reduce_for_feedback(out.set, is_constrained, cfg_.order));
  return out;
}

std::vector<Message> QueryNode::feedback(int k, const sets::ConstrainedZonotoped& reduced) {
  const bool is_constrained = constrained(cfg_.variant);
  std::vector<Message> out;
  if (uses_groups(cfg_.variant)) {
    for (int j = 0; j < groups_; ++j) {
      Message m = make(MessageKind::kResult, std::string(kQuery), group_name(j), k);
      put_plain(m, reduced, is_constrained);
      out.push_back(std::move(m));
    }
    return out;
  }
  if (!cfg_.refresh) return out;
  Message m = make(MessageKind::kRefresh, std::string(kQuery), std::string(kAggregator), k);
  if (is_constrained) {
    put_enc(m, encsets::encrypt_cons(ctx_, reduced, rng_));
  } else {
    put_enc(m, encsets::encrypt_zono(ctx_, sets::Zonotoped(reduced.c, reduced.G), rng_));
  }
  out.push_back(std::move(m));
  return out;
}

}  // namespace ppse::protocol
