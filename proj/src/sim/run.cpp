#include "ppse/sim/run.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <memory>
#include <random>

#include "ppse/error.hpp"
#include "ppse/sets/intersect.hpp"
#include "ppse/sets/json.hpp"
#include "ppse/sets/ops.hpp"
#include "ppse/sets/reduce.hpp"
#include "ppse/sim/bus.hpp"
#include "ppse/sim/plant.hpp"

namespace ppse::sim {

using nlohmann::json;
using protocol::Message;

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

std::vector<sets::Stripd> pick(const std::vector<sets::Stripd>& strips, const std::vector<int>& ids) {
  std::vector<sets::Stripd> out;
  for (int i : ids) out.push_back(strips[std::size_t(i)]);
  return out;
}

// The protocol's arithmetic in the clear, with the aggregator's coin stream.
class Reference {
 public:
  Reference(const Scenario& s, std::uint64_t aggregator_seed, const sets::ConstrainedZonotoped& initial)
      : s_(s), rng_(aggregator_seed), prior_(initial) {}

  sets::ConstrainedZonotoped step(const std::vector<sets::Stripd>& strips) {
    const protocol::ProtocolConfig& cfg = s_.protocol;
    const bool cons = protocol::constrained(cfg.variant);
    sets::ConstrainedZonotoped result =
        protocol::uses_groups(cfg.variant) ? fuse(strips, cons) : (cons ? p1_cons(strips) : p1_zono(strips));
    if (protocol::uses_groups(cfg.variant) || cfg.refresh) {
      prior_ = protocol::reduce_for_feedback(result, cons, cfg.order);
    } else {
      prior_ = result;
    }
    return result;
  }

 private:
  sets::ConstrainedZonotoped p1_zono(const std::vector<sets::Stripd>& strips) {
    sets::Zonotoped z(prior_.c, prior_.G);
    if (!strips.empty()) {
      z = sets::intersect_zono_strips(z, strips, sets::compute_lambda(sets::Zonotoped(VectorXd::Zero(z.dim()), z.G), strips));
    }
    z = sets::time_update(z, s_.model, s_.protocol.order);
    if (s_.protocol.swap) z.G = sets::permute_columns(z.G, sets::random_permutation(z.num_generators(), rng_));
    return sets::ConstrainedZonotoped(z);
  }

  sets::ConstrainedZonotoped p1_cons(const std::vector<sets::Stripd>& strips) {
    sets::ConstrainedZonotoped c = prior_;
    if (!strips.empty()) {
      c = sets::intersect_conszono_strips(c, strips, sets::random_contractive_lambda(c.dim(), strips, rng_));
    }
    return sets::time_update(c, s_.model, s_.protocol.order);
  }

  sets::ConstrainedZonotoped fuse(const std::vector<sets::Stripd>& strips, bool cons) {
    const sets::Zonotoped outer(prior_.c, prior_.G);
    if (cons) {
      std::vector<sets::ConstrainedZonotoped> local;
      for (const auto& ids : s_.groups) {
        const auto mine = pick(strips, ids);
        local.push_back(mine.empty() ? prior_
                                     : sets::intersect_conszono_strips(prior_, mine, sets::compute_lambda(outer, mine)));
      }
      return sets::time_update(sets::intersect_conszonos(local), s_.model, s_.protocol.order);
    }
    std::vector<sets::Zonotoped> local;
    for (const auto& ids : s_.groups) {
      const auto mine = pick(strips, ids);
      local.push_back(mine.empty() ? outer : sets::intersect_zono_strips(outer, mine, sets::compute_lambda(outer, mine)));
    }
    const sets::Zonotoped fused = sets::intersect_zonos_weighted(local, sets::compute_weights(local));
    return sets::ConstrainedZonotoped(sets::time_update(fused, s_.model, s_.protocol.order));
  }

  const Scenario& s_;
  std::mt19937_64 rng_;
  sets::ConstrainedZonotoped prior_;
};

double max_abs_diff(const MatrixXd& a, const MatrixXd& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return std::numeric_limits<double>::infinity();
  return a.size() == 0 ? 0.0 : (a - b).cwiseAbs().maxCoeff();
}

double set_difference(const sets::ConstrainedZonotoped& a, const sets::ConstrainedZonotoped& b) {
  return std::max({max_abs_diff(a.c, b.c), max_abs_diff(a.G, b.G), max_abs_diff(a.A, b.A), max_abs_diff(a.b, b.b)});
}

VectorXd point_estimate(const sets::ConstrainedZonotoped& s, bool cons) {
  return cons ? sets::chebyshev_center(s) : s.c;
}

void fill(TraceRecord& r, bool cons, double tol) {
  if (cons) {
    r.hull = sets::interval_hull(r.set);
  } else {
    r.hull = sets::interval_hull(sets::Zonotoped(r.set.c, r.set.G));
  }
  r.estimate = point_estimate(r.set, cons);
  if (r.truth) {
    r.contained = cons ? sets::contains(r.set, *r.truth, tol) : sets::contains(sets::Zonotoped(r.set.c, r.set.G), *r.truth, tol);
    r.error = (r.estimate - *r.truth).norm();
  } else {
    r.error = std::numeric_limits<double>::quiet_NaN();
  }
}

json setup_json(const Scenario& s, const phe::PublicKey& pk, int steps, bool replay, const std::vector<std::string>& roles) {
  const protocol::ProtocolConfig& cfg = s.protocol;
  json sensors = json::array();
  for (const auto& m : s.sensors) {
    json entry{{"H", sets::matrix_to_json(m.H)}};
    if (!cfg.swap) entry["R"] = sets::vector_to_json(m.R);
    sensors.push_back(std::move(entry));
  }
  return json{{"variant", std::string(protocol::to_string(cfg.variant))},
              {"n", s.dim()},
              {"steps", steps},
              {"order", cfg.order},
              {"swap", cfg.swap},
              {"refresh", cfg.refresh},
              {"replay", replay},
              {"model", {{"F", sets::matrix_to_json(s.model.F)}, {"Q", sets::matrix_to_json(s.model.Q)}}},
              {"sensors", std::move(sensors)},
              {"groups", protocol::uses_groups(cfg.variant) ? json(s.groups) : json::array()},
              {"roles", roles},
              {"key_bits", pk.bits()},
              {"frac_bits", s.frac_bits},
              {"modulus", pk.n.get_str(16)}};
}

using TruthFn = std::function<std::optional<VectorXd>(int k)>;

RunOutput run_impl(const Scenario& s, const phe::KeyPair& keys, int steps, const StripFeed& feed, const TruthFn& truth,
                   bool replay) {
  if (const auto errors = check_variant(s); !errors.empty()) throw ContractViolation(errors.front());
  const protocol::ProtocolConfig& cfg = s.protocol;
  const bool p2 = protocol::uses_groups(cfg.variant);
  const bool cons = protocol::constrained(cfg.variant);
  const double tol = containment_tolerance(s.frac_bits);
  const phe::PublicContext ctx(keys.pub, s.frac_bits);

  std::vector<std::string> roles{std::string(protocol::kQuery), std::string(protocol::kAggregator)};
  std::vector<std::unique_ptr<protocol::Sensor>> sensors;
  std::vector<std::unique_ptr<protocol::GroupManager>> groups;
  if (p2) {
    for (std::size_t j = 0; j < s.groups.size(); ++j) {
      std::vector<protocol::SensorModel> members;
      for (int i : s.groups[j]) members.push_back(s.sensors[std::size_t(i)]);
      const std::string name = protocol::group_name(int(j));
      groups.push_back(std::make_unique<protocol::GroupManager>(int(j), ctx, std::move(members), cfg,
                                                                derive_seed(s.seed, name)));
      roles.push_back(name);
    }
  } else {
    for (std::size_t i = 0; i < s.sensors.size(); ++i) {
      const std::string name = protocol::sensor_name(int(i));
      sensors.push_back(
          std::make_unique<protocol::Sensor>(int(i), ctx, s.sensors[i], cfg.swap, derive_seed(s.seed, name)));
      roles.push_back(name);
    }
  }
  const std::uint64_t aggregator_seed = derive_seed(s.seed, protocol::kAggregator);
  const int inputs = int(p2 ? groups.size() : sensors.size());
  protocol::Aggregator aggregator(ctx, s.model, cfg, inputs, aggregator_seed);
  protocol::QueryNode query(keys, s.frac_bits, cfg, int(groups.size()), derive_seed(s.seed, protocol::kQuery));

  RunOutput out;
  out.config = cfg;
  protocol::Transcript& transcript = out.transcript;
  transcript.setup(setup_json(s, keys.pub, steps, replay, roles));
  Bus bus(&transcript);
  std::optional<Message> to_query;
  auto deliver = [&](const Message& m) {
    if (m.receiver == protocol::kAggregator) {
      aggregator.receive(m);
    } else if (m.receiver == protocol::kQuery) {
      to_query = m;
    } else if (const int j = protocol::group_index(m.receiver); j >= 0 && std::size_t(j) < groups.size()) {
      groups[std::size_t(j)]->receive(m);
    } else {
      throw ProtocolStall("step " + std::to_string(m.k) + ": no role named " + m.receiver);
    }
  };

  const sets::ConstrainedZonotoped initial = s.initial_set();
  for (auto& m : query.initialize(initial, &transcript)) bus.send(std::move(m));
  bus.drain(deliver);
  Reference reference(s, aggregator_seed, initial);

  TraceRecord first;
  first.k = 0;
  first.truth = truth(0);
  first.set = initial;
  fill(first, cons, tol);
  out.trace.push_back(std::move(first));

  for (int k = 1; k <= steps; ++k) {
    const std::vector<sets::Stripd> strips = feed(k);
    if (strips.size() != s.sensors.size()) {
      throw ProtocolStall("step " + std::to_string(k) + ": " + std::to_string(strips.size()) + " of " +
                          std::to_string(s.sensors.size()) + " measurements available");
    }
    TraceRecord rec;
    rec.k = k;
    double sensor_total = 0.0;
    if (p2) {
      for (std::size_t j = 0; j < groups.size(); ++j) {
        const auto t0 = Clock::now();
        Message m = groups[j]->step(k, pick(strips, s.groups[j]), &transcript);
        sensor_total += ms_since(t0);
        bus.send(std::move(m));
      }
    } else {
      for (std::size_t i = 0; i < sensors.size(); ++i) {
        const auto t0 = Clock::now();
        Message m = sensors[i]->step(k, strips[i], &transcript);
        sensor_total += ms_since(t0);
        bus.send(std::move(m));
      }
    }
    rec.time.sensor_ms = inputs > 0 ? sensor_total / inputs : 0.0;
    bus.drain(deliver);

    auto t0 = Clock::now();
    bus.send(aggregator.step(k, &transcript));
    rec.time.aggregator_ms = ms_since(t0);
    bus.drain(deliver);
    if (!to_query) throw ProtocolStall("step " + std::to_string(k) + ": no result reached the query");

    t0 = Clock::now();
    protocol::QueryOutput answer = query.step(*to_query, &transcript);
    rec.time.query_ms = ms_since(t0);
    to_query.reset();
    for (auto& m : answer.outgoing) bus.send(std::move(m));
    bus.drain(deliver);

    rec.truth = truth(k);
    rec.set = std::move(answer.set);
    fill(rec, cons, tol);
    const sets::ConstrainedZonotoped expected = reference.step(strips);
    rec.fp_error = set_difference(rec.set, expected);
    rec.estimate_gap = max_abs_diff(rec.estimate, point_estimate(expected, cons));
    out.trace.push_back(std::move(rec));
  }
  return out;
}

}  // namespace

double containment_tolerance(int frac_bits) { return sets::kFeasTol + std::ldexp(1.0, -frac_bits + 4); }

RunOutput run(const Scenario& s, const phe::KeyPair& keys) {
  // Trajectory and measurements come from their own streams so that they do
  // not depend on the variant being run.
  std::mt19937_64 plant_rng(derive_seed(s.seed, "plant"));
  std::mt19937_64 noise_rng(derive_seed(s.seed, "measurement"));
  std::vector<VectorXd> xs;
  xs.push_back(s.initial_state ? *s.initial_state : sample_box(s.initial_center, s.initial_half_widths, plant_rng));
  std::vector<std::vector<sets::Stripd>> strips(std::size_t(s.steps) + 1);
  for (int k = 1; k <= s.steps; ++k) {
    const VectorXd& x = xs.back();
    for (const auto& sensor : s.sensors) strips[std::size_t(k)].emplace_back(sensor.H, measure(x, sensor, noise_rng), sensor.R);
    xs.push_back(plant_step(x, s.model, plant_rng));
  }
  return run_impl(
      s, keys, s.steps, [&](int k) { return strips[std::size_t(k)]; },
      [&](int k) { return std::optional<VectorXd>(xs[std::size_t(k)]); }, false);
}

RunOutput run_with_feed(const Scenario& s, const phe::KeyPair& keys, int steps, const StripFeed& feed) {
  return run_impl(s, keys, steps, feed, [](int) { return std::optional<VectorXd>(); }, true);
}

}  // namespace ppse::sim
