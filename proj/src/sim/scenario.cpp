#include "ppse/sim/scenario.hpp"

#include <fstream>
#include <random>
#include <set>

#include "ppse/error.hpp"
#include "ppse/phe/codec.hpp"
#include "ppse/sets/json.hpp"
#include "ppse/sets/ops.hpp"

namespace ppse::sim {

using nlohmann::json;

sets::ConstrainedZonotoped Scenario::initial_set() const {
  return sets::ConstrainedZonotoped(
      sets::Zonotoped(initial_center, MatrixXd(initial_half_widths.asDiagonal())));
}

std::uint64_t derive_seed(std::uint64_t base, std::string_view label) {
  // FNV-1a over the label, then one splitmix64 round over the combination.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : label) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (h | 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

Scenario default_scenario() {
  Scenario s;
  s.name = "default";
  const Index n = 3;
  s.model = sets::SystemModeld(MatrixXd::Identity(n, n), 0.01 * MatrixXd::Identity(n, n));
  std::mt19937_64 rng(derive_seed(2024, "sensors"));
  for (int i = 0; i < 8; ++i) {
    VectorXd h(n);
    do {
      for (Index d = 0; d < n; ++d) h(d) = sets::uniform(rng, -1.0, 1.0);
    } while (h.norm() < 0.1);
    s.sensors.push_back({MatrixXd(h.normalized().transpose()), VectorXd::Constant(1, 0.1)});
  }
  s.groups = {{0, 1, 2, 3}, {4, 5, 6, 7}};
  s.steps = 100;
  s.initial_center = VectorXd::Zero(n);
  s.initial_half_widths = VectorXd::Constant(n, 4.0);
  s.seed = 2024;
  return s;
}

namespace {

class Reader {
 public:
  explicit Reader(std::vector<std::string>& errors) : errors_(errors) {}

  void error(const std::string& path, const std::string& what) { errors_.push_back(path + ": " + what); }

  const json* field(const json& obj, const std::string& key, const std::string& path, bool required = true) {
    if (!obj.is_object() || !obj.contains(key)) {
      if (required) error(path, "missing");
      return nullptr;
    }
    return &obj.at(key);
  }

  std::optional<MatrixXd> matrix(const json* j, const std::string& path) {
    if (!j) return std::nullopt;
    try {
      MatrixXd M = sets::matrix_from_json(*j);
      if (M.rows() == 0) {
        error(path, "must have at least one row");
        return std::nullopt;
      }
      if (!M.allFinite()) {
        error(path, "entries must be finite");
        return std::nullopt;
      }
      return M;
    } catch (const Error& e) {
      error(path, e.what());
      return std::nullopt;
    }
  }

  std::optional<VectorXd> vector(const json* j, const std::string& path) {
    if (!j) return std::nullopt;
    try {
      VectorXd v = sets::vector_from_json(*j);
      if (!v.allFinite()) {
        error(path, "entries must be finite");
        return std::nullopt;
      }
      return v;
    } catch (const Error& e) {
      error(path, e.what());
      return std::nullopt;
    }
  }

  template <typename T>
  std::optional<T> number(const json* j, const std::string& path) {
    if (!j) return std::nullopt;
    if constexpr (std::is_integral_v<T>) {
      if (!j->is_number_integer()) {
        error(path, "must be an integer");
        return std::nullopt;
      }
    } else if (!j->is_number()) {
      error(path, "must be a number");
      return std::nullopt;
    }
    return j->get<T>();
  }

  std::optional<bool> boolean(const json* j, const std::string& path) {
    if (!j) return std::nullopt;
    if (!j->is_boolean()) {
      error(path, "must be true or false");
      return std::nullopt;
    }
    return j->get<bool>();
  }

 private:
  std::vector<std::string>& errors_;
};

void check_groups(const std::vector<std::vector<int>>& groups, std::size_t sensors, std::vector<std::string>& errors) {
  std::vector<int> seen(sensors, 0);
  for (std::size_t j = 0; j < groups.size(); ++j) {
    const std::string path = "groups[" + std::to_string(j) + "]";
    if (groups[j].empty()) errors.push_back(path + ": group has no sensors");
    for (int i : groups[j]) {
      if (i < 0 || std::size_t(i) >= sensors) {
        errors.push_back(path + ": sensor " + std::to_string(i) + " does not exist");
      } else if (++seen[std::size_t(i)] == 2) {
        errors.push_back("groups: sensor " + std::to_string(i) + " is assigned more than once");
      }
    }
  }
  for (std::size_t i = 0; i < sensors; ++i) {
    if (seen[i] == 0) errors.push_back("groups: sensor " + std::to_string(i) + " is not assigned to any group");
  }
}

}  // namespace

ScenarioParse parse_scenario(const json& j) {
  ScenarioParse out;
  Reader r(out.errors);
  if (!j.is_object()) {
    r.error("$", "scenario must be a JSON object");
    return out;
  }
  Scenario s;
  if (const json* name = r.field(j, "name", "name", false)) {
    if (name->is_string()) {
      s.name = name->get<std::string>();
    } else {
      r.error("name", "must be a string");
    }
  }

  std::optional<MatrixXd> F;
  std::optional<MatrixXd> Q;
  if (const json* model = r.field(j, "model", "model")) {
    F = r.matrix(r.field(*model, "F", "model.F"), "model.F");
    Q = r.matrix(r.field(*model, "Q", "model.Q"), "model.Q");
  }
  Index n = 0;
  if (F) {
    if (F->rows() != F->cols()) {
      r.error("model.F", "must be square");
    } else {
      n = F->rows();
    }
  }
  if (F && Q && n > 0) {
    if (Q->rows() != n) {
      r.error("model.Q", "must have " + std::to_string(n) + " rows");
    } else {
      s.model = sets::SystemModeld(*F, *Q);
    }
  }

  if (const json* sensors = r.field(j, "sensors", "sensors")) {
    if (!sensors->is_array()) r.error("sensors", "must be an array");
    for (std::size_t i = 0; sensors->is_array() && i < sensors->size(); ++i) {
      const std::string path = "sensors[" + std::to_string(i) + "]";
      const json& entry = (*sensors)[i];
      auto H = r.matrix(r.field(entry, "H", path + ".H"), path + ".H");
      auto R = r.vector(r.field(entry, "R", path + ".R"), path + ".R");
      if (H && n > 0 && H->cols() != n) r.error(path + ".H", "must have " + std::to_string(n) + " columns");
      if (H && R && R->size() != H->rows()) r.error(path + ".R", "needs one entry per row of H");
      if (R && (R->array() <= 0.0).any()) r.error(path + ".R", "entries must be positive");
      s.sensors.push_back({H.value_or(MatrixXd()), R.value_or(VectorXd())});
    }
  }

  if (const json* groups = r.field(j, "groups", "groups", false)) {
    if (!groups->is_array()) {
      r.error("groups", "must be an array of sensor index arrays");
    } else {
      bool shaped = true;
      for (std::size_t g = 0; g < groups->size(); ++g) {
        const json& members = (*groups)[g];
        std::vector<int> ids;
        if (!members.is_array()) {
          r.error("groups[" + std::to_string(g) + "]", "must be an array of sensor indices");
          shaped = false;
          continue;
        }
        for (const auto& id : members) {
          if (!id.is_number_integer()) {
            r.error("groups[" + std::to_string(g) + "]", "sensor indices must be integers");
            shaped = false;
            break;
          }
          ids.push_back(id.get<int>());
        }
        s.groups.push_back(std::move(ids));
      }
      if (shaped) check_groups(s.groups, s.sensors.size(), out.errors);
    }
  }

  if (auto steps = r.number<int>(r.field(j, "steps", "steps"), "steps")) {
    if (*steps < 0) r.error("steps", "must be nonnegative");
    s.steps = *steps;
  }

  if (const json* init = r.field(j, "initial_set", "initial_set")) {
    auto c = r.vector(r.field(*init, "center", "initial_set.center"), "initial_set.center");
    auto w = r.vector(r.field(*init, "half_widths", "initial_set.half_widths"), "initial_set.half_widths");
    if (c && n > 0 && c->size() != n) r.error("initial_set.center", "must have " + std::to_string(n) + " entries");
    if (w && n > 0 && w->size() != n) {
      r.error("initial_set.half_widths", "must have " + std::to_string(n) + " entries");
    }
    if (w && (w->array() < 0.0).any()) r.error("initial_set.half_widths", "entries must be nonnegative");
    s.initial_center = c.value_or(VectorXd());
    s.initial_half_widths = w.value_or(VectorXd());
  }
  if (const json* x0 = r.field(j, "initial_state", "initial_state", false)) {
    if (auto x = r.vector(x0, "initial_state")) {
      if (n > 0 && x->size() != n) r.error("initial_state", "must have " + std::to_string(n) + " entries");
      s.initial_state = *x;
    }
  }
  if (s.initial_state && s.initial_state->size() == s.initial_center.size() &&
      s.initial_center.size() == s.initial_half_widths.size() &&
      ((*s.initial_state - s.initial_center).cwiseAbs().array() > s.initial_half_widths.array()).any()) {
    r.error("initial_state", "lies outside the initial set");
  }

  if (const json* keys = r.field(j, "keys", "keys", false)) {
    if (auto bits = r.number<int>(r.field(*keys, "bits", "keys.bits", false), "keys.bits")) {
      if (*bits < 512) r.error("keys.bits", "must be at least 512");
      s.key_bits = *bits;
    }
    if (auto f = r.number<int>(r.field(*keys, "frac_bits", "keys.frac_bits", false), "keys.frac_bits")) {
      if (*f < 1) r.error("keys.frac_bits", "must be positive");
      s.frac_bits = *f;
    }
    if (3 * s.frac_bits + phe::FixedPointCodec::kDefaultMagnitudeBits >= s.key_bits - 1) {
      r.error("keys.frac_bits", "leaves no room for one plaintext multiplication at " + std::to_string(s.key_bits) +
                                    " bits");
    }
  }

  if (const json* p = r.field(j, "protocol", "protocol", false)) {
    if (const json* v = r.field(*p, "variant", "protocol.variant", false)) {
      try {
        s.protocol.variant = protocol::variant_from_string(v->is_string() ? v->get<std::string>() : "");
      } catch (const ParseError& e) {
        r.error("protocol.variant", e.what());
      }
    }
    if (auto swap = r.boolean(r.field(*p, "swap", "protocol.swap", false), "protocol.swap")) s.protocol.swap = *swap;
    if (auto refresh = r.boolean(r.field(*p, "refresh", "protocol.refresh", false), "protocol.refresh")) {
      s.protocol.refresh = *refresh;
    }
    if (auto order = r.number<int>(r.field(*p, "order", "protocol.order", false), "protocol.order")) {
      if (*order < 1) r.error("protocol.order", "must be at least 1");
      s.protocol.order = *order;
    }
  }

  if (const json* seed = r.field(j, "seed", "seed", false)) {
    if (seed->is_number_unsigned()) {
      s.seed = seed->get<std::uint64_t>();
    } else {
      r.error("seed", "must be a nonnegative integer");
    }
  }
  if (auto tol = r.number<double>(r.field(j, "fp_tolerance", "fp_tolerance", false), "fp_tolerance")) {
    if (!(*tol > 0.0)) r.error("fp_tolerance", "must be positive");
    s.fp_tolerance = *tol;
  }

  if (out.errors.empty()) {
    for (const auto& e : check_variant(s)) out.errors.push_back(e);
  }
  if (out.errors.empty()) out.scenario = std::move(s);
  return out;
}

ScenarioParse read_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) return {std::nullopt, {path.string() + ": cannot open"}};
  try {
    return parse_scenario(json::parse(in));
  } catch (const json::parse_error& e) {
    return {std::nullopt, {path.string() + ": invalid JSON: " + e.what()}};
  }
}

std::vector<std::string> check_variant(const Scenario& s) {
  std::vector<std::string> errors;
  const bool groups = protocol::uses_groups(s.protocol.variant);
  if (groups) {
    if (s.groups.empty()) errors.push_back("groups: Protocol 2 variants need a sensor partition");
    check_groups(s.groups, s.sensors.size(), errors);
    if (s.protocol.swap) errors.push_back("protocol.swap: the swap mitigation applies to Protocol 1 only");
  }
  return errors;
}

json to_json(const Scenario& s) {
  json sensors = json::array();
  for (const auto& m : s.sensors) sensors.push_back({{"H", sets::matrix_to_json(m.H)}, {"R", sets::vector_to_json(m.R)}});
  json j{{"name", s.name},
         {"model", {{"F", sets::matrix_to_json(s.model.F)}, {"Q", sets::matrix_to_json(s.model.Q)}}},
         {"sensors", std::move(sensors)},
         {"groups", s.groups},
         {"steps", s.steps},
         {"initial_set",
          {{"center", sets::vector_to_json(s.initial_center)},
           {"half_widths", sets::vector_to_json(s.initial_half_widths)}}},
         {"keys", {{"bits", s.key_bits}, {"frac_bits", s.frac_bits}}},
         {"protocol",
          {{"variant", std::string(protocol::to_string(s.protocol.variant))},
           {"swap", s.protocol.swap},
           {"refresh", s.protocol.refresh},
           {"order", s.protocol.order}}},
         {"seed", s.seed},
         {"fp_tolerance", s.fp_tolerance}};
  if (s.initial_state) j["initial_state"] = sets::vector_to_json(*s.initial_state);
  return j;
}

}  // namespace ppse::sim
