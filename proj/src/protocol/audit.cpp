#include "ppse/protocol/audit.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "ppse/error.hpp"
#include "ppse/phe/wire.hpp"
#include "ppse/protocol/roles.hpp"
#include "ppse/sets/intersect.hpp"
#include "ppse/sets/json.hpp"

namespace ppse::protocol {

using nlohmann::json;

namespace {

// Fields that carry position information and must never travel in the clear
// to a party that is not entitled to the estimate.
const std::set<std::string> kPrivateFields{"y", "c", "b"};
const std::set<std::string> kAggregatorFields{"y", "H", "R", "c", "G", "A", "b"};
const std::set<std::string> kKeyFields{"sk", "private_key", "secret_key"};

bool entitled_to_estimate(const std::string& role) { return role == kQuery || group_index(role) >= 0; }

bool all_ciphertexts(const json& value) {
  if (value.is_array()) {
    return std::all_of(value.begin(), value.end(), [](const json& v) { return all_ciphertexts(v); });
  }
  if (!value.is_string()) return false;
  try {
    phe::from_base64(value.get<std::string>());
    return true;
  } catch (const Error&) {
    return false;
  }
}

bool has_key_field(const json& value) {
  if (value.is_object()) {
    for (const auto& [key, v] : value.items()) {
      if (kKeyFields.count(key) || has_key_field(v)) return true;
    }
  } else if (value.is_array()) {
    return std::any_of(value.begin(), value.end(), [](const json& v) { return has_key_field(v); });
  }
  return false;
}

std::string where(const Message& m) {
  return std::string(to_string(m.kind)) + " " + m.sender + " -> " + m.receiver + " at k=" + std::to_string(m.k);
}

// Collects the first few violations of a check.
class Findings {
 public:
  void add(const std::string& what) {
    if (++count_ <= 3) items_.push_back(what);
  }
  AuditCheck finish(std::string name, std::string ok_detail) const {
    if (count_ == 0) return {std::move(name), true, std::move(ok_detail)};
    std::string detail = std::to_string(count_) + " violation(s): ";
    for (std::size_t i = 0; i < items_.size(); ++i) detail += (i ? "; " : "") + items_[i];
    return {std::move(name), false, detail};
  }

 private:
  int count_ = 0;
  std::vector<std::string> items_;
};

struct Setup {
  Variant variant;
  Index n = 0;
  int steps = 0;
  int order = sets::kDefaultOrder;
  bool swap = false;
  bool refresh = true;
  std::vector<SensorModel> sensors;
  bool has_R = true;
  bool replay = false;
  std::size_t groups = 0;
  std::set<std::string> roles;
};

Setup read_setup(const Transcript& t) {
  const json& j = t.setup_data();
  try {
    Setup s;
    s.variant = variant_from_string(j.at("variant").get<std::string>());
    s.n = j.at("n").get<Index>();
    s.steps = j.at("steps").get<int>();
    s.order = j.value("order", sets::kDefaultOrder);
    s.swap = j.value("swap", false);
    s.refresh = j.value("refresh", true);
    s.replay = j.value("replay", false);
    for (const auto& sensor : j.at("sensors")) {
      SensorModel m;
      m.H = sets::matrix_from_json(sensor.at("H"), s.n);
      if (sensor.contains("R")) {
        m.R = sets::vector_from_json(sensor.at("R"));
      } else {
        s.has_R = false;
      }
      s.sensors.push_back(std::move(m));
    }
    s.groups = j.value("groups", json::array()).size();
    for (const auto& r : j.at("roles")) s.roles.insert(r.get<std::string>());
    return s;
  } catch (const json::exception& e) {
    throw ContractViolation(std::string("incomplete transcript: bad setup entry: ") + e.what());
  }
}

// Numerical side of the Protocol 1 condition: the coalition knows every gain
// Λ_k (it is computed from public shapes) and the contribution Λ_r y_r of the
// honest sensors; y_r is pinned down exactly when Λ_r has full column rank.
std::string gain_rank_evidence(const Setup& s, const std::vector<Message>& results,
                               const sets::ConstrainedZonotoped& initial, const std::set<int>& honest) {
  std::vector<sets::Stripd> strips;
  std::vector<Index> cols;
  Index offset = 0;
  for (std::size_t i = 0; i < s.sensors.size(); ++i) {
    const SensorModel& m = s.sensors[i];
    strips.emplace_back(m.H, Eigen::VectorXd::Zero(m.H.rows()), m.R);
    if (honest.count(int(i))) {
      for (Index r = 0; r < m.H.rows(); ++r) cols.push_back(offset + r);
    }
    offset += m.H.rows();
  }
  if (cols.empty() || results.empty()) return "";
  Eigen::MatrixXd prior = initial.G;
  Index max_rank = 0;
  int solvable = 0;
  for (const Message& r : results) {
    const sets::LambdaGaind gain = sets::compute_lambda(sets::Zonotoped(Eigen::VectorXd::Zero(s.n), prior), strips);
    Eigen::MatrixXd honest_gain(s.n, Index(cols.size()));
    for (std::size_t c = 0; c < cols.size(); ++c) honest_gain.col(Index(c)) = gain.stacked.col(cols[c]);
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(honest_gain);
    qr.setThreshold(1e-9);
    max_rank = std::max<Index>(max_rank, qr.rank());
    solvable += qr.rank() == Index(cols.size());
    Eigen::MatrixXd G = sets::matrix_from_json(r.payload.at("G"));
    if (s.refresh) G = sets::reduce_generators(G, s.order);
    prior = std::move(G);
  }
  return "; max rank(Λ_r) = " + std::to_string(max_rank) + " over " + std::to_string(results.size()) +
         " steps, honest measurements solvable at " + std::to_string(solvable) + " step(s)";
}

}  // namespace

bool AuditReport::passed() const {
  for (const auto& c : checks) {
    if (!c.passed) return false;
  }
  return !rank || rank->holds;
}

std::string AuditReport::to_text() const {
  std::ostringstream out;
  out << "coalition:";
  for (const auto& r : coalition) out << ' ' << r;
  out << '\n';
  for (const auto& c : checks) out << (c.passed ? "[pass] " : "[FAIL] ") << c.name << ": " << c.detail << '\n';
  if (rank) {
    out << (rank->holds ? "[pass] " : "[FLAG] ") << "condition " << rank->statement << ": " << rank->detail << '\n';
  }
  out << "verdict: " << (passed() ? "private" : "NOT private") << '\n';
  return out.str();
}

json AuditReport::to_json() const {
  json checks_json = json::array();
  for (const auto& c : checks) checks_json.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
  json j{{"coalition", coalition}, {"checks", std::move(checks_json)}, {"passed", passed()}};
  if (rank) {
    j["condition"] = {{"statement", rank->statement}, {"lhs", rank->lhs},         {"rhs", rank->rhs},
                      {"holds", rank->holds},         {"unconditional", rank->unconditional}, {"detail", rank->detail}};
  }
  return j;
}

AuditReport privacy_audit(const Transcript& transcript, const std::vector<std::string>& coalition) {
  const Setup s = read_setup(transcript);
  if (coalition.empty()) throw ContractViolation("coalition must name at least one role");
  const std::set<std::string> members(coalition.begin(), coalition.end());
  for (const auto& r : members) {
    if (!s.roles.count(r)) throw ContractViolation("role '" + r + "' did not take part in this run");
  }

  std::vector<Message> results;
  sets::ConstrainedZonotoped initial;
  bool have_initial = false;
  Findings tags, ciphertexts, plaintext, restricted, keys, minimal;
  int messages = 0;
  for (const auto& e : transcript.entries()) {
    if (has_key_field(e.body)) keys.add("key material in " + e.view + " view at k=" + std::to_string(e.k));
    if (e.type == EntryType::kInput && e.view == kQuery && e.body.contains("initial_set")) {
      initial = sets::conszono_from_json(e.body.at("initial_set"));
      have_initial = true;
    }
    if (e.type != EntryType::kReceived) continue;
    const Message m = Message::from_json(e.body);
    ++messages;
    if (m.receiver == kQuery && m.kind == MessageKind::kResult) results.push_back(m);

    for (const auto& [field, value] : m.payload.items()) {
      if (!m.tags.count(field)) tags.add("untagged field " + field + " in " + where(m));
    }
    for (const auto& [field, tag] : m.tags) {
      if (!m.payload.contains(field)) {
        tags.add("tag for absent field " + field + " in " + where(m));
        continue;
      }
      if (tag == Tag::kCiphertext && !all_ciphertexts(m.payload.at(field))) {
        ciphertexts.add("field " + field + " tagged ciphertext-private holds plaintext in " + where(m));
      }
    }

    const bool in_coalition_view = members.count(m.receiver) > 0;
    if (!in_coalition_view) continue;
    for (const auto& [field, tag] : m.tags) {
      if (tag == Tag::kRestricted && m.receiver != kAggregator) {
        restricted.add("restricted field " + field + " reached " + m.receiver + " in " + where(m));
      }
      if (tag != Tag::kCiphertext && kPrivateFields.count(field) &&
          (field == "y" || !entitled_to_estimate(m.receiver))) {
        plaintext.add("plaintext " + field + " in " + m.receiver + " view, " + where(m));
      }
    }
    if (m.receiver == kAggregator) {
      if (m.kind == MessageKind::kResult) minimal.add("aggregator received a " + where(m));
      for (const auto& [field, value] : m.payload.items()) {
        if (!kAggregatorFields.count(field)) minimal.add("unexpected field " + field + " in " + where(m));
      }
    }
  }

  for (int k = 1; k <= s.steps; ++k) {
    const bool found = std::any_of(results.begin(), results.end(), [k](const Message& m) { return m.k == k; });
    if (!found) throw ContractViolation("incomplete transcript: no result for step " + std::to_string(k));
  }

  AuditReport report;
  report.coalition = coalition;
  report.checks.push_back(tags.finish("tags", "every payload field of " + std::to_string(messages) +
                                                  " messages carries exactly one tag"));
  report.checks.push_back(ciphertexts.finish("ciphertexts", "every ciphertext-private field holds ciphertexts only"));
  report.checks.push_back(plaintext.finish("plaintext", "no private field in plaintext in the coalition's views"));
  report.checks.push_back(restricted.finish("restricted", "restricted fields stay with the aggregator"));
  report.checks.push_back(keys.finish("key-confinement", "no secret key material in any view"));
  if (members.count(std::string(kAggregator))) {
    report.checks.push_back(minimal.finish("aggregator-view", "encrypted inputs and public shapes only"));
  }

  if (!members.count(std::string(kQuery))) return report;
  if (members.count(std::string(kAggregator))) {
    report.checks.push_back({"coalition-model", false,
                             "query and aggregator together hold the secret key and every ciphertext"});
  }

  RankCondition rank;
  const bool p1 = !uses_groups(s.variant);
  if (constrained(s.variant)) {
    rank.statement = "unconditional";
    rank.unconditional = true;
    rank.detail = p1 ? "constrained-zonotope update with a random gain kept by the aggregator; note: the query "
                       "decrypts offset rows y_j - H_j c with its own prior center c, so these rows expose y_j"
                     : "exact constrained-zonotope fusion";
  } else if (p1 && s.swap) {
    rank.statement = "unconditional";
    rank.unconditional = true;
    rank.detail = "strip widths withheld from the query and generator columns shuffled";
  } else if (p1) {
    std::set<int> honest;
    for (std::size_t i = 0; i < s.sensors.size(); ++i) {
      if (!members.count(sensor_name(int(i)))) honest.insert(int(i));
    }
    long rows = 0;
    for (int i : honest) rows += long(s.sensors[std::size_t(i)].H.rows());
    rank.statement = "m_r*p > n";
    rank.lhs = rows;
    rank.rhs = long(s.n);
    rank.holds = honest.empty() || rows > rank.rhs;
    rank.detail = "m_r = " + std::to_string(honest.size()) + ", m_r*p = " + std::to_string(rows) + (rank.holds ? " > " : " <= ") +
                  "n = " + std::to_string(s.n);
    if (honest.empty()) rank.detail += " (no honest sensor left to protect)";
    if (have_initial && s.has_R && !s.replay) {
      std::sort(results.begin(), results.end(), [](const Message& a, const Message& b) { return a.k < b.k; });
      rank.detail += gain_rank_evidence(s, results, initial, honest);
    }
  } else {
    long honest = 0;
    for (std::size_t j = 0; j < s.groups; ++j) honest += !members.count(group_name(int(j)));
    rank.statement = "d_r > 1";
    rank.lhs = honest;
    rank.rhs = 1;
    rank.holds = honest == 0 || honest > 1;
    rank.detail = "d_r = " + std::to_string(honest) + (rank.holds ? "" : ", the fused center reveals the honest group's center");
    if (honest == 0) rank.detail += " (no honest group left to protect)";
  }
  report.rank = rank;
  return report;
}

}  // namespace ppse::protocol
