#pragma once

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

#include "ppse/protocol/transcript.hpp"

namespace ppse::protocol {

struct AuditCheck {
  std::string name;
  bool passed = true;
  std::string detail;
};

/// Evaluation of the coalition condition under which the estimation
/// protocol keeps the remaining parties' data private.
struct RankCondition {
  std::string statement;  // "m_r*p > n", "d_r > 1" or "unconditional"
  long lhs = 0;
  long rhs = 0;
  bool holds = true;
  bool unconditional = false;
  std::string detail;
};

struct AuditReport {
  std::vector<std::string> coalition;
  std::vector<AuditCheck> checks;
  std::optional<RankCondition> rank;

  bool passed() const;
  /// One line per check, then the rank line and a verdict line.
  std::string to_text() const;
  nlohmann::json to_json() const;
};

/// Mechanical privacy audit of a finished run for the given coalition.
///
/// Tag checks run over every message; view checks over the coalition
/// members' views. When the coalition contains the query the report also
/// evaluates the rank condition of the variant. Throws ContractViolation for
/// an incomplete transcript or a role the run did not have.
AuditReport privacy_audit(const Transcript& transcript, const std::vector<std::string>& coalition);

}  // namespace ppse::protocol
