#pragma once

#include <filesystem>
#include <map>
#include <vector>

#include "ppse/sets/types.hpp"
#include "ppse/sim/run.hpp"
#include "ppse/sim/scenario.hpp"

namespace ppse::sim {

/// Pre-linearized measurements from an external log, one row per
/// (step, sensor) with header k,i,y,h0,…,h{n-1},R.
struct ReplayLog {
  std::map<int, std::map<int, sets::Stripd>> strips;  // k → sensor → strip

  int last_step() const { return strips.empty() ? 0 : strips.rbegin()->first; }
};

/// Throws ParseError naming the line for malformed rows and duplicates.
ReplayLog read_replay_csv(const std::filesystem::path& file, Index n);

/// Every sensor of the scenario must report at every step 1..last_step();
/// returns one message per missing entry.
std::vector<std::string> check_replay(const ReplayLog& log, const Scenario& scenario);

/// Runs the scenario's protocol on the logged strips.
RunOutput replay(const Scenario& scenario, const phe::KeyPair& keys, const ReplayLog& log);

}  // namespace ppse::sim
