#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "ppse/sim/scenario.hpp"

namespace ppse::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitRuntime = 2;

/// Entry point of the `ppse` tool: keygen, run, replay, audit, analyze.
/// Output goes to `out`, diagnostics to `err`.
int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Reads and fully checks a scenario file; every problem is listed.
sim::ScenarioParse validate_scenario(const std::filesystem::path& file);

}  // namespace ppse::cli
