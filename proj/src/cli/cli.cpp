#include "ppse/cli/cli.hpp"

#include <CLI11.hpp>
#include <spdlog/cfg/helpers.h>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>

#include "ppse/error.hpp"
#include "ppse/phe/wire.hpp"
#include "ppse/protocol/audit.hpp"
#include "ppse/sim/export.hpp"
#include "ppse/sim/replay.hpp"
#include "ppse/sim/run.hpp"

namespace ppse::cli {

namespace fs = std::filesystem;

namespace {

// Raised for bad inputs discovered after argv parsing.
struct ValidationFailure {
  std::vector<std::string> errors;
};

struct RunFlags {
  std::string scenario;
  std::string out_dir;
  std::string variant;
  std::string keys;
  std::string csv;
  bool swap = false;
  bool no_refresh = false;
  std::optional<std::uint64_t> seed;
  std::optional<int> steps;
  std::optional<int> bits;
};

void init_logging() {
  static bool done = false;
  if (done) return;
  done = true;
  auto logger = spdlog::stderr_logger_st("ppse");
  logger->set_pattern("[%l] %v");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::warn);
  // PPSE_LOG takes spdlog level syntax, e.g. "info" or "debug".
  if (const char* levels = std::getenv("PPSE_LOG")) spdlog::cfg::helpers::load_levels(levels);
}

sim::Scenario load_scenario(const RunFlags& f) {
  sim::ScenarioParse parsed = validate_scenario(f.scenario);
  if (!parsed.ok()) throw ValidationFailure{parsed.errors};
  sim::Scenario s = *parsed.scenario;
  if (f.seed) s.seed = *f.seed;
  if (f.steps) {
    if (*f.steps < 0) throw ValidationFailure{{"--steps: must be nonnegative"}};
    s.steps = *f.steps;
  }
  if (f.bits) {
    if (*f.bits < 512) throw ValidationFailure{{"--bits: must be at least 512"}};
    s.key_bits = *f.bits;
  }
  if (f.swap) s.protocol.swap = true;
  if (f.no_refresh) s.protocol.refresh = false;
  return s;
}

std::vector<protocol::Variant> variants_of(const RunFlags& f, const sim::Scenario& s) {
  if (f.variant.empty()) return {s.protocol.variant};
  if (f.variant == "all") {
    return {protocol::Variant::kP1Zono, protocol::Variant::kP1Cons, protocol::Variant::kP2Zono,
            protocol::Variant::kP2Cons};
  }
  try {
    return {protocol::variant_from_string(f.variant)};
  } catch (const ParseError& e) {
    throw ValidationFailure{{std::string("--variant: ") + e.what()}};
  }
}

phe::KeyPair obtain_keys(const RunFlags& f, const sim::Scenario& s, const fs::path& out_dir) {
  if (!f.keys.empty()) {
    try {
      phe::KeyPair keys;
      keys.priv = phe::read_private_key(fs::path(f.keys) / "private.key");
      keys.pub = keys.priv.pub;
      return keys;
    } catch (const Error& e) {
      throw ValidationFailure{{std::string("--keys: ") + e.what()}};
    }
  }
  spdlog::info("generating a {}-bit key", s.key_bits);
  phe::Rng rng(sim::derive_seed(s.seed, "keygen"));
  phe::KeyPair keys = phe::keygen(std::size_t(s.key_bits), rng);
  fs::create_directories(out_dir / "keys");
  phe::write_public_key(out_dir / "keys" / "public.key", keys.pub);
  phe::write_private_key(out_dir / "keys" / "private.key", keys.priv);
  return keys;
}

std::string fixed(double x, int digits = 3) {
  std::ostringstream os;
  os << std::setprecision(digits) << x;
  return os.str();
}

void report(std::ostream& out, const std::string& label, const std::vector<sim::TraceRecord>& trace, double fp_tol) {
  int checked = 0;
  int contained = 0;
  double max_fp = 0.0;
  for (const auto& r : trace) {
    if (r.k < 1) continue;
    if (r.contained) {
      ++checked;
      contained += *r.contained;
    }
    max_fp = std::max(max_fp, r.fp_error);
  }
  out << label << ": " << (trace.empty() ? 0 : trace.size() - 1) << " steps";
  if (checked > 0) out << ", containment " << contained << "/" << checked;
  out << ", max fp-error " << fixed(max_fp) << (max_fp <= fp_tol ? " (within " : " (ABOVE ") << fixed(fp_tol)
      << ")\n";
}

int cmd_run(const RunFlags& f, bool replay, std::ostream& out) {
  const sim::Scenario base = load_scenario(f);
  const std::vector<protocol::Variant> variants = variants_of(f, base);
  std::vector<std::string> problems;
  for (protocol::Variant v : variants) {
    sim::Scenario s = base;
    s.protocol.variant = v;
    for (const auto& e : sim::check_variant(s)) problems.push_back(std::string(protocol::to_string(v)) + ": " + e);
  }
  std::optional<sim::ReplayLog> log;
  if (replay) {
    try {
      log = sim::read_replay_csv(f.csv, base.dim());
    } catch (const ParseError& e) {
      throw ValidationFailure{{e.what()}};
    }
    for (const auto& e : sim::check_replay(*log, base)) problems.push_back(f.csv + ": " + e);
  }
  if (!problems.empty()) throw ValidationFailure{problems};

  const fs::path out_dir(f.out_dir);
  const phe::KeyPair keys = obtain_keys(f, base, out_dir);
  std::vector<sim::TimingRow> timing;
  for (protocol::Variant v : variants) {
    sim::Scenario s = base;
    s.protocol.variant = v;
    const std::string name(protocol::to_string(v));
    spdlog::info("running {} for {} steps", name, replay ? log->last_step() : s.steps);
    const sim::RunOutput result = replay ? sim::replay(s, keys, *log) : sim::run(s, keys);
    sim::export_trace(result.trace, out_dir / "traces" / name);
    fs::create_directories(out_dir / "transcripts");
    result.transcript.write_ndjson(out_dir / "transcripts" / (name + ".ndjson"));
    timing.push_back(sim::timing_of(v, result.trace));
    report(out, name, result.trace, s.fp_tolerance);
  }
  sim::write_timing_csv(timing, out_dir / "traces" / "timing.csv");
  out << "wrote " << (out_dir / "traces").string() << " and " << (out_dir / "transcripts").string() << "\n";
  return kExitOk;
}

int cmd_keygen(int bits, const std::string& dir, std::uint64_t seed, std::ostream& out) {
  if (bits < 512) throw ValidationFailure{{"--bits: must be at least 512"}};
  phe::Rng rng(seed);
  const phe::KeyPair keys = phe::keygen(std::size_t(bits), rng);
  fs::create_directories(dir);
  phe::write_public_key(fs::path(dir) / "public.key", keys.pub);
  phe::write_private_key(fs::path(dir) / "private.key", keys.priv);
  out << "wrote a " << keys.pub.bits() << "-bit key pair to " << dir << "\n";
  return kExitOk;
}

int cmd_audit(const std::string& file, const std::vector<std::string>& coalition, bool as_json, std::ostream& out) {
  protocol::Transcript transcript;
  try {
    transcript = protocol::Transcript::read_ndjson(fs::path(file));
  } catch (const ParseError& e) {
    throw ValidationFailure{{e.what()}};
  }
  protocol::AuditReport report;
  try {
    report = protocol::privacy_audit(transcript, coalition);
  } catch (const ContractViolation& e) {
    throw ValidationFailure{{e.what()}};
  }
  if (as_json) {
    out << report.to_json().dump(2) << "\n";
  } else {
    out << report.to_text();
  }
  return kExitOk;
}

int cmd_analyze(const std::vector<std::string>& dirs, std::ostream& out) {
  std::vector<sim::TraceFiles> traces;
  for (const auto& d : dirs) {
    try {
      traces.push_back(sim::load_trace(d));
    } catch (const ParseError& e) {
      throw ValidationFailure{{e.what()}};
    }
  }
  for (std::size_t i = 0; i < traces.size(); ++i) {
    const sim::TraceSummary s = sim::summarize(traces[i]);
    out << dirs[i] << ":\n";
    if (s.checked > 0) {
      out << "  containment rate " << s.contained << "/" << s.checked << " (" << fixed(100.0 * s.contained / s.checked, 4)
          << "%)\n";
    } else {
      out << "  containment rate n/a (no true state)\n";
    }
    out << "  mean error " << (std::isnan(s.mean_error) ? std::string("n/a") : fixed(s.mean_error, 6)) << "\n";
    out << "  max fp-error " << fixed(s.max_fp_error) << "\n";
  }
  if (traces.size() == 2) {
    const sim::Tightness t = sim::compare_widths(traces[0], traces[1]);
    out << "tightness (first no wider than second + 1e-9): " << (t.holds ? "satisfied" : "VIOLATED") << " over "
        << t.compared << " step/dimension pairs";
    if (t.compared > 0) {
      out << ", largest excess " << fixed(t.worst_excess) << " at k=" << t.worst_k << " dim " << t.worst_dim;
    }
    out << "\n";
  }
  return kExitOk;
}

}  // namespace

sim::ScenarioParse validate_scenario(const fs::path& file) { return sim::read_scenario(file); }

int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  init_logging();
  CLI::App app{"Privacy-preserving set-based state estimation over Paillier-encrypted data", "ppse"};
  app.require_subcommand(1);

  int bits = 2048;
  std::string key_dir;
  std::uint64_t key_seed = 1;
  auto* keygen = app.add_subcommand("keygen", "Generate a Paillier key pair");
  keygen->add_option("--bits", bits, "Modulus size in bits")->capture_default_str();
  keygen->add_option("--out", key_dir, "Output directory")->required();
  keygen->add_option("--seed", key_seed, "Seed of the prime search")->capture_default_str();

  RunFlags rf;
  auto add_run_flags = [&](CLI::App* cmd) {
    cmd->add_option("--scenario", rf.scenario, "Scenario JSON file")->required();
    cmd->add_option("--out-dir", rf.out_dir, "Output directory")->required();
    cmd->add_option("--variant", rf.variant, "p1-zono, p1-cons, p2-zono, p2-cons or all");
    cmd->add_option("--keys", rf.keys, "Directory holding private.key (generated when absent)");
    cmd->add_flag("--swap", rf.swap, "Protocol 1 swap mitigation");
    cmd->add_flag("--no-refresh", rf.no_refresh, "Protocol 1 without ciphertext refresh");
    cmd->add_option("--seed", rf.seed, "Override the scenario seed");
    cmd->add_option("--steps", rf.steps, "Override the horizon");
    cmd->add_option("--bits", rf.bits, "Override the key size");
  };
  auto* run = app.add_subcommand("run", "Run a scenario");
  add_run_flags(run);
  auto* replay = app.add_subcommand("replay", "Run a scenario on logged measurements");
  replay->add_option("--csv", rf.csv, "Replay log with columns k,i,y,h0..,R")->required();
  add_run_flags(replay);

  std::string transcript;
  std::vector<std::string> coalition;
  bool as_json = false;
  auto* audit = app.add_subcommand("audit", "Privacy audit of a transcript");
  audit->add_option("--transcript", transcript, "Transcript file (NDJSON)")->required();
  audit->add_option("--coalition", coalition, "Colluding roles: query, aggregator, sensor:i, group:j")->required();
  audit->add_flag("--json", as_json, "Print the report as JSON");

  std::vector<std::string> trace_dirs;
  auto* analyze = app.add_subcommand("analyze", "Summarize one trace or compare two");
  analyze->add_option("--trace", trace_dirs, "Trace directory (give two to compare widths)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return kExitValidation;
  }

  try {
    if (*keygen) return cmd_keygen(bits, key_dir, key_seed, out);
    if (*run) return cmd_run(rf, false, out);
    if (*replay) return cmd_run(rf, true, out);
    if (*audit) return cmd_audit(transcript, coalition, as_json, out);
    if (*analyze) {
      if (trace_dirs.size() > 2) throw ValidationFailure{{"--trace: give one or two directories"}};
      return cmd_analyze(trace_dirs, out);
    }
  } catch (const ValidationFailure& v) {
    for (const auto& e : v.errors) err << "error: " << e << "\n";
    return kExitValidation;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitValidation;
}

}  // namespace ppse::cli
