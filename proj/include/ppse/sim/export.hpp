#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ppse/protocol/roles.hpp"
#include "ppse/sim/run.hpp"

namespace ppse::sim {

// Fixed headers:
//   bounds.csv       k,dim,lower,true,upper   (true empty in replay mode)
//   error.csv        k,error
//   fp_error.csv     k,fp_error
//   containment.csv  k,contained
//   timing.csv       variant,sensor_ms,aggregator_ms,query_ms
void write_bounds_csv(const std::vector<TraceRecord>& trace, std::ostream& out);
void write_error_csv(const std::vector<TraceRecord>& trace, std::ostream& out);
void write_fp_error_csv(const std::vector<TraceRecord>& trace, std::ostream& out);
void write_containment_csv(const std::vector<TraceRecord>& trace, std::ostream& out);

/// Mean per-step wall time of each entity over rounds 1..K.
struct TimingRow {
  protocol::Variant variant;
  double sensor_ms = 0.0;
  double aggregator_ms = 0.0;
  double query_ms = 0.0;
};

TimingRow timing_of(protocol::Variant variant, const std::vector<TraceRecord>& trace);
void write_timing_csv(const std::vector<TimingRow>& rows, std::ostream& out);

/// Writes the four per-step CSVs into `dir`, creating it. Throws on an
/// empty trace or an I/O failure.
void export_trace(const std::vector<TraceRecord>& trace, const std::filesystem::path& dir);
void write_timing_csv(const std::vector<TimingRow>& rows, const std::filesystem::path& file);

/// Per-step CSVs read back for analysis.
struct TraceFiles {
  struct Bound {
    double lower = 0.0;
    std::optional<double> truth;
    double upper = 0.0;
  };
  std::map<int, std::vector<Bound>> bounds;  // by k, one entry per dimension
  std::map<int, double> error;
  std::map<int, double> fp_error;
  std::map<int, bool> contained;
};

/// Throws ParseError naming the file and line.
TraceFiles load_trace(const std::filesystem::path& dir);

struct TraceSummary {
  int steps = 0;        // records with k >= 1
  int checked = 0;      // records with a known truth
  int contained = 0;
  double mean_error = 0.0;
  double max_fp_error = 0.0;
};

TraceSummary summarize(const TraceFiles& t);

struct Tightness {
  bool holds = true;
  int compared = 0;
  double worst_excess = 0.0;  // max over k, dim of width(a) - width(b)
  int worst_k = -1;
  int worst_dim = -1;
};

/// Checks width(a) ≤ width(b) + tol for every shared step and dimension.
Tightness compare_widths(const TraceFiles& a, const TraceFiles& b, double tol = 1e-9);

}  // namespace ppse::sim
