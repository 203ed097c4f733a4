#include "ppse/sim/export.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

#include "ppse/error.hpp"

namespace ppse::sim {

namespace {

std::string num(double x) {
  if (std::isnan(x)) return "nan";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

std::ofstream open_out(const std::filesystem::path& file) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw Error("cannot open " + file.string() + " for writing");
  return out;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double parse_double(const std::string& text, const std::string& where) {
  double value = 0.0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || end != text.data() + text.size()) throw ParseError(where + ": bad number '" + text + "'");
  return value;
}

int parse_int(const std::string& text, const std::string& where) {
  int value = 0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || end != text.data() + text.size()) throw ParseError(where + ": bad integer '" + text + "'");
  return value;
}

// Calls row(cells, where) for every data line after checking the header.
template <typename Row>
void read_csv(const std::filesystem::path& file, const std::string& header, Row&& row) {
  std::ifstream in(file);
  if (!in) throw ParseError("cannot open " + file.string());
  std::string line;
  if (!std::getline(in, line) || line != header) {
    throw ParseError(file.string() + ": expected header '" + header + "'");
  }
  const std::size_t width = split(header).size();
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::string where = file.string() + ":" + std::to_string(line_no);
    const auto cells = split(line);
    if (cells.size() != width) throw ParseError(where + ": expected " + std::to_string(width) + " columns");
    row(cells, where);
  }
}

}  // namespace

void write_bounds_csv(const std::vector<TraceRecord>& trace, std::ostream& out) {
  out << "k,dim,lower,true,upper\n";
  for (const auto& r : trace) {
    for (Index d = 0; d < r.hull.lower.size(); ++d) {
      out << r.k << ',' << d << ',' << num(r.hull.lower(d)) << ',' << (r.truth ? num((*r.truth)(d)) : "") << ','
          << num(r.hull.upper(d)) << '\n';
    }
  }
}

void write_error_csv(const std::vector<TraceRecord>& trace, std::ostream& out) {
  out << "k,error\n";
  for (const auto& r : trace) out << r.k << ',' << num(r.error) << '\n';
}

void write_fp_error_csv(const std::vector<TraceRecord>& trace, std::ostream& out) {
  out << "k,fp_error\n";
  for (const auto& r : trace) out << r.k << ',' << num(r.fp_error) << '\n';
}

void write_containment_csv(const std::vector<TraceRecord>& trace, std::ostream& out) {
  out << "k,contained\n";
  for (const auto& r : trace) out << r.k << ',' << (r.contained ? (*r.contained ? "1" : "0") : "") << '\n';
}

TimingRow timing_of(protocol::Variant variant, const std::vector<TraceRecord>& trace) {
  TimingRow row{variant};
  int count = 0;
  for (const auto& r : trace) {
    if (r.k < 1) continue;
    row.sensor_ms += r.time.sensor_ms;
    row.aggregator_ms += r.time.aggregator_ms;
    row.query_ms += r.time.query_ms;
    ++count;
  }
  if (count > 0) {
    row.sensor_ms /= count;
    row.aggregator_ms /= count;
    row.query_ms /= count;
  }
  return row;
}

void write_timing_csv(const std::vector<TimingRow>& rows, std::ostream& out) {
  out << "variant,sensor_ms,aggregator_ms,query_ms\n";
  for (const auto& r : rows) {
    out << protocol::to_string(r.variant) << ',' << num(r.sensor_ms) << ',' << num(r.aggregator_ms) << ','
        << num(r.query_ms) << '\n';
  }
}

void write_timing_csv(const std::vector<TimingRow>& rows, const std::filesystem::path& file) {
  if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path());
  auto out = open_out(file);
  write_timing_csv(rows, out);
}

void export_trace(const std::vector<TraceRecord>& trace, const std::filesystem::path& dir) {
  if (trace.empty()) throw ContractViolation("nothing to export: the trace is empty");
  std::filesystem::create_directories(dir);
  auto bounds = open_out(dir / "bounds.csv");
  write_bounds_csv(trace, bounds);
  auto error = open_out(dir / "error.csv");
  write_error_csv(trace, error);
  auto fp = open_out(dir / "fp_error.csv");
  write_fp_error_csv(trace, fp);
  auto contained = open_out(dir / "containment.csv");
  write_containment_csv(trace, contained);
  if (!bounds || !error || !fp || !contained) throw Error("failed writing trace files in " + dir.string());
}

TraceFiles load_trace(const std::filesystem::path& dir) {
  TraceFiles t;
  read_csv(dir / "bounds.csv", "k,dim,lower,true,upper", [&](const auto& c, const std::string& where) {
    const int k = parse_int(c[0], where);
    const int d = parse_int(c[1], where);
    auto& dims = t.bounds[k];
    if (d != int(dims.size())) throw ParseError(where + ": dimensions out of order");
    TraceFiles::Bound b;
    b.lower = parse_double(c[2], where);
    if (!c[3].empty()) b.truth = parse_double(c[3], where);
    b.upper = parse_double(c[4], where);
    dims.push_back(b);
  });
  read_csv(dir / "error.csv", "k,error",
           [&](const auto& c, const std::string& where) { t.error[parse_int(c[0], where)] = parse_double(c[1], where); });
  read_csv(dir / "fp_error.csv", "k,fp_error", [&](const auto& c, const std::string& where) {
    t.fp_error[parse_int(c[0], where)] = parse_double(c[1], where);
  });
  read_csv(dir / "containment.csv", "k,contained", [&](const auto& c, const std::string& where) {
    if (c[1].empty()) return;
    if (c[1] != "0" && c[1] != "1") throw ParseError(where + ": contained must be 0 or 1");
    t.contained[parse_int(c[0], where)] = c[1] == "1";
  });
  return t;
}

TraceSummary summarize(const TraceFiles& t) {
  TraceSummary s;
  double error_sum = 0.0;
  int error_count = 0;
  for (const auto& [k, e] : t.error) {
    if (k < 1) continue;
    ++s.steps;
    if (!std::isnan(e)) {
      error_sum += e;
      ++error_count;
    }
  }
  for (const auto& [k, c] : t.contained) {
    if (k < 1) continue;
    ++s.checked;
    s.contained += c;
  }
  for (const auto& [k, e] : t.fp_error) s.max_fp_error = std::max(s.max_fp_error, e);
  s.mean_error = error_count > 0 ? error_sum / error_count : std::nan("");
  return s;
}

Tightness compare_widths(const TraceFiles& a, const TraceFiles& b, double tol) {
  Tightness out;
  out.worst_excess = -std::numeric_limits<double>::infinity();
  for (const auto& [k, dims] : a.bounds) {
    const auto it = b.bounds.find(k);
    if (it == b.bounds.end()) continue;
    const std::size_t n = std::min(dims.size(), it->second.size());
    for (std::size_t d = 0; d < n; ++d) {
      const double excess = (dims[d].upper - dims[d].lower) - (it->second[d].upper - it->second[d].lower);
      ++out.compared;
      if (excess > out.worst_excess) {
        out.worst_excess = excess;
        out.worst_k = k;
        out.worst_dim = int(d);
      }
      if (excess > tol) out.holds = false;
    }
  }
  if (out.compared == 0) out.worst_excess = 0.0;
  return out;
}

}  // namespace ppse::sim
