#include "ppse/sim/replay.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "ppse/error.hpp"

namespace ppse::sim {

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  return cells;
}

template <typename T>
T parse(const std::string& text, const std::string& where) {
  T value{};
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || end != text.data() + text.size()) throw ParseError(where + ": bad value '" + text + "'");
  return value;
}

}  // namespace

ReplayLog read_replay_csv(const std::filesystem::path& file, Index n) {
  std::ifstream in(file);
  if (!in) throw ParseError("cannot open " + file.string());
  std::string header = "k,i,y";
  for (Index d = 0; d < n; ++d) header += ",h" + std::to_string(d);
  header += ",R";
  std::string line;
  if (!std::getline(in, line) || line != header) {
    throw ParseError(file.string() + ": expected header '" + header + "'");
  }
  ReplayLog log;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::string where = file.string() + ":" + std::to_string(line_no);
    const auto cells = split(line);
    if (Index(cells.size()) != n + 4) throw ParseError(where + ": expected " + std::to_string(n + 4) + " columns");
    const int k = parse<int>(cells[0], where);
    const int i = parse<int>(cells[1], where);
    if (k < 1 || i < 0) throw ParseError(where + ": k must be at least 1 and i nonnegative");
    Eigen::MatrixXd H(1, n);
    for (Index d = 0; d < n; ++d) H(0, d) = parse<double>(cells[std::size_t(3 + d)], where);
    const double y = parse<double>(cells[2], where);
    const double R = parse<double>(cells.back(), where);
    if (!(R > 0.0)) throw ParseError(where + ": R must be positive");
    auto [it, inserted] = log.strips[k].emplace(i, sets::Stripd(H, Eigen::VectorXd::Constant(1, y), Eigen::VectorXd::Constant(1, R)));
    if (!inserted) throw ParseError(where + ": sensor " + std::to_string(i) + " reported twice at k=" + std::to_string(k));
  }
  return log;
}

std::vector<std::string> check_replay(const ReplayLog& log, const Scenario& scenario) {
  std::vector<std::string> errors;
  const int sensors = int(scenario.sensors.size());
  for (int k = 1; k <= log.last_step(); ++k) {
    const auto it = log.strips.find(k);
    for (int i = 0; i < sensors; ++i) {
      if (it == log.strips.end() || !it->second.count(i)) {
        errors.push_back("k=" + std::to_string(k) + ": no row for sensor " + std::to_string(i));
      }
    }
    if (it != log.strips.end()) {
      for (const auto& [i, strip] : it->second) {
        if (i >= sensors) errors.push_back("k=" + std::to_string(k) + ": sensor " + std::to_string(i) + " is not in the scenario");
      }
    }
  }
  return errors;
}

RunOutput replay(const Scenario& scenario, const phe::KeyPair& keys, const ReplayLog& log) {
  if (const auto errors = check_replay(log, scenario); !errors.empty()) throw ContractViolation(errors.front());
  return run_with_feed(scenario, keys, log.last_step(), [&](int k) {
    std::vector<sets::Stripd> strips;
    for (const auto& [i, strip] : log.strips.at(k)) strips.push_back(strip);
    return strips;
  });
}

}  // namespace ppse::sim
