#include "ppse/protocol/transcript.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <utility>

#include "ppse/error.hpp"

namespace ppse::protocol {

using nlohmann::json;

std::string_view to_string(EntryType type) {
  switch (type) {
    case EntryType::kSetup:
      return "setup";
    case EntryType::kReceived:
      return "received";
    case EntryType::kInput:
      return "input";
    case EntryType::kCoins:
      return "coins";
  }
  throw ContractViolation("unknown entry type");
}

namespace {

EntryType entry_type_from_string(const std::string& text) {
  for (EntryType t : {EntryType::kSetup, EntryType::kReceived, EntryType::kInput, EntryType::kCoins}) {
    if (to_string(t) == text) return t;
  }
  throw ParseError("unknown transcript entry '" + text + "'");
}

}  // namespace

json TranscriptEntry::to_json() const {
  json j{{"view", view}, {"entry", std::string(to_string(type))}, {"k", k}};
  j[type == EntryType::kReceived ? "message" : "data"] = body;
  return j;
}

TranscriptEntry TranscriptEntry::from_json(const json& j) {
  try {
    TranscriptEntry e;
    e.view = j.at("view").get<std::string>();
    e.type = entry_type_from_string(j.at("entry").get<std::string>());
    e.k = j.at("k").get<int>();
    e.body = j.at(e.type == EntryType::kReceived ? "message" : "data");
    if (e.type == EntryType::kReceived) Message::from_json(e.body);
    return e;
  } catch (const json::exception& ex) {
    throw ParseError(std::string("malformed transcript entry: ") + ex.what());
  }
}

void Transcript::setup(json data) { entries_.push_back({"*", EntryType::kSetup, 0, std::move(data)}); }

void Transcript::received(const Message& m) {
  entries_.push_back({m.receiver, EntryType::kReceived, m.k, m.to_json()});
}

void Transcript::input(const std::string& view, int k, json data) {
  entries_.push_back({view, EntryType::kInput, k, std::move(data)});
}

void Transcript::coins(const std::string& view, int k, json data) {
  entries_.push_back({view, EntryType::kCoins, k, std::move(data)});
}

std::vector<TranscriptEntry> Transcript::view_of(const std::string& role) const {
  std::vector<TranscriptEntry> out;
  for (const auto& e : entries_) {
    if (e.view == role || e.type == EntryType::kSetup) out.push_back(e);
  }
  return out;
}

const json& Transcript::setup_data() const {
  for (const auto& e : entries_) {
    if (e.type == EntryType::kSetup) return e.body;
  }
  throw ContractViolation("incomplete transcript: no setup entry");
}

void Transcript::write_ndjson(std::ostream& out) const {
  for (const auto& e : entries_) out << e.to_json().dump() << '\n';
}

void Transcript::write_ndjson(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  write_ndjson(out);
  if (!out) throw Error("failed writing " + path.string());
}

Transcript Transcript::read_ndjson(std::istream& in) {
  Transcript t;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      t.entries_.push_back(TranscriptEntry::from_json(json::parse(line)));
    } catch (const json::exception& e) {
      throw ParseError("transcript line " + std::to_string(line_no) + ": " + e.what());
    } catch (const ParseError& e) {
      throw ParseError("transcript line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return t;
}

Transcript Transcript::read_ndjson(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open transcript " + path.string());
  return read_ndjson(in);
}

}  // namespace ppse::protocol
