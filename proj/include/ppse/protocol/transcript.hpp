#pragma once

#include <json.hpp>

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "ppse/protocol/message.hpp"

namespace ppse::protocol {

enum class EntryType { kSetup, kReceived, kInput, kCoins };

std::string_view to_string(EntryType type);

/// One line of a transcript. `view` names the role whose view the entry
/// belongs to; setup entries use "*" (public parameters, in every view).
struct TranscriptEntry {
  std::string view;
  EntryType type = EntryType::kReceived;
  int k = 0;
  nlohmann::json body;  // the message for kReceived, free-form data otherwise

  nlohmann::json to_json() const;
  static TranscriptEntry from_json(const nlohmann::json& j);
};

/// Append-only record of every role's view: received messages, inputs and
/// coin draws, in the order they happened.
class Transcript {
 public:
  void setup(nlohmann::json data);
  void received(const Message& m);
  void input(const std::string& view, int k, nlohmann::json data);
  void coins(const std::string& view, int k, nlohmann::json data);

  const std::vector<TranscriptEntry>& entries() const { return entries_; }
  /// Entries visible to `role`: its own entries plus setup.
  std::vector<TranscriptEntry> view_of(const std::string& role) const;
  /// The setup data; throws ContractViolation when there is none.
  const nlohmann::json& setup_data() const;

  void write_ndjson(std::ostream& out) const;
  void write_ndjson(const std::filesystem::path& path) const;
  /// Throws ParseError with the offending line number.
  static Transcript read_ndjson(std::istream& in);
  static Transcript read_ndjson(const std::filesystem::path& path);

 private:
  std::vector<TranscriptEntry> entries_;
};

}  // namespace ppse::protocol
