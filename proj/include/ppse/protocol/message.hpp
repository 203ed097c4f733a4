#pragma once

#include <json.hpp>

#include <map>
#include <string>
#include <string_view>

namespace ppse::protocol {

enum class MessageKind { kInitSet, kEncStrip, kEncSet, kResult, kRefresh };

/// Privacy marker carried by every payload field.
///
/// kRestricted fields are plaintext but may only reach the aggregator (the
/// strip widths under the swap mitigation).
enum class Tag { kPublic, kCiphertext, kRestricted };

std::string_view to_string(MessageKind kind);
MessageKind kind_from_string(std::string_view text);
std::string_view to_string(Tag tag);
Tag tag_from_string(std::string_view text);

inline constexpr std::string_view kQuery = "query";
inline constexpr std::string_view kAggregator = "aggregator";

std::string sensor_name(int i);
std::string group_name(int j);
/// Index of "sensor:i" / "group:j", or -1 when `role` is not of that family.
int sensor_index(std::string_view role);
int group_index(std::string_view role);

struct Message {
  MessageKind kind = MessageKind::kResult;
  std::string sender;
  std::string receiver;
  int k = 0;
  nlohmann::json payload = nlohmann::json::object();
  std::map<std::string, Tag> tags;

  /// Adds a payload field together with its tag.
  Message& with(const std::string& field, nlohmann::json value, Tag tag);

  /// {kind, sender, receiver, k, payload, tags}
  nlohmann::json to_json() const;
  /// Throws ParseError on a malformed envelope. Tag/field agreement is not
  /// checked here; that is the audit's job.
  static Message from_json(const nlohmann::json& j);
};

}  // namespace ppse::protocol
