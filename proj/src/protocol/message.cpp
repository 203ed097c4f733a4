#include "ppse/protocol/message.hpp"

#include <array>
#include <charconv>
#include <utility>

#include "ppse/error.hpp"

namespace ppse::protocol {

using nlohmann::json;

namespace {

constexpr std::array<std::pair<MessageKind, std::string_view>, 5> kKinds{{
    {MessageKind::kInitSet, "InitSet"},
    {MessageKind::kEncStrip, "EncStrip"},
    {MessageKind::kEncSet, "EncSet"},
    {MessageKind::kResult, "Result"},
    {MessageKind::kRefresh, "Refresh"},
}};

constexpr std::array<std::pair<Tag, std::string_view>, 3> kTags{{
    {Tag::kPublic, "plaintext-public"},
    {Tag::kCiphertext, "ciphertext-private"},
    {Tag::kRestricted, "restricted"},
}};

int index_after(std::string_view role, std::string_view prefix) {
  if (role.substr(0, prefix.size()) != prefix) return -1;
  const std::string_view digits = role.substr(prefix.size());
  int value = -1;
  const auto [end, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
  if (ec != std::errc() || end != digits.data() + digits.size() || digits.empty() || value < 0) return -1;
  return value;
}

}  // namespace

std::string_view to_string(MessageKind kind) {
  for (const auto& [k, name] : kKinds) {
    if (k == kind) return name;
  }
  throw ContractViolation("unknown message kind");
}

MessageKind kind_from_string(std::string_view text) {
  for (const auto& [k, name] : kKinds) {
    if (name == text) return k;
  }
  throw ParseError("unknown message kind '" + std::string(text) + "'");
}

std::string_view to_string(Tag tag) {
  for (const auto& [t, name] : kTags) {
    if (t == tag) return name;
  }
  throw ContractViolation("unknown privacy tag");
}

Tag tag_from_string(std::string_view text) {
  for (const auto& [t, name] : kTags) {
    if (name == text) return t;
  }
  throw ParseError("unknown privacy tag '" + std::string(text) + "'");
}

std::string sensor_name(int i) { return "sensor:" + std::to_string(i); }
std::string group_name(int j) { return "group:" + std::to_string(j); }
int sensor_index(std::string_view role) { return index_after(role, "sensor:"); }
int group_index(std::string_view role) { return index_after(role, "group:"); }

Message& Message::with(const std::string& field, json value, Tag tag) {
  payload[field] = std::move(value);
  tags[field] = tag;
  return *this;
}

json Message::to_json() const {
  json t = json::object();
  for (const auto& [field, tag] : tags) t[field] = std::string(to_string(tag));
  return json{{"kind", std::string(to_string(kind))},
              {"sender", sender},
              {"receiver", receiver},
              {"k", k},
              {"payload", payload},
              {"tags", std::move(t)}};
}

Message Message::from_json(const json& j) {
  try {
    Message m;
    m.kind = kind_from_string(j.at("kind").get<std::string>());
    m.sender = j.at("sender").get<std::string>();
    m.receiver = j.at("receiver").get<std::string>();
    m.k = j.at("k").get<int>();
    m.payload = j.at("payload");
    if (!m.payload.is_object()) throw ParseError("message payload is not an object");
    for (const auto& [field, tag] : j.at("tags").items()) m.tags[field] = tag_from_string(tag.get<std::string>());
    return m;
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed message: ") + e.what());
  }
}

}  // namespace ppse::protocol
