#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ppse/phe/paillier.hpp"

namespace ppse::phe {

/// Ciphertext byte layout: 4-byte big-endian length L, L bytes of the
/// big-endian magnitude, 2-byte big-endian scale exponent.
std::vector<std::uint8_t> serialize(const EncScalar& c);
EncScalar deserialize(std::span<const std::uint8_t> bytes);

std::string base64_encode(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> base64_decode(std::string_view text);

std::string to_base64(const EncScalar& c);
EncScalar from_base64(std::string_view text);

/// Key files are `name = decimal` lines. Private key files carry n, p, q;
/// public key files carry n only. '#' starts a comment.
void write_private_key(const std::filesystem::path& path, const PrivateKey& sk);
void write_public_key(const std::filesystem::path& path, const PublicKey& pk);
PrivateKey read_private_key(const std::filesystem::path& path);
PublicKey read_public_key(const std::filesystem::path& path);

}  // namespace ppse::phe
