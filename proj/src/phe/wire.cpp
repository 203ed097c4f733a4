#include "ppse/phe/wire.hpp"

#include <array>
#include <fstream>
#include <map>
#include <sstream>

#include "ppse/error.hpp"

namespace ppse::phe {

namespace {

constexpr char kAlphabet[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

int decode_char(char ch) {
  if (ch >= 'A' && ch <= 'Z') return ch - 'A';
  if (ch >= 'a' && ch <= 'z') return ch - 'a' + 26;
  if (ch >= '0' && ch <= '9') return ch - '0' + 52;
  if (ch == '+') return 62;
  if (ch == '/') return 63;
  return -1;
}

std::map<std::string, mpz_class> read_fields(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open key file " + path.string());
  std::map<std::string, mpz_class> fields;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ParseError(path.string() + ":" + std::to_string(lineno) + ": expected name = value");
    }
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    mpz_class v;
    if (v.set_str(value, 10) != 0) {
      throw ParseError(path.string() + ":" + std::to_string(lineno) + ": '" + key +
                       "' is not a decimal integer");
    }
    fields[key] = v;
  }
  return fields;
}

const mpz_class& require(const std::map<std::string, mpz_class>& fields, const std::string& key,
                         const std::filesystem::path& path) {
  auto it = fields.find(key);
  if (it == fields.end()) throw ParseError(path.string() + ": missing field '" + key + "'");
  return it->second;
}

}  // namespace

std::vector<std::uint8_t> serialize(const EncScalar& c) {
  if (c.scale_exp < 0 || c.scale_exp > 0xFFFF) throw ContractViolation("scale_exp out of range");
  std::size_t count = 0;
  std::vector<std::uint8_t> magnitude((mpz_sizeinbase(c.ct.get_mpz_t(), 2) + 7) / 8);
  mpz_export(magnitude.data(), &count, 1, 1, 1, 0, c.ct.get_mpz_t());
  magnitude.resize(count);

  std::vector<std::uint8_t> out;
  out.reserve(4 + count + 2);
  const auto len = static_cast<std::uint32_t>(count);
  for (int shift = 24; shift >= 0; shift -= 8) out.push_back(static_cast<std::uint8_t>(len >> shift));
  out.insert(out.end(), magnitude.begin(), magnitude.end());
  out.push_back(static_cast<std::uint8_t>(c.scale_exp >> 8));
  out.push_back(static_cast<std::uint8_t>(c.scale_exp & 0xFF));
  return out;
}

EncScalar deserialize(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 6) throw ParseError("ciphertext record too short");
  std::uint32_t len = 0;
  for (int i = 0; i < 4; ++i) len = (len << 8) | bytes[i];
  if (bytes.size() != 4 + static_cast<std::size_t>(len) + 2) {
    throw ParseError("ciphertext length prefix does not match record size");
  }
  EncScalar c;
  if (len > 0) mpz_import(c.ct.get_mpz_t(), len, 1, 1, 1, 0, bytes.data() + 4);
  c.scale_exp = (bytes[4 + len] << 8) | bytes[4 + len + 1];
  return c;
}

std::string base64_encode(std::span<const std::uint8_t> bytes) {
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 2 < bytes.size(); i += 3) {
    const std::uint32_t v = (bytes[i] << 16) | (bytes[i + 1] << 8) | bytes[i + 2];
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += kAlphabet[(v >> 6) & 63];
    out += kAlphabet[v & 63];
  }
  if (const std::size_t rest = bytes.size() - i; rest > 0) {
    std::uint32_t v = bytes[i] << 16;
    if (rest == 2) v |= bytes[i + 1] << 8;
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += rest == 2 ? kAlphabet[(v >> 6) & 63] : '=';
    out += '=';
  }
  return out;
}

std::vector<std::uint8_t> base64_decode(std::string_view text) {
  if (text.size() % 4 != 0) throw ParseError("base64 length must be a multiple of 4");
  std::vector<std::uint8_t> out;
  out.reserve(text.size() / 4 * 3);
  for (std::size_t i = 0; i < text.size(); i += 4) {
    std::array<int, 4> q{};
    int pad = 0;
    for (int j = 0; j < 4; ++j) {
      const char ch = text[i + j];
      if (ch == '=' && i + 4 == text.size() && j >= 2) {
        q[j] = 0;
        ++pad;
        continue;
      }
      if (pad > 0) throw ParseError("misplaced base64 padding");
      q[j] = decode_char(ch);
      if (q[j] < 0) throw ParseError("invalid base64 character");
    }
    const std::uint32_t v = (q[0] << 18) | (q[1] << 12) | (q[2] << 6) | q[3];
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    if (pad < 2) out.push_back(static_cast<std::uint8_t>((v >> 8) & 0xFF));
    if (pad < 1) out.push_back(static_cast<std::uint8_t>(v & 0xFF));
  }
  return out;
}

std::string to_base64(const EncScalar& c) { return base64_encode(serialize(c)); }

EncScalar from_base64(std::string_view text) { return deserialize(base64_decode(text)); }

void write_private_key(const std::filesystem::path& path, const PrivateKey& sk) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write key file " + path.string());
  out << "# Paillier private key (g = n + 1)\n";
  out << "n = " << sk.pub.n.get_str(10) << "\n";
  out << "p = " << sk.p.get_str(10) << "\n";
  out << "q = " << sk.q.get_str(10) << "\n";
}

void write_public_key(const std::filesystem::path& path, const PublicKey& pk) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write key file " + path.string());
  out << "# Paillier public key (g = n + 1)\n";
  out << "n = " << pk.n.get_str(10) << "\n";
}

PrivateKey read_private_key(const std::filesystem::path& path) {
  const auto fields = read_fields(path);
  const mpz_class& n = require(fields, "n", path);
  PrivateKey sk = PrivateKey::from_factors(require(fields, "p", path), require(fields, "q", path));
  if (sk.pub.n != n) throw ParseError(path.string() + ": n does not equal p*q");
  return sk;
}

PublicKey read_public_key(const std::filesystem::path& path) {
  return PublicKey::from_modulus(require(read_fields(path), "n", path));
}

}  // namespace ppse::phe
