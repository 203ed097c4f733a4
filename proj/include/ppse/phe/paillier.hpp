#pragma once

#include <gmpxx.h>

#include <cstddef>
#include <cstdint>

namespace ppse::phe {

/// Seeded source of big-integer randomness (key material and encryption coins).
/// Not thread-safe; give every party its own instance.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  Rng(const Rng&) = delete;
  Rng& operator=(const Rng&) = delete;

  /// Uniform integer in [0, bound).
  mpz_class below(const mpz_class& bound);
  /// Uniform integer with `bits` random bits.
  mpz_class bits(std::size_t bits);

 private:
  gmp_randclass state_;
};

struct PublicKey {
  mpz_class n;
  mpz_class n_squared;
  mpz_class g;  // always n + 1

  static PublicKey from_modulus(const mpz_class& n);

  std::size_t bits() const { return mpz_sizeinbase(n.get_mpz_t(), 2); }
  bool operator==(const PublicKey& other) const { return n == other.n; }
};

struct PrivateKey {
  PublicKey pub;
  mpz_class p;
  mpz_class q;
  mpz_class lambda;  // lcm(p - 1, q - 1)
  mpz_class mu;      // lambda^-1 mod n

  static PrivateKey from_factors(const mpz_class& p, const mpz_class& q);
};

struct KeyPair {
  PublicKey pub;
  PrivateKey priv;
};

struct KeygenOptions {
  /// Use safe primes p = 2p' + 1. Slower for large keys but matches the usual
  /// hardening of the modulus.
  bool safe_primes = true;
  /// Candidate budget per prime before giving up with KeygenTimeout.
  std::size_t max_candidates = 2'000'000;
};

/// Generates a keypair whose modulus has exactly `bits` bits.
/// Throws ContractViolation for bits < 512 and KeygenTimeout when the
/// candidate budget is exhausted.
KeyPair keygen(std::size_t bits, Rng& rng, const KeygenOptions& options = {});

/// Paillier ciphertext tagged with its fixed-point scale.
///
/// `scale_exp` counts how many factors of 2^f the underlying plaintext
/// carries; fresh encodings have scale 1 and every plaintext multiplication
/// adds the scale of the multiplier.
struct EncScalar {
  mpz_class ct;
  int scale_exp = 1;

  bool operator==(const EncScalar& other) const {
    return ct == other.ct && scale_exp == other.scale_exp;
  }
};

/// Encrypts m in [0, n). The coin r is resampled until it is a unit mod n.
EncScalar enc(const PublicKey& pk, const mpz_class& m, Rng& rng, int scale_exp = 1);

/// Encryption with an explicit coin, used by tests to show that encryption
/// is probabilistic.
EncScalar enc_with_coin(const PublicKey& pk, const mpz_class& m, const mpz_class& r,
                        int scale_exp = 1);

/// Deterministic encryption with coin 1. Only for public constants (the
/// additive identity of an empty homomorphic sum).
EncScalar enc_trivial(const PublicKey& pk, const mpz_class& m, int scale_exp);

mpz_class dec(const PrivateKey& sk, const EncScalar& c);

/// ⟦a⟧ ⊕ ⟦b⟧. Throws ScaleMismatch unless both scales agree.
EncScalar add_ct(const PublicKey& pk, const EncScalar& a, const EncScalar& b);
/// ⟦a⟧ ⊖ ⟦b⟧.
EncScalar sub_ct(const PublicKey& pk, const EncScalar& a, const EncScalar& b);
/// ⊖⟦a⟧.
EncScalar neg_ct(const PublicKey& pk, const EncScalar& a);

/// k ⊗ ⟦b⟧ for a plaintext k in [0, n) carrying scale `k_scale`.
/// Values above n/2 are treated as negatives so the exponent stays short.
/// Throws ScaleOverflow if b.scale_exp + k_scale > max_scale_exp.
EncScalar mul_plain(const PublicKey& pk, const mpz_class& k, int k_scale, const EncScalar& b,
                    int max_scale_exp);

}  // namespace ppse::phe
