#pragma once

#include <gmpxx.h>

#include <utility>
#include <vector>

#include "ppse/phe/paillier.hpp"

namespace ppse::phe {

/// Base-2 fixed-point mapping between reals and Z_n.
///
/// A real x at scale s is represented by round(x * 2^(f*s)); negatives live in
/// the upper half of the residue ring (m > n/2 means m - n).
class FixedPointCodec {
 public:
  static constexpr int kDefaultFracBits = 48;
  static constexpr int kDefaultMagnitudeBits = 16;

  /// Throws ContractViolation unless 3*f + magnitude_bits < bitlen(n) - 1.
  explicit FixedPointCodec(const PublicKey& pk, int frac_bits = kDefaultFracBits,
                           int magnitude_bits = kDefaultMagnitudeBits);

  int frac_bits() const { return frac_bits_; }
  int magnitude_bits() const { return magnitude_bits_; }
  const mpz_class& modulus() const { return n_; }

  /// Largest scale at which a value of `magnitude_bits` still sits below n/2.
  int max_scale_exp() const { return max_scale_exp_; }

  /// round(x * 2^(f*scale)) mod n. Throws RangeError when
  /// |x| >= 2^(bitlen(n)/2 - f) or x is not finite.
  mpz_class encode(double x, int scale = 1) const;

  /// Inverse of encode. Throws ContractViolation for scale < 1.
  double decode(const mpz_class& m, int scale) const;

  /// Maps a residue to its signed representative in (-n/2, n/2].
  mpz_class to_signed(const mpz_class& m) const;

  /// 2^(f*levels), the plaintext that lifts a ciphertext by `levels` scales.
  mpz_class scale_factor(int levels) const;

 private:
  mpz_class n_;
  mpz_class half_n_;
  int frac_bits_;
  int magnitude_bits_;
  int max_scale_exp_;
  double max_abs_;
};

/// Public key plus codec: everything a non-query party needs for
/// encrypted arithmetic on reals.
struct PublicContext {
  PublicKey pk;
  FixedPointCodec codec;

  explicit PublicContext(PublicKey key, int frac_bits = FixedPointCodec::kDefaultFracBits)
      : pk(std::move(key)), codec(pk, frac_bits) {}
};

EncScalar encrypt_real(const PublicContext& ctx, double x, Rng& rng);
double decrypt_real(const PrivateKey& sk, const FixedPointCodec& codec, const EncScalar& c);

/// Multiplies a ciphertext by a real constant encoded at scale 1.
EncScalar mul_real(const PublicContext& ctx, double k, const EncScalar& c);

/// Lifts a ciphertext to `target` scale by multiplying with 2^(f*(target - scale)).
EncScalar rescale(const PublicContext& ctx, const EncScalar& c, int target);

using EncVector = std::vector<EncScalar>;

/// Common scale of a vector; throws ScaleMismatch if the entries disagree.
/// Returns 0 for an empty vector.
int uniform_scale(const EncVector& v);

}  // namespace ppse::phe
