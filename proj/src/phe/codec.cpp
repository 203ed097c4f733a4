#include "ppse/phe/codec.hpp"

#include <cmath>
#include <string>

#include "ppse/error.hpp"

namespace ppse::phe {

FixedPointCodec::FixedPointCodec(const PublicKey& pk, int frac_bits, int magnitude_bits)
    : n_(pk.n), half_n_(pk.n / 2), frac_bits_(frac_bits), magnitude_bits_(magnitude_bits) {
  const int bits = static_cast<int>(pk.bits());
  if (frac_bits <= 0 || magnitude_bits < 0) {
    throw ContractViolation("fraction bits must be positive");
  }
  if (3 * frac_bits + magnitude_bits >= bits - 1) {
    throw ContractViolation("codec needs 3*f + magnitude bits < bitlen(n) - 1 (f=" +
                            std::to_string(frac_bits) + ", n has " + std::to_string(bits) +
                            " bits)");
  }
  max_scale_exp_ = (bits - 2 - magnitude_bits) / frac_bits;
  max_abs_ = std::ldexp(1.0, bits / 2 - frac_bits);
}

mpz_class FixedPointCodec::encode(double x, int scale) const {
  if (scale < 1) throw ContractViolation("encoding scale must be >= 1");
  if (!std::isfinite(x) || std::fabs(x) >= max_abs_) {
    throw RangeError("value " + std::to_string(x) + " exceeds the codec range");
  }
  mpz_class v;
  mpz_set_d(v.get_mpz_t(), std::round(std::ldexp(x, frac_bits_ * scale)));
  if (abs(v) >= half_n_) {
    throw RangeError("value " + std::to_string(x) + " at scale " + std::to_string(scale) +
                     " wraps around the modulus");
  }
  if (v < 0) v += n_;
  return v;
}

mpz_class FixedPointCodec::to_signed(const mpz_class& m) const {
  return m > half_n_ ? mpz_class(m - n_) : m;
}

double FixedPointCodec::decode(const mpz_class& m, int scale) const {
  if (scale < 1) throw ContractViolation("decode requires scale_exp >= 1");
  const mpz_class s = to_signed(m);
  long exp = 0;
  const double mant = mpz_get_d_2exp(&exp, s.get_mpz_t());
  return std::ldexp(mant, static_cast<int>(exp) - frac_bits_ * scale);
}

mpz_class FixedPointCodec::scale_factor(int levels) const {
  mpz_class out = 1;
  mpz_mul_2exp(out.get_mpz_t(), out.get_mpz_t(), static_cast<mp_bitcnt_t>(frac_bits_ * levels));
  return out;
}

EncScalar encrypt_real(const PublicContext& ctx, double x, Rng& rng) {
  return enc(ctx.pk, ctx.codec.encode(x), rng, 1);
}

double decrypt_real(const PrivateKey& sk, const FixedPointCodec& codec, const EncScalar& c) {
  return codec.decode(dec(sk, c), c.scale_exp);
}

EncScalar mul_real(const PublicContext& ctx, double k, const EncScalar& c) {
  return mul_plain(ctx.pk, ctx.codec.encode(k), 1, c, ctx.codec.max_scale_exp());
}

EncScalar rescale(const PublicContext& ctx, const EncScalar& c, int target) {
  if (target < c.scale_exp) {
    throw ScaleMismatch("cannot lower a ciphertext scale from " + std::to_string(c.scale_exp) +
                        " to " + std::to_string(target));
  }
  if (target == c.scale_exp) return c;
  const int levels = target - c.scale_exp;
  return mul_plain(ctx.pk, ctx.codec.scale_factor(levels), levels, c, ctx.codec.max_scale_exp());
}

int uniform_scale(const EncVector& v) {
  if (v.empty()) return 0;
  const int s = v.front().scale_exp;
  for (const auto& e : v) {
    if (e.scale_exp != s) throw ScaleMismatch("encrypted vector mixes fixed-point scales");
  }
  return s;
}

}  // namespace ppse::phe
