#include "ppse/phe/paillier.hpp"

#include <string>
#include <vector>

#include "ppse/error.hpp"

namespace ppse::phe {

namespace {

constexpr int kMillerRabinReps = 30;

// Odd primes below 2000 for trial division ahead of Miller-Rabin.
const std::vector<unsigned long>& small_primes() {
  static const std::vector<unsigned long> primes = [] {
    std::vector<unsigned long> out;
    for (unsigned long c = 3; c < 2000; c += 2) {
      bool prime = true;
      for (unsigned long d = 3; d * d <= c; d += 2) {
        if (c % d == 0) {
          prime = false;
          break;
        }
      }
      if (prime) out.push_back(c);
    }
    return out;
  }();
  return primes;
}

bool survives_sieve(const mpz_class& x) {
  for (unsigned long p : small_primes()) {
    if (mpz_cmp_ui(x.get_mpz_t(), p) == 0) return true;
    if (mpz_divisible_ui_p(x.get_mpz_t(), p)) return false;
  }
  return true;
}

bool is_probable_prime(const mpz_class& x) {
  return mpz_probab_prime_p(x.get_mpz_t(), kMillerRabinReps) > 0;
}

// Random odd integer of exactly `bits` bits whose top two bits are set, so
// that the product of two such numbers has exactly 2*bits bits.
mpz_class random_candidate(Rng& rng, std::size_t bits) {
  mpz_class x = rng.bits(bits);
  mpz_setbit(x.get_mpz_t(), bits - 1);
  mpz_setbit(x.get_mpz_t(), bits - 2);
  mpz_setbit(x.get_mpz_t(), 0);
  return x;
}

mpz_class random_prime(Rng& rng, std::size_t bits, const KeygenOptions& options) {
  for (std::size_t attempt = 0; attempt < options.max_candidates; ++attempt) {
    if (!options.safe_primes) {
      mpz_class p = random_candidate(rng, bits);
      if (survives_sieve(p) && is_probable_prime(p)) return p;
      continue;
    }
    // p = 2p' + 1 with p' of bits-1 bits; the top two bits of p follow from
    // p' having its top two bits set.
    mpz_class half = random_candidate(rng, bits - 1);
    mpz_class p = 2 * half + 1;
    if (!survives_sieve(half) || !survives_sieve(p)) continue;
    if (is_probable_prime(half) && is_probable_prime(p)) return p;
  }
  throw KeygenTimeout("prime search exhausted " + std::to_string(options.max_candidates) +
                      " candidates for a " + std::to_string(bits) + "-bit prime");
}

}  // namespace

Rng::Rng(std::uint64_t seed) : state_(gmp_randinit_mt) {
  mpz_class s;
  mpz_import(s.get_mpz_t(), 1, 1, sizeof(seed), 0, 0, &seed);
  state_.seed(s);
}

mpz_class Rng::below(const mpz_class& bound) { return state_.get_z_range(bound); }

mpz_class Rng::bits(std::size_t bits) { return state_.get_z_bits(bits); }

PublicKey PublicKey::from_modulus(const mpz_class& n) {
  if (n <= 3) throw ContractViolation("Paillier modulus must exceed 3");
  PublicKey pk;
  pk.n = n;
  pk.n_squared = n * n;
  pk.g = n + 1;
  return pk;
}

PrivateKey PrivateKey::from_factors(const mpz_class& p, const mpz_class& q) {
  if (p == q) throw ContractViolation("Paillier factors must be distinct");
  PrivateKey sk;
  sk.pub = PublicKey::from_modulus(p * q);
  sk.p = p;
  sk.q = q;
  mpz_class pm1 = p - 1;
  mpz_class qm1 = q - 1;
  mpz_lcm(sk.lambda.get_mpz_t(), pm1.get_mpz_t(), qm1.get_mpz_t());
  if (mpz_invert(sk.mu.get_mpz_t(), sk.lambda.get_mpz_t(), sk.pub.n.get_mpz_t()) == 0) {
    throw ContractViolation("lambda is not invertible modulo n; factors are not valid primes");
  }
  return sk;
}

KeyPair keygen(std::size_t bits, Rng& rng, const KeygenOptions& options) {
  if (bits < 512 || bits % 2 != 0) {
    throw ContractViolation("key size must be an even number of bits >= 512");
  }
  const std::size_t half = bits / 2;
  for (;;) {
    mpz_class p = random_prime(rng, half, options);
    mpz_class q = random_prime(rng, half, options);
    if (p == q) continue;
    mpz_class n = p * q;
    if (mpz_sizeinbase(n.get_mpz_t(), 2) != bits) continue;
    PrivateKey sk = PrivateKey::from_factors(p, q);
    return KeyPair{sk.pub, std::move(sk)};
  }
}

EncScalar enc_with_coin(const PublicKey& pk, const mpz_class& m, const mpz_class& r,
                        int scale_exp) {
  if (m < 0 || m >= pk.n) throw ContractViolation("plaintext must lie in [0, n)");
  // g^m = (1 + n)^m = 1 + m*n  (mod n^2)
  mpz_class gm = (1 + m * pk.n) % pk.n_squared;
  mpz_class rn;
  mpz_powm(rn.get_mpz_t(), r.get_mpz_t(), pk.n.get_mpz_t(), pk.n_squared.get_mpz_t());
  EncScalar out;
  out.ct = (gm * rn) % pk.n_squared;
  out.scale_exp = scale_exp;
  return out;
}

EncScalar enc(const PublicKey& pk, const mpz_class& m, Rng& rng, int scale_exp) {
  mpz_class r;
  mpz_class g;
  do {
    r = rng.below(pk.n);
    mpz_gcd(g.get_mpz_t(), r.get_mpz_t(), pk.n.get_mpz_t());
  } while (r == 0 || g != 1);
  return enc_with_coin(pk, m, r, scale_exp);
}

EncScalar enc_trivial(const PublicKey& pk, const mpz_class& m, int scale_exp) {
  return enc_with_coin(pk, m, mpz_class(1), scale_exp);
}

mpz_class dec(const PrivateKey& sk, const EncScalar& c) {
  const PublicKey& pk = sk.pub;
  if (c.ct <= 0 || c.ct >= pk.n_squared) throw ContractViolation("ciphertext out of range");
  mpz_class u;
  mpz_powm(u.get_mpz_t(), c.ct.get_mpz_t(), sk.lambda.get_mpz_t(), pk.n_squared.get_mpz_t());
  mpz_class l = (u - 1) / pk.n;
  mpz_class m = (l * sk.mu) % pk.n;
  return m;
}

EncScalar add_ct(const PublicKey& pk, const EncScalar& a, const EncScalar& b) {
  if (a.scale_exp != b.scale_exp) {
    throw ScaleMismatch("cannot add ciphertexts at scales " + std::to_string(a.scale_exp) +
                        " and " + std::to_string(b.scale_exp));
  }
  return EncScalar{(a.ct * b.ct) % pk.n_squared, a.scale_exp};
}

EncScalar neg_ct(const PublicKey& pk, const EncScalar& a) {
  EncScalar out;
  out.scale_exp = a.scale_exp;
  if (mpz_invert(out.ct.get_mpz_t(), a.ct.get_mpz_t(), pk.n_squared.get_mpz_t()) == 0) {
    throw ContractViolation("ciphertext is not a unit modulo n^2");
  }
  return out;
}

EncScalar sub_ct(const PublicKey& pk, const EncScalar& a, const EncScalar& b) {
  return add_ct(pk, a, neg_ct(pk, b));
}

EncScalar mul_plain(const PublicKey& pk, const mpz_class& k, int k_scale, const EncScalar& b,
                    int max_scale_exp) {
  if (k < 0 || k >= pk.n) throw ContractViolation("plaintext multiplier must lie in [0, n)");
  const int scale = b.scale_exp + k_scale;
  if (scale > max_scale_exp) {
    throw ScaleOverflow("plaintext multiplication would reach scale " + std::to_string(scale) +
                        " above the budget " + std::to_string(max_scale_exp));
  }
  EncScalar out;
  out.scale_exp = scale;
  if (k > pk.n / 2) {
    // (n - |k|) ⊗ c decrypts like -( |k| ⊗ c ); the short exponent is cheaper.
    mpz_class mag = pk.n - k;
    mpz_class t;
    mpz_powm(t.get_mpz_t(), b.ct.get_mpz_t(), mag.get_mpz_t(), pk.n_squared.get_mpz_t());
    if (mpz_invert(out.ct.get_mpz_t(), t.get_mpz_t(), pk.n_squared.get_mpz_t()) == 0) {
      throw ContractViolation("ciphertext is not a unit modulo n^2");
    }
  } else {
    mpz_powm(out.ct.get_mpz_t(), b.ct.get_mpz_t(), k.get_mpz_t(), pk.n_squared.get_mpz_t());
  }
  return out;
}

}  // namespace ppse::phe
