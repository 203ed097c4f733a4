#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "ppse/error.hpp"
#include "ppse/phe/codec.hpp"
#include "ppse/phe/paillier.hpp"
#include "ppse/phe/wire.hpp"
#include "test_keys.hpp"

using namespace ppse;
using namespace ppse::phe;

TEST_CASE("keygen produces keys of the requested size") {
  Rng rng(1);
  const KeyPair kp = keygen(512, rng);
  CHECK(kp.pub.bits() == 512);
  CHECK(kp.pub.g == kp.pub.n + 1);
  CHECK(kp.priv.p * kp.priv.q == kp.pub.n);
  CHECK(mpz_probab_prime_p(kp.priv.p.get_mpz_t(), 25) > 0);
  mpz_class half = (kp.priv.p - 1) / 2;
  CHECK(mpz_probab_prime_p(half.get_mpz_t(), 25) > 0);  // safe prime

  Rng again(1);
  CHECK(keygen(512, again).pub.n == kp.pub.n);
}

TEST_CASE("keygen rejects undersized keys and reports exhausted searches") {
  Rng rng(2);
  CHECK_THROWS_AS(keygen(256, rng), ContractViolation);
  KeygenOptions tiny;
  tiny.max_candidates = 1;
  // One candidate almost never yields a safe prime; the error is retriable.
  bool timed_out = false;
  for (int i = 0; i < 5 && !timed_out; ++i) {
    try {
      keygen(512, rng, tiny);
    } catch (const KeygenTimeout&) {
      timed_out = true;
    }
  }
  CHECK(timed_out);
}

TEST_CASE("2048-bit round trip") {
  Rng rng(2048);
  const KeyPair kp = keygen(2048, rng);
  CHECK(kp.pub.bits() == 2048);
  CHECK(dec(kp.priv, enc(kp.pub, 12345, rng)) == 12345);
}

TEST_CASE("encryption round trip over random plaintexts") {
  const auto& kp = test_keys::keypair512();
  Rng rng(11);
  CHECK(dec(kp.priv, enc(kp.pub, 7, rng)) == 7);
  for (int i = 0; i < 100; ++i) {
    const mpz_class m = rng.below(kp.pub.n);
    REQUIRE(dec(kp.priv, enc(kp.pub, m, rng)) == m);
  }
}

TEST_CASE("encryption is probabilistic") {
  const auto& kp = test_keys::keypair512();
  const EncScalar a = enc_with_coin(kp.pub, 7, 3);
  const EncScalar b = enc_with_coin(kp.pub, 7, 5);
  CHECK(a.ct != b.ct);
  CHECK(dec(kp.priv, a) == dec(kp.priv, b));
  Rng rng(12);
  CHECK(enc(kp.pub, 7, rng).ct != enc(kp.pub, 7, rng).ct);
}

TEST_CASE("ciphertext addition") {
  const auto& kp = test_keys::keypair512();
  const PublicKey& pk = kp.pub;
  Rng rng(13);
  CHECK(dec(kp.priv, add_ct(pk, enc(pk, 2, rng), enc(pk, 3, rng))) == 5);
  const mpz_class a = rng.below(pk.n);
  CHECK(dec(kp.priv, add_ct(pk, enc(pk, a, rng), enc(pk, 0, rng))) == a);
  CHECK(dec(kp.priv, sub_ct(pk, enc(pk, 2, rng), enc(pk, 3, rng))) == pk.n - 1);

  const EncScalar s1 = enc(pk, 1, rng, 1);
  const EncScalar s2 = enc(pk, 1, rng, 2);
  CHECK_THROWS_AS(add_ct(pk, s1, s2), ScaleMismatch);
}

TEST_CASE("plaintext multiplication and scale budget") {
  const auto& kp = test_keys::keypair512();
  const PublicContext ctx(kp.pub);
  Rng rng(14);
  const EncScalar x = encrypt_real(ctx, 0.3, rng);

  const EncScalar one_x = mul_plain(ctx.pk, ctx.codec.encode(1.0), 1, x, ctx.codec.max_scale_exp());
  CHECK(one_x.scale_exp == 2);
  CHECK(decrypt_real(kp.priv, ctx.codec, one_x) == doctest::Approx(0.3).epsilon(1e-12));

  const EncScalar zero_x = mul_plain(ctx.pk, 0, 1, x, ctx.codec.max_scale_exp());
  CHECK(dec(kp.priv, zero_x) == 0);

  CHECK_THROWS_AS(mul_plain(ctx.pk, 2, ctx.codec.max_scale_exp(), x, ctx.codec.max_scale_exp()),
                  ScaleOverflow);

  std::mt19937_64 gen(15);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  const double tol = 2.0 * std::ldexp(1.0, -ctx.codec.frac_bits());
  for (int i = 0; i < 100; ++i) {
    const double k = unit(gen);
    const double v = unit(gen);
    const EncScalar prod = mul_real(ctx, k, encrypt_real(ctx, v, rng));
    REQUIRE(std::fabs(decrypt_real(kp.priv, ctx.codec, prod) - k * v) <= tol);
  }
}

TEST_CASE("rescale lifts by whole scale levels") {
  const auto& kp = test_keys::keypair512();
  const PublicContext ctx(kp.pub);
  Rng rng(16);
  const EncScalar x = encrypt_real(ctx, -2.5, rng);
  const EncScalar lifted = rescale(ctx, x, 3);
  CHECK(lifted.scale_exp == 3);
  CHECK(decrypt_real(kp.priv, ctx.codec, lifted) == -2.5);
  CHECK_THROWS_AS(rescale(ctx, lifted, 2), ScaleMismatch);
}

TEST_CASE("codec encode and decode") {
  const auto& kp = test_keys::keypair512();
  const FixedPointCodec codec(kp.pub);
  CHECK(codec.encode(0.0) == 0);
  CHECK(codec.decode(0, 1) == 0.0);
  CHECK(codec.decode(0, 3) == 0.0);

  const FixedPointCodec coarse(kp.pub, 8);
  CHECK(coarse.encode(-1.0) == kp.pub.n - 256);

  CHECK_THROWS_AS(codec.decode(5, 0), ContractViolation);
  CHECK_THROWS_AS(codec.encode(std::ldexp(1.0, 300)), RangeError);
  CHECK_THROWS_AS(codec.encode(std::nan("")), RangeError);

  std::mt19937_64 gen(17);
  std::uniform_real_distribution<double> wide(-1e3, 1e3);
  const double half_ulp = std::ldexp(1.0, -codec.frac_bits() - 1);
  for (int i = 0; i < 1000; ++i) {
    const double x = wide(gen);
    REQUIRE(std::fabs(codec.decode(codec.encode(x), 1) - x) <= half_ulp);
  }
}

TEST_CASE("product of encodings decodes at scale 2") {
  const auto& kp = test_keys::keypair512();
  const FixedPointCodec codec(kp.pub);
  std::mt19937_64 gen(18);
  std::uniform_real_distribution<double> dist(-50.0, 50.0);
  const double half_ulp = std::ldexp(1.0, -codec.frac_bits() - 1);
  for (int i = 0; i < 200; ++i) {
    const double a = dist(gen);
    const double b = dist(gen);
    const mpz_class prod = (codec.encode(a) * codec.encode(b)) % kp.pub.n;
    // |(a + ea)(b + eb) - ab| <= |a| eb + |b| ea + ea eb with |e| <= 2^-(f+1)
    const double bound = half_ulp * (std::fabs(a) + std::fabs(b)) + half_ulp * half_ulp + 1e-12;
    REQUIRE(std::fabs(codec.decode(prod, 2) - a * b) <= bound);
  }
}

TEST_CASE("sign mapping is order preserving") {
  const auto& kp = test_keys::keypair512();
  const FixedPointCodec codec(kp.pub);
  std::mt19937_64 gen(19);
  std::uniform_real_distribution<double> dist(-1e4, 1e4);
  for (int i = 0; i < 500; ++i) {
    double a = dist(gen);
    double b = dist(gen);
    if (a > b) std::swap(a, b);
    REQUIRE(codec.to_signed(codec.encode(a)) <= codec.to_signed(codec.encode(b)));
  }
}

TEST_CASE("codec budget leaves room for three stacked scales") {
  const auto& kp = test_keys::keypair512();
  const FixedPointCodec codec(kp.pub);
  CHECK(codec.max_scale_exp() >= 3);
  const double worst = std::ldexp(1.0, codec.magnitude_bits()) - 1.0;
  for (int s = 1; s <= 3; ++s) {
    CHECK_NOTHROW(codec.encode(worst, s));
    CHECK_NOTHROW(codec.encode(-worst, s));
    CHECK(codec.decode(codec.encode(-worst, s), s) == -worst);
  }
  // f too large for the modulus
  CHECK_THROWS_AS(FixedPointCodec(kp.pub, 170), ContractViolation);
}

TEST_CASE("ciphertext byte layout") {
  EncScalar c;
  c.ct = 0x0102;
  c.scale_exp = 3;
  const auto bytes = serialize(c);
  const std::vector<std::uint8_t> expected{0, 0, 0, 2, 0x01, 0x02, 0, 3};
  CHECK(bytes == expected);
  CHECK(deserialize(bytes) == c);

  const auto& kp = test_keys::keypair512();
  Rng rng(20);
  for (int i = 0; i < 20; ++i) {
    EncScalar e = enc(kp.pub, rng.below(kp.pub.n), rng, 1 + i % 4);
    REQUIRE(from_base64(to_base64(e)) == e);
  }
  std::vector<std::uint8_t> truncated(bytes.begin(), bytes.end() - 1);
  CHECK_THROWS_AS(deserialize(truncated), ParseError);
}

TEST_CASE("base64 known vectors") {
  auto enc_str = [](std::string s) {
    return base64_encode(std::span(reinterpret_cast<const std::uint8_t*>(s.data()), s.size()));
  };
  CHECK(enc_str("") == "");
  CHECK(enc_str("M") == "TQ==");
  CHECK(enc_str("Ma") == "TWE=");
  CHECK(enc_str("Man") == "TWFu");
  CHECK(base64_decode("TWE=") == std::vector<std::uint8_t>{'M', 'a'});
  CHECK_THROWS_AS(base64_decode("TW*u"), ParseError);
  CHECK_THROWS_AS(base64_decode("TWF"), ParseError);
}

TEST_CASE("key files round trip") {
  const auto& kp = test_keys::keypair512();
  const auto dir = std::filesystem::temp_directory_path() / "ppse_test_keys";
  std::filesystem::create_directories(dir);
  write_private_key(dir / "key.priv", kp.priv);
  write_public_key(dir / "key.pub", kp.pub);
  const PrivateKey sk = read_private_key(dir / "key.priv");
  CHECK(sk.pub.n == kp.pub.n);
  CHECK(sk.lambda == kp.priv.lambda);
  CHECK(read_public_key(dir / "key.pub").n == kp.pub.n);
  CHECK_THROWS_AS(read_private_key(dir / "key.pub"), ParseError);
  std::filesystem::remove_all(dir);
}
