#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles/random_sets.hpp"
#include "ppse/encsets/encsets.hpp"
#include "ppse/error.hpp"
#include "ppse/sets/intersect.hpp"
#include "ppse/sets/ops.hpp"
#include "ppse/sets/reduce.hpp"
#include "test_keys.hpp"

using namespace ppse;
using namespace ppse::encsets;
using sets::ConstrainedZonotoped;
using sets::Stripd;
using sets::Zonotoped;

namespace {

struct Fixture {
  const phe::KeyPair& kp = test_keys::keypair512();
  PublicContext ctx{kp.pub};
  phe::Rng rng{71};
  std::mt19937_64 gen{72};

  // Fixed-point slack for a chain of `levels` plaintext products on values of
  // order one: each level adds a rounding of 2^-(f+1) per term.
  double tol(int levels = 3) const { return 64.0 * levels * std::ldexp(1.0, -ctx.codec.frac_bits()); }

  Zonotoped dec(const EncZonotope& z) const { return decrypt_zono(kp.priv, ctx.codec, z); }
  ConstrainedZonotoped dec(const EncConsZonotope& z) const { return decrypt_cons(kp.priv, ctx.codec, z); }

  std::vector<EncStrip> enc_strips(const std::vector<Stripd>& s) {
    std::vector<EncStrip> out;
    for (const auto& x : s) out.push_back(encrypt_strip(ctx, x, rng));
    return out;
  }
};

double max_diff(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return a.size() == 0 ? 0.0 : (a - b).cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE_FIXTURE(Fixture, "encrypt and decrypt sets") {
  const Zonotoped unit(Eigen::VectorXd::Zero(3), Eigen::MatrixXd::Identity(3, 3));
  const EncZonotope e = encrypt_zono(ctx, unit, rng);
  CHECK(dec(e).c == unit.c);
  CHECK(e.G == unit.G);
  CHECK(e.enc_c[0].scale_exp == 1);

  const double half_ulp = std::ldexp(1.0, -ctx.codec.frac_bits() - 1);
  for (int i = 0; i < 10; ++i) {
    const Zonotoped z = oracle::random_zonotope(gen, 3, 4);
    const EncZonotope ez = encrypt_zono(ctx, z, rng);
    CHECK(ez.G == z.G);  // bit-identical plaintext part
    REQUIRE(max_diff(dec(ez).c, z.c) <= half_ulp);
  }

  const ConstrainedZonotoped cz(oracle::random_vector(gen, 2), oracle::random_matrix(gen, 2, 3),
                                oracle::random_matrix(gen, 1, 3), oracle::random_vector(gen, 1));
  const ConstrainedZonotoped back = dec(encrypt_cons(ctx, cz, rng));
  CHECK(max_diff(back.b, cz.b) <= half_ulp);
  CHECK(back.A == cz.A);

  Zonotoped huge = unit;
  huge.c(0) = std::ldexp(1.0, 300);
  CHECK_THROWS_AS(encrypt_zono(ctx, huge, rng), RangeError);
}

TEST_CASE_FIXTURE(Fixture, "encrypted zonotope measurement update") {
  const Zonotoped z = oracle::random_zonotope(gen, 3, 5);
  const EncZonotope ez = encrypt_zono(ctx, z, rng);
  const std::vector<Stripd> strips = oracle::random_strips_through(gen, z, 4);
  const std::vector<EncStrip> es = enc_strips(strips);

  const EncZonotope same = enc_meas_update_zono(ctx, ez, es, sets::zero_lambda(3, strips));
  CHECK(max_diff(dec(same).c, z.c) <= tol());
  CHECK(same.enc_c[0].scale_exp == 2);

  const sets::LambdaGaind lambda = sets::compute_lambda(z, strips);
  const EncZonotope upd = enc_meas_update_zono(ctx, ez, es, lambda);
  const Zonotoped ref = sets::intersect_zono_strips(z, strips, lambda);
  CHECK(upd.G == ref.G);  // plaintext path is the same computation
  CHECK(max_diff(dec(upd).c, ref.c) <= tol());

  // worked 1-D example through ciphertexts: c̄ = 0.25, Ḡ = [0.5, 0.25]
  const Zonotoped unit(Eigen::VectorXd::Zero(1), Eigen::MatrixXd::Ones(1, 1));
  const std::vector<Stripd> one{Stripd(Eigen::MatrixXd::Ones(1, 1), Eigen::VectorXd::Constant(1, 0.5),
                                       Eigen::VectorXd::Constant(1, 0.5))};
  sets::LambdaGaind half = sets::zero_lambda(1, one);
  half.stacked(0, 0) = 0.5;
  const Zonotoped r = dec(enc_meas_update_zono(ctx, encrypt_zono(ctx, unit, rng), enc_strips(one), half));
  CHECK(r.c(0) == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(r.G(0, 0) == 0.5);
  CHECK(r.G(0, 1) == 0.25);
}

TEST_CASE_FIXTURE(Fixture, "encrypted constrained measurement update") {
  const Zonotoped base = oracle::random_zonotope(gen, 2, 3);
  const ConstrainedZonotoped cz(base);
  const EncConsZonotope ec = encrypt_cons(ctx, cz, rng);
  const std::vector<Stripd> none;
  const EncConsZonotope same = enc_meas_update_cons(ctx, ec, {}, sets::zero_lambda(2, none));
  CHECK(same.enc_c == ec.enc_c);
  CHECK(same.G == ec.G);

  const std::vector<Stripd> strips = oracle::random_strips_through(gen, base, 2);
  const std::vector<EncStrip> es = enc_strips(strips);
  const sets::LambdaGaind l1 = sets::random_lambda(2, strips, gen);
  const sets::LambdaGaind l2 = sets::random_lambda(2, strips, gen);
  const EncConsZonotope u1 = enc_meas_update_cons(ctx, ec, es, l1);
  const EncConsZonotope u2 = enc_meas_update_cons(ctx, ec, es, l2);
  CHECK(phe::uniform_scale(u1.enc_b) == 2);
  const ConstrainedZonotoped ref = sets::intersect_conszono_strips(cz, strips, l1);
  const ConstrainedZonotoped d1 = dec(u1);
  const ConstrainedZonotoped d2 = dec(u2);
  CHECK(d1.G == ref.G);
  CHECK(d1.A == ref.A);
  CHECK(max_diff(d1.c, ref.c) <= tol());
  CHECK(max_diff(d1.b, ref.b) <= tol());

  const sets::Boxd hull = sets::interval_hull(base);
  for (int i = 0; i < 200; ++i) {
    const Eigen::VectorXd x = oracle::random_point(gen, hull.lower, hull.upper);
    const bool in_ref = sets::contains(ref, x);
    // representation freedom: two gains, one set
    REQUIRE(sets::contains(d1, x) == in_ref);
    REQUIRE(sets::contains(d2, x) == in_ref);
  }
}

TEST_CASE_FIXTURE(Fixture, "encrypted time update") {
  const Zonotoped z = oracle::random_zonotope(gen, 3, 4);
  const EncZonotope ez = encrypt_zono(ctx, z, rng);
  const sets::SystemModeld ident(Eigen::MatrixXd::Identity(3, 3), Eigen::MatrixXd::Zero(3, 0));
  const Zonotoped same = dec(enc_time_update(ctx, ez, ident, 5));
  CHECK(max_diff(same.c, z.c) <= tol());
  CHECK(same.G == z.G);

  const sets::SystemModeld model(oracle::random_matrix(gen, 3, 3), 0.1 * Eigen::MatrixXd::Identity(3, 3));
  const EncZonotope next = enc_time_update(ctx, ez, model, 2);
  const Zonotoped ref = sets::time_update(z, model, 2);
  CHECK(next.G == ref.G);
  CHECK(next.num_generators() <= 6);
  CHECK(max_diff(dec(next).c, ref.c) <= tol());

  const ConstrainedZonotoped cz(z.c, z.G, oracle::random_matrix(gen, 1, 4), oracle::random_vector(gen, 1));
  const EncConsZonotope ec = encrypt_cons(ctx, cz, rng);
  const EncConsZonotope cnext = enc_time_update(ctx, ec, model, 2);
  const ConstrainedZonotoped cref = sets::time_update(cz, model, 2);
  CHECK(cnext.enc_b == ec.enc_b);
  CHECK(cnext.G == cref.G);
  CHECK(cnext.A == cref.A);
  CHECK(max_diff(dec(cnext).c, cref.c) <= tol());
}

TEST_CASE_FIXTURE(Fixture, "encrypted diffusion") {
  const Zonotoped z1 = oracle::random_zonotope(gen, 2, 3);
  Zonotoped z2 = oracle::random_zonotope(gen, 2, 2);
  z2.c = z1.c + 0.3 * oracle::random_vector(gen, 2);
  const std::vector<EncZonotope> ez{encrypt_zono(ctx, z1, rng), encrypt_zono(ctx, z2, rng)};

  const Zonotoped single = dec(enc_diffusion_zono(ctx, {ez[0]}, sets::WeightVectord{Eigen::VectorXd::Ones(1)}));
  CHECK(max_diff(single.c, z1.c) <= tol());
  CHECK(single.G == z1.G);

  const sets::WeightVectord w = weights_of(ez);
  CHECK(w.w == sets::compute_weights<double>({z1, z2}).w);
  const EncZonotope fused = enc_diffusion_zono(ctx, ez, w);
  const Zonotoped ref = sets::intersect_zonos_weighted<double>({z1, z2}, w);
  CHECK(fused.G == ref.G);
  const Zonotoped dfused = dec(fused);
  CHECK(max_diff(dfused.c, ref.c) <= tol());
  int tested = 0;
  for (int i = 0; i < 5000 && tested < 100; ++i) {
    const Eigen::VectorXd x = z1.c + z1.G * oracle::random_vector(gen, 3);
    if (!sets::contains(z2, x)) continue;
    ++tested;
    REQUIRE(sets::contains(dfused, x));
  }
  CHECK(tested > 0);

  std::vector<EncZonotope> mixed = ez;
  mixed[1].enc_c = rescale(ctx, mixed[1].enc_c, 2);
  CHECK_THROWS_AS(enc_diffusion_zono(ctx, mixed, w), ScaleMismatch);

  const ConstrainedZonotoped c1(z1);
  const ConstrainedZonotoped c2 = sets::intersect_conszono_strips(
      ConstrainedZonotoped(z2), oracle::random_strips_through(gen, z2, 1), sets::LambdaGaind{Eigen::MatrixXd::Zero(2, 1), {0, 1}});
  const EncConsZonotope e1 = encrypt_cons(ctx, c1, rng);
  const EncConsZonotope e2 = encrypt_cons(ctx, c2, rng);
  const EncConsZonotope one = enc_diffusion_cons(ctx, {e1});
  CHECK(one.enc_c == e1.enc_c);
  const ConstrainedZonotoped dc = dec(enc_diffusion_cons(ctx, {e1, e2}));
  const ConstrainedZonotoped cref = sets::intersect_conszonos<double>({c1, c2});
  CHECK(dc.G == cref.G);
  CHECK(dc.A == cref.A);
  CHECK(max_diff(dc.b, cref.b) <= tol());
  const ConstrainedZonotoped twice = dec(enc_diffusion_cons(ctx, {e2, e2}));
  const sets::Boxd hull = sets::interval_hull(z1);
  for (int i = 0; i < 200; ++i) {
    const Eigen::VectorXd x = oracle::random_point(gen, hull.lower, hull.upper);
    REQUIRE(sets::contains(dc, x) == sets::contains(cref, x));
    REQUIRE(sets::contains(twice, x) == sets::contains(c2, x));
  }
}

TEST_CASE_FIXTURE(Fixture, "scale budget is enforced") {
  const Zonotoped z = oracle::random_zonotope(gen, 2, 2);
  EncZonotope ez = encrypt_zono(ctx, z, rng);
  const sets::SystemModeld ident(Eigen::MatrixXd::Identity(2, 2), Eigen::MatrixXd::Zero(2, 0));
  const int budget = ctx.codec.max_scale_exp();
  for (int s = 1; s < budget; ++s) ez = enc_time_update(ctx, ez, ident, 5);
  CHECK(ez.enc_c[0].scale_exp == budget);
  CHECK(max_diff(dec(ez).c, z.c) <= tol(budget));
  CHECK_THROWS_AS(enc_time_update(ctx, ez, ident, 5), ScaleOverflow);
}

TEST_CASE_FIXTURE(Fixture, "encrypted set wire format") {
  const ConstrainedZonotoped cz(oracle::random_vector(gen, 2), oracle::random_matrix(gen, 2, 3),
                                oracle::random_matrix(gen, 1, 3), oracle::random_vector(gen, 1));
  const EncConsZonotope ec = encrypt_cons(ctx, cz, rng);
  const EncConsZonotope back = enc_cons_from_json(nlohmann::json::parse(to_json(ec).dump()));
  CHECK(back.enc_c == ec.enc_c);
  CHECK(back.enc_b == ec.enc_b);
  CHECK(back.A == ec.A);

  const EncZonotope ez = encrypt_zono(ctx, Zonotoped(cz.c, cz.G), rng);
  CHECK(enc_zono_from_json(to_json(ez)).enc_c == ez.enc_c);

  const Stripd s(Eigen::MatrixXd::Ones(1, 2), Eigen::VectorXd::Constant(1, 0.0), Eigen::VectorXd::Constant(1, 0.1));
  const EncStrip es = encrypt_strip(ctx, s, rng);
  CHECK(phe::decrypt_real(kp.priv, ctx.codec, es.enc_y[0]) == 0.0);
  const EncStrip es2 = enc_strip_from_json(to_json(es));
  CHECK(es2.R == es.R);
  CHECK(es2.enc_y == es.enc_y);
  CHECK_FALSE(to_json(es, false).contains("R"));
  CHECK_THROWS_AS(enc_zono_from_json(nlohmann::json{{"c", {"!!"}}, {"G", {{1.0}}}}), ParseError);
}
