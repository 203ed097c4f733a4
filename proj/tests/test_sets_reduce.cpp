#include <doctest.h>

#include <random>

#include "oracles/random_sets.hpp"
#include "ppse/error.hpp"
#include "ppse/sets/intersect.hpp"
#include "ppse/sets/ops.hpp"
#include "ppse/sets/reduce.hpp"

using namespace ppse;
using namespace ppse::sets;
using Eigen::MatrixXd;
using Eigen::VectorXd;

TEST_CASE("Girard reduction") {
  std::mt19937_64 gen(61);
  const Zonotoped small = oracle::random_zonotope(gen, 2, 4);
  CHECK(reduce_order(small, 2).G == small.G);
  CHECK_THROWS_AS(reduce_order(small, 0), ContractViolation);

  // three axis-aligned generators to order 1: the interval hull
  MatrixXd G(2, 3);
  G << 1, 0, -2, 0, 0.5, 0;
  const Zonotoped axis(VectorXd::Zero(2), G);
  const Zonotoped boxed = reduce_order(axis, 1);
  CHECK(boxed.num_generators() == 2);
  CHECK(boxed.G.isApprox((MatrixXd(2, 2) << 3, 0, 0, 0.5).finished()));

  for (int trial = 0; trial < 20; ++trial) {
    const Zonotoped z = oracle::random_zonotope(gen, 3, 12 + trial);
    for (int q : {1, 2, 3}) {
      const Zonotoped r = reduce_order(z, q);
      REQUIRE(r.num_generators() <= 3 * q);
      for (int k = 0; k < 100; ++k) {
        const VectorXd d = oracle::random_direction(gen, 3);
        REQUIRE(support(r, d) >= support(z, d) - 1e-12);
      }
    }
  }
}

TEST_CASE("the generators kept are the least box-like ones") {
  // ‖g‖₁ - ‖g‖∞ is 0 for axis-aligned columns and 1 for (1, 1)
  MatrixXd G(2, 4);
  G << 1, 1, 0, 0.1, 1, 0, 1, 0;
  const Zonotoped z(VectorXd::Zero(2), G);
  const Zonotoped r = reduce_order(z, 1);  // boxes e - 0 = 4 columns
  CHECK(r.num_generators() == 2);
  // order 2 keeps n(q-1) = 2 columns: the diagonal (1,1) and, by stable order, the last axis column
  MatrixXd G2(2, 6);
  G2 << 1, 1, 0, 0.1, 0.2, 0, 1, 0, 1, 0, 0, 0.3;
  const Zonotoped r2 = reduce_order(Zonotoped(VectorXd::Zero(2), G2), 2);
  CHECK(r2.num_generators() == 4);
  CHECK(r2.G.col(0) == G2.col(0));
}

TEST_CASE("lifted constrained reduction") {
  std::mt19937_64 gen(62);
  // A = 0, b = 0: identical to the zonotope reduction on G
  const Zonotoped z = oracle::random_zonotope(gen, 2, 12);
  const ConstrainedZonotoped cz(z.c, z.G, MatrixXd::Zero(1, 12), VectorXd::Zero(1));
  const ConstrainedZonotoped rc = reduce_order_cons(cz, 2, 6);
  CHECK(rc.num_constraints() == 0);
  const Zonotoped rz = reduce_order(z, 2);
  for (int k = 0; k < 100; ++k) {
    const VectorXd d = oracle::random_direction(gen, 2);
    REQUIRE(support(rc, d) == doctest::Approx(support(rz, d)).epsilon(1e-9));
  }

  const ConstrainedZonotoped within(z.c, z.G.leftCols(3), MatrixXd::Ones(1, 3), VectorXd::Constant(1, 0.2));
  const ConstrainedZonotoped same = reduce_order_cons(within, 5, 6);
  CHECK(same.G == within.G);
  CHECK(same.A == within.A);
  CHECK(same.b == within.b);
}

TEST_CASE("constraint elimination encloses the set") {
  // 1-D: x = β1 + β2, β1 - β2 = 1 → x ∈ [-1, 1] requires β1 ∈ [0, 1]
  const ConstrainedZonotoped seg(VectorXd::Zero(1), MatrixXd::Ones(1, 2), (MatrixXd(1, 2) << 1, -1).finished(),
                                 VectorXd::Ones(1));
  const ConstrainedZonotoped e = eliminate_constraint(seg);
  CHECK(e.num_constraints() == 0);
  CHECK(e.num_generators() == 1);
  const Box<double> hull = interval_hull(e);
  CHECK(hull.lower(0) <= -1 + 1e-12);
  CHECK(hull.upper(0) >= 1 - 1e-12);

  std::mt19937_64 gen(63);
  for (int trial = 0; trial < 10; ++trial) {
    const Zonotoped z = oracle::random_zonotope(gen, 2, 4);
    const std::vector<Stripd> strips = oracle::random_strips_through(gen, z, 4);
    const ConstrainedZonotoped c =
        intersect_conszono_strips(ConstrainedZonotoped(z), strips, compute_lambda(z, strips));
    const ConstrainedZonotoped r = reduce_order_cons(c, 2, 1);
    CHECK(r.num_constraints() <= 1);
    CHECK(r.num_generators() <= (2 + r.num_constraints()) * 2);
    int members = 0;
    for (int i = 0; i < 20000 && members < 100; ++i) {
      const VectorXd x = z.c + z.G * oracle::random_vector(gen, 4);
      bool in = true;
      for (const auto& s : strips) in = in && s.contains(x);
      if (!in) continue;
      ++members;
      REQUIRE(contains(r, x));
    }
    for (int k = 0; k < 50; ++k) {
      const VectorXd d = oracle::random_direction(gen, 2);
      REQUIRE(support(r, d) >= support(c, d) - 1e-9);
    }
  }
}

TEST_CASE("time updates") {
  std::mt19937_64 gen(64);
  const Zonotoped z = oracle::random_zonotope(gen, 3, 4);
  const SystemModeld ident(MatrixXd::Identity(3, 3), MatrixXd::Zero(3, 0));
  const Zonotoped same = time_update(z, ident, 5);
  CHECK(same.c == z.c);
  CHECK(same.G == z.G);

  const SystemModeld model(oracle::random_matrix(gen, 3, 3), 0.1 * MatrixXd::Identity(3, 3));
  const Zonotoped next = time_update(z, model, 2);
  CHECK(next.num_generators() <= 6);
  for (int i = 0; i < 200; ++i) {
    const VectorXd x = model.F * (z.c + z.G * oracle::random_vector(gen, 4)) + model.Q * oracle::random_vector(gen, 3);
    REQUIRE(contains(next, x));
  }

  const ConstrainedZonotoped cz(z.c, z.G, oracle::random_matrix(gen, 1, 4), VectorXd::Constant(1, 0.1));
  const ConstrainedZonotoped cnext = time_update(cz, model, 5);
  CHECK(cnext.b == cz.b);
  CHECK(cnext.num_generators() == 7);
  CHECK(cnext.A.rightCols(3).isZero());
}
