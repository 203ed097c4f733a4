#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "oracles/random_sets.hpp"
#include "ppse/error.hpp"
#include "ppse/sets/ops.hpp"
#include "ppse/sim/bus.hpp"
#include "ppse/sim/export.hpp"
#include "ppse/sim/plant.hpp"
#include "ppse/sim/replay.hpp"
#include "ppse/sim/run.hpp"
#include "ppse/sim/scenario.hpp"
#include "test_keys.hpp"

using namespace ppse;
using namespace ppse::sim;
using Eigen::MatrixXd;
using Eigen::VectorXd;
namespace fs = std::filesystem;

namespace {

const phe::KeyPair& keys() { return test_keys::keypair512(); }

Scenario small(protocol::Variant v, int steps) {
  Scenario s = default_scenario();
  s.steps = steps;
  s.key_bits = 512;
  s.protocol.variant = v;
  return s;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string first_line(const std::string& text) { return text.substr(0, text.find('\n')); }

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("ppse_test_sim_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("plant_step") {
  std::mt19937_64 g(3);
  const VectorXd x = (VectorXd(3) << 1.0, -2.0, 0.5).finished();

  SUBCASE("Q = 0, F = I keeps the state") {
    const sets::SystemModeld model(MatrixXd::Identity(3, 3), MatrixXd::Zero(3, 3));
    CHECK(plant_step(x, model, g) == x);
  }

  SUBCASE("F = 0.9 I without noise") {
    const sets::SystemModeld model(0.9 * MatrixXd::Identity(3, 3), MatrixXd::Zero(3, 3));
    const VectorXd next = plant_step(VectorXd::Ones(3), model, g);
    CHECK((next - VectorXd::Constant(3, 0.9)).cwiseAbs().maxCoeff() <= 1e-15);
  }

  SUBCASE("noise stays in <0, Q>") {
    const MatrixXd Q = (MatrixXd(3, 4) << 0.1, 0.02, 0, 0.05, 0, 0.1, -0.03, 0, 0.01, 0, 0.1, 0.05).finished();
    const sets::SystemModeld model(MatrixXd::Identity(3, 3), Q);
    const sets::Zonotoped noise(VectorXd::Zero(3), Q);
    int outside = 0;
    for (int i = 0; i < 10000; ++i) outside += !sets::contains(noise, plant_step(x, model, g) - x);
    CHECK(outside == 0);
  }
}

TEST_CASE("measure") {
  std::mt19937_64 g(4);
  const VectorXd x = (VectorXd(2) << 0.3, -1.2).finished();

  SUBCASE("R = 0 gives y = H x") {
    const protocol::SensorModel s{(MatrixXd(1, 2) << 0.6, 0.8).finished(), VectorXd::Zero(1)};
    CHECK(measure(x, s, g)(0) == doctest::Approx(0.6 * 0.3 - 0.8 * 1.2));
  }

  SUBCASE("identity row stays within x +- R") {
    const protocol::SensorModel s{(MatrixXd(1, 2) << 1.0, 0.0).finished(), VectorXd::Constant(1, 0.25)};
    for (int i = 0; i < 1000; ++i) CHECK(std::abs(measure(x, s, g)(0) - x(0)) <= 0.25);
  }

  SUBCASE("every strip contains the state") {
    int outside = 0;
    for (int i = 0; i < 2000; ++i) {
      const protocol::SensorModel s{oracle::random_matrix(g, 2, 2), oracle::random_vector(g, 2, 0.01, 1.0)};
      const sets::Stripd strip(s.H, measure(x, s, g), s.R);
      outside += !((strip.H * x - strip.y).cwiseAbs().array() <= strip.R.array() + 1e-12).all();
    }
    CHECK(outside == 0);
  }
}

TEST_CASE("sample_box") {
  std::mt19937_64 g(5);
  const VectorXd c = VectorXd::Constant(3, 1.0);
  const VectorXd r = (VectorXd(3) << 0.5, 2.0, 0.0).finished();
  for (int i = 0; i < 500; ++i) {
    const VectorXd x = sample_box(c, r, g);
    CHECK(((x - c).cwiseAbs().array() <= r.array()).all());
  }
}

TEST_CASE("derived seeds differ per label") {
  CHECK(derive_seed(1, "plant") == derive_seed(1, "plant"));
  CHECK(derive_seed(1, "plant") != derive_seed(1, "measurement"));
  CHECK(derive_seed(1, "plant") != derive_seed(2, "plant"));
}

TEST_CASE("bus delivers in send order, including sends while draining") {
  protocol::Transcript t;
  Bus bus(&t);
  auto msg = [](int k) {
    protocol::Message m;
    m.sender = "query";
    m.receiver = "aggregator";
    m.k = k;
    return m;
  };
  bus.send(msg(1));
  bus.send(msg(2));
  std::vector<int> seen;
  bus.drain([&](const protocol::Message& m) {
    seen.push_back(m.k);
    if (m.k == 1) bus.send(msg(3));
  });
  CHECK(seen == std::vector<int>{1, 2, 3});
  CHECK(bus.empty());
  CHECK(t.entries().size() == 3);
}

TEST_CASE("scenario JSON round trip") {
  const Scenario s = default_scenario();
  const ScenarioParse back = parse_scenario(to_json(s));
  REQUIRE(back.ok());
  CHECK(to_json(*back.scenario) == to_json(s));
  CHECK(s.dim() == 3);
  CHECK(s.sensors.size() == 8);
  CHECK(s.groups.size() == 2);
  CHECK(s.steps == 100);
}

TEST_CASE("run with K = 0 is the initial set only") {
  const Scenario s = small(protocol::Variant::kP1Zono, 0);
  const RunOutput out = run(s, keys());
  REQUIRE(out.trace.size() == 1);
  const TraceRecord& r = out.trace[0];
  CHECK(r.k == 0);
  CHECK(r.set.c == s.initial_set().c);
  CHECK(r.set.G == s.initial_set().G);
  REQUIRE(r.contained);
  CHECK(*r.contained);
}

TEST_CASE("short runs of every variant") {
  for (auto v : {protocol::Variant::kP1Zono, protocol::Variant::kP1Cons, protocol::Variant::kP2Zono,
                 protocol::Variant::kP2Cons}) {
    CAPTURE(protocol::to_string(v));
    const Scenario s = small(v, 6);
    const RunOutput out = run(s, keys());
    REQUIRE(out.trace.size() == 7);
    for (std::size_t k = 0; k < out.trace.size(); ++k) {
      const TraceRecord& r = out.trace[k];
      CAPTURE(k);
      CHECK(r.k == int(k));
      REQUIRE(r.truth);
      REQUIRE(r.contained);
      CHECK(*r.contained);
      const double slack = containment_tolerance(s.frac_bits);
      CHECK((r.hull.lower.array() <= r.estimate.array() + slack).all());
      CHECK((r.estimate.array() <= r.hull.upper.array() + slack).all());
      CHECK((r.hull.lower.array() <= r.truth->array() + slack).all());
      CHECK((r.truth->array() <= r.hull.upper.array() + slack).all());
      CHECK(r.fp_error <= s.fp_tolerance);
      CHECK(std::isfinite(r.error));
    }
  }
}

TEST_CASE("CSV export") {
  const Scenario s = small(protocol::Variant::kP2Zono, 3);
  const RunOutput out = run(s, keys());

  SUBCASE("fixed headers and one bounds row per dimension") {
    std::ostringstream bounds;
    std::ostringstream error;
    std::ostringstream fp;
    write_bounds_csv(out.trace, bounds);
    write_error_csv(out.trace, error);
    write_fp_error_csv(out.trace, fp);
    CHECK(first_line(bounds.str()) == "k,dim,lower,true,upper");
    CHECK(first_line(error.str()) == "k,error");
    CHECK(first_line(fp.str()) == "k,fp_error");
    std::istringstream in(bounds.str());
    std::string line;
    int rows = -1;
    while (std::getline(in, line)) ++rows;
    CHECK(rows == 4 * 3);
  }

  SUBCASE("timing table has four rows of three entities") {
    std::vector<TimingRow> rows;
    for (auto v : {protocol::Variant::kP1Zono, protocol::Variant::kP1Cons, protocol::Variant::kP2Zono,
                   protocol::Variant::kP2Cons}) {
      rows.push_back(timing_of(v, out.trace));
    }
    std::ostringstream t;
    write_timing_csv(rows, t);
    std::istringstream in(t.str());
    std::string line;
    std::getline(in, line);
    CHECK(line == "variant,sensor_ms,aggregator_ms,query_ms");
    int n = 0;
    while (std::getline(in, line)) {
      ++n;
      CHECK(std::count(line.begin(), line.end(), ',') == 3);
    }
    CHECK(n == 4);
  }

  SUBCASE("empty trace is rejected") {
    CHECK_THROWS_AS(export_trace({}, scratch("empty")), ContractViolation);
  }

  SUBCASE("files read back") {
    const fs::path dir = scratch("readback");
    export_trace(out.trace, dir);
    const TraceFiles files = load_trace(dir);
    const TraceSummary sum = summarize(files);
    CHECK(sum.steps == 3);
    CHECK(sum.checked == 3);
    CHECK(sum.contained == 3);
    CHECK(sum.max_fp_error <= s.fp_tolerance);
    const Tightness self = compare_widths(files, files);
    CHECK(self.holds);
    CHECK(self.compared == 4 * 3);
    fs::remove_all(dir);
  }
}

TEST_CASE("identical seeds give identical CSV bytes") {
  const Scenario s = small(protocol::Variant::kP1Cons, 4);
  const fs::path a = scratch("repro_a");
  const fs::path b = scratch("repro_b");
  export_trace(run(s, keys()).trace, a);
  export_trace(run(s, keys()).trace, b);
  for (const char* f : {"bounds.csv", "error.csv", "fp_error.csv", "containment.csv"}) {
    CAPTURE(f);
    CHECK(slurp(a / f) == slurp(b / f));
    CHECK_FALSE(slurp(a / f).empty());
  }
  Scenario other = s;
  other.seed = s.seed + 1;
  const fs::path c = scratch("repro_c");
  export_trace(run(other, keys()).trace, c);
  CHECK(slurp(a / "bounds.csv") != slurp(c / "bounds.csv"));
  for (const auto& d : {a, b, c}) fs::remove_all(d);
}

TEST_CASE("replay CSV") {
  const fs::path dir = scratch("replay");
  const fs::path file = dir / "log.csv";
  auto write = [&](const std::string& text) { std::ofstream(file) << text; };

  SUBCASE("parse") {
    write("k,i,y,h0,h1,h2,R\n1,0,0.5,1,0,0,0.1\n1,1,-0.25,0,1,0,0.2\n2,0,0.4,1,0,0,0.1\n");
    const ReplayLog log = read_replay_csv(file, 3);
    CHECK(log.last_step() == 2);
    REQUIRE(log.strips.at(1).size() == 2);
    const sets::Stripd& s = log.strips.at(1).at(1);
    CHECK(s.y(0) == -0.25);
    CHECK(s.R(0) == 0.2);
    CHECK(s.H(0, 1) == 1.0);
  }

  SUBCASE("malformed rows name the line") {
    write("k,i,y,h0,h1,h2,R\n1,0,0.5,1,0,0,0.1\n1,1,oops,0,1,0,0.2\n");
    try {
      read_replay_csv(file, 3);
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(std::string(e.what()).find("3") != std::string::npos);
    }
    write("k,i,y,h0,h1,h2,R\n1,0,0.5,1,0,0,0.1\n1,0,0.5,1,0,0,0.1\n");
    CHECK_THROWS_AS(read_replay_csv(file, 3), ParseError);
    write("k,i,y,h0,h1,R\n");
    CHECK_THROWS_AS(read_replay_csv(file, 3), ParseError);
    write("k,i,y,h0,h1,h2,R\n1,0,0.5,1,0,0,-0.1\n");
    CHECK_THROWS_AS(read_replay_csv(file, 3), ParseError);
  }

  SUBCASE("every sensor must report at every step") {
    Scenario s = small(protocol::Variant::kP1Zono, 2);
    write("k,i,y,h0,h1,h2,R\n1,0,0.5,1,0,0,0.1\n");
    const std::vector<std::string> missing = check_replay(read_replay_csv(file, 3), s);
    CHECK(missing.size() == 7);
  }

  SUBCASE("replayed run has no truth") {
    Scenario s = small(protocol::Variant::kP1Zono, 2);
    s.sensors.resize(2);
    s.groups = {{0}, {1}};
    write("k,i,y,h0,h1,h2,R\n1,0,0.5,1,0,0,0.3\n1,1,-0.5,0,1,0,0.3\n2,0,0.45,1,0,0,0.3\n2,1,-0.4,0,1,0,0.3\n");
    const RunOutput out = replay(s, keys(), read_replay_csv(file, 3));
    REQUIRE(out.trace.size() == 3);
    for (const auto& r : out.trace) {
      CHECK_FALSE(r.truth);
      CHECK_FALSE(r.contained);
    }
    CHECK(out.trace[2].hull.upper(0) - out.trace[2].hull.lower(0) < 1.0);
    std::ostringstream bounds;
    write_bounds_csv(out.trace, bounds);
    CHECK(bounds.str().find("1,0,") != std::string::npos);
    CHECK(bounds.str().find(",,") != std::string::npos);
  }
  fs::remove_all(dir);
}
