#include <doctest.h>

#include <cmath>
#include <sstream>
#include <string>

#include "oracles.hpp"
#include "sdeid/gallery.hpp"
#include "sdeid/observe.hpp"

using namespace sdeid;

namespace {

// 0.5 (1 - e^{-0.05}): OU mean at t = 0.05 from x = 0 (theta = 1, mu = 0.5).
constexpr double kOuMeanAt005 = 0.024385287749642993;

PdeSource pde(const SdeModel& model) { return {model, Grid1D::reference(model), {}}; }

ObservationConfig lattice(ObservationKind kind, int k = 1) {
  ObservationConfig c;
  c.kind = kind;
  c.k = k;
  return c;
}

}  // namespace

TEST_CASE("frozen OU value agrees with the oracles") {
  CHECK(oracle::ou_mean(1, 0.5, 0, 0.05) == doctest::Approx(kOuMeanAt005).epsilon(1e-15));
  CHECK(oracle::ou_mean_ode(1, 0.5, 0, 0.05) == doctest::Approx(kOuMeanAt005).epsilon(1e-12));
}

TEST_CASE("lattice layout") {
  ObservationConfig c;
  const auto ts = c.times();
  REQUIRE(ts.size() == 20);
  CHECK(ts.front() == doctest::Approx(0.005));
  CHECK(ts.back() == 0.1);
  const auto xs = c.xs();
  REQUIRE(xs.size() == 20);
  CHECK(xs.front() == doctest::Approx(-0.475));
  CHECK(xs.back() == doctest::Approx(0.475));

  c.kind = ObservationKind::pointwise;
  c.x0 = 0.3;
  CHECK(c.xs() == std::vector<double>{0.3});

  CHECK(parse_observation_kind("O_v") == ObservationKind::variance);
  CHECK(to_string(ObservationKind::pointwise) == "O_prime");
  CHECK_THROWS_AS(parse_observation_kind("O_x"), UsageError);

  ObservationConfig bad;
  bad.epsilon = 0;
  CHECK_THROWS_AS(bad.check(), UsageError);
  bad = {};
  bad.omega = {0.5, 0.5};
  CHECK_THROWS_AS(bad.check(), UsageError);
  bad = {};
  bad.n_t = 0;
  CHECK_THROWS_AS(bad.check(), UsageError);
}

TEST_CASE("martingale: b = 0 keeps E^x[X_t] = x") {
  const ObservationSet set = extract(pde(brownian(1.0)), lattice(ObservationKind::moment, 1));
  REQUIRE(set.samples.size() == 400);
  for (const auto& s : set.samples) {
    CHECK(s.t > 0);
    CHECK(std::abs(s.value - s.x) <= 1e-8);
  }
  CHECK(set.f_label == "s");
  CHECK(set.source == SourceKind::pde);
}

TEST_CASE("OU mean sample") {
  ObservationConfig c = lattice(ObservationKind::moment, 1);
  c.n_x = 21;  // puts a cell centre at x = 0
  const ObservationSet set = extract(pde(ornstein_uhlenbeck(1, 0.5, 0.2)), c);
  const auto& s = set.samples[9 * 21 + 10];
  REQUIRE(s.t == doctest::Approx(0.05));
  REQUIRE(std::abs(s.x) < 1e-15);
  CHECK(std::abs(s.value - kOuMeanAt005) <= 1e-4);
  for (const auto& sample : set.samples) {
    CHECK(std::abs(sample.value - oracle::ou_mean(1, 0.5, sample.x, sample.t)) <= 1e-4);
  }
}

TEST_CASE("variance observations") {
  for (const auto& sample : extract(pde(brownian(1.0)), lattice(ObservationKind::variance)).samples) {
    CHECK(std::abs(sample.value - sample.t) <= 1e-4);
  }
  const ObservationSet ou = extract(pde(ornstein_uhlenbeck()), lattice(ObservationKind::variance));
  CHECK(ou.f_label == "var");
  for (const auto& sample : ou.samples) {
    CHECK(std::abs(sample.value - oracle::ou_variance(1, 0.2, sample.t)) <= 1e-4);
  }
}

TEST_CASE("pointwise value and derivative") {
  ObservationConfig c = lattice(ObservationKind::pointwise);
  c.x0 = 0.2;
  const SdeModel ou = ornstein_uhlenbeck();
  const ObservationSet set = extract(pde(ou), c, Observable::monomial(1));
  REQUIRE(set.samples.size() == 40);
  for (std::size_t i = 0; i < set.samples.size(); i += 2) {
    const auto& v = set.samples[i];
    const auto& d = set.samples[i + 1];
    CHECK_FALSE(v.derivative);
    CHECK(d.derivative);
    CHECK(std::abs(v.value - oracle::ou_mean(1, 0.5, 0.2, v.t)) <= 1e-4);
    CHECK(std::abs(d.value - std::exp(-v.t)) <= 1e-4);
  }

  McSource mc{ou, 2000, 5};
  const ObservationSet noisy = extract(mc, c, Observable::monomial(1));
  REQUIRE(noisy.samples.size() == 40);
  for (std::size_t i = 1; i < noisy.samples.size(); i += 2) {
    CHECK(std::abs(noisy.samples[i].value - std::exp(-noisy.samples[i].t)) <= 4 * noisy.samples[i].std_error + 1e-3);
  }

  ObservationConfig outside = c;
  outside.x0 = 4.0;
  CHECK_THROWS_AS(extract(pde(ou), outside), UsageError);
}

TEST_CASE("coverage errors") {
  ObservationConfig c;
  c.epsilon = 0.2;
  CHECK_THROWS_AS(extract(pde(ornstein_uhlenbeck()), c), UsageError);
  c = {};
  c.omega = {3.5, 4.5};
  CHECK_THROWS_AS(extract(pde(ornstein_uhlenbeck()), c), UsageError);
  CHECK_THROWS_AS(extract(McSource{ornstein_uhlenbeck(), 10, 1}, c), UsageError);

  const SolutionField s1 = solve_fk(brownian(), Observable::monomial(1), Grid1D::reference(brownian()));
  CHECK_THROWS_AS(extract_from_fields(s1, lattice(ObservationKind::variance)), UsageError);
  CHECK_THROWS_AS(extract_from_fields(s1, lattice(ObservationKind::moment, 2)), UsageError);
}

TEST_CASE("distance") {
  const ObservationConfig c = lattice(ObservationKind::moment, 1);
  const ObservationSet a = extract(pde(ornstein_uhlenbeck()), c);
  CHECK(distance(a, a) == 0.0);
  const ObservationSet again = extract(pde(ornstein_uhlenbeck()), c);
  CHECK(distance(a, again) <= 1e-12);

  const ObservationSet faster = extract(pde(ornstein_uhlenbeck(1.2, 0.5, 0.2)), c);
  CHECK(distance(a, faster) > 10 * kPdeTolerance);

  ObservationConfig other = c;
  other.n_x = 10;
  CHECK_THROWS_AS(distance(a, extract(pde(ornstein_uhlenbeck()), other)), UsageError);
  CHECK_THROWS_AS(distance(a, extract(pde(ornstein_uhlenbeck()), lattice(ObservationKind::moment, 2))), UsageError);
}

TEST_CASE("Monte Carlo observations across seeds") {
  ObservationConfig c;
  c.n_t = 5;
  c.n_x = 5;
  const SdeModel ou = ornstein_uhlenbeck();
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    CAPTURE(seed);
    const ObservationSet a = extract(McSource{ou, 4000, seed}, c);
    const ObservationSet b = extract(McSource{ou, 4000, seed + 100}, c);
    double max_stderr = 0;
    for (std::size_t i = 0; i < a.samples.size(); ++i) {
      max_stderr = std::max({max_stderr, a.samples[i].std_error, b.samples[i].std_error});
    }
    CHECK(a.source == SourceKind::monte_carlo);
    CHECK(distance(a, b) <= 8 * max_stderr);
  }

  McSource threaded{ou, 4000, 9};
  threaded.options.threads = 3;
  CHECK(distance(extract(McSource{ou, 4000, 9}, c), extract(threaded, c)) == 0.0);

  const ObservationSet v = extract(McSource{ou, 20000, 3}, lattice(ObservationKind::variance));
  for (const auto& s : v.samples) {
    CHECK(std::abs(s.value - oracle::ou_variance(1, 0.2, s.t)) <= 4 * s.std_error + 1e-4);
  }
}

TEST_CASE("observation CSV") {
  ObservationConfig c;
  c.n_t = 2;
  c.n_x = 3;
  std::ostringstream os;
  write_observations_csv(os, extract(pde(brownian()), c));
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  CHECK(line == "kind,f,t,x,value,stderr,derivative_flag");
  int rows = 0;
  while (std::getline(is, line)) ++rows;
  CHECK(rows == 6);
  CHECK(os.str().find("O_k,s,0.05,") != std::string::npos);
}
