#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "traffic/analysis.hpp"
#include "traffic/model.hpp"
#include "traffic/sde.hpp"

using namespace traffic;

namespace {

Scenario reference_scenario(double n_total = 150.0, double sigma = 1.0) {
  ModelParams p;
  p.sigma = sigma;
  return Scenario(p, n_total);
}

SimConfig default_sim(std::uint64_t seed = 1) {
  SimConfig cfg;
  cfg.master_seed = seed;
  return cfg;  // t_end = 30, 30000 steps
}

}  // namespace

TEST_CASE("drift and diffusion coefficients") {
  const Scenario sc = reference_scenario();
  CHECK(drift(sc, 0.0) == 0.0);
  CHECK(drift(sc, congestion_attractor(sc)) ==
        doctest::Approx(0.0).scale(100.0).epsilon(1e-12));
  CHECK(drift(sc, 50.0) == doctest::Approx(250.0).epsilon(1e-13));

  CHECK(diffusion(sc, 0.0) == 0.0);
  CHECK(diffusion(sc, 150.0) == 0.0);
  CHECK(diffusion(sc, 75.0) == doctest::Approx(112.5).epsilon(1e-13));
}

TEST_CASE("zero-noise Euler path lands on the closed form") {
  const Scenario sc = reference_scenario(150.0, 0.0);
  const Path path = simulate_path(sc, default_sim(), 1.0);
  const double exact = deterministic_trajectory(sc, 1.0, 30.0);
  CHECK(std::abs(path.values.back() - exact) < 1e-3);
  CHECK(path.clamp_count == 0);
}

TEST_CASE("zero-noise scheme is first order along the transient") {
  // The attractor is exponentially contracting, so by t = 30 the final
  // value carries no truncation error; the dt-scaling shows up in the
  // worst-case error along the path instead.
  const Scenario sc = reference_scenario(150.0, 0.0);
  auto sup_error = [&](std::size_t steps) {
    SimConfig cfg = default_sim();
    cfg.n_steps = steps;
    const Path path = simulate_path(sc, cfg, 1.0);
    double worst = 0.0;
    for (std::size_t i = 0; i < path.values.size(); ++i) {
      worst = std::max(worst, std::abs(path.values[i] -
                                       deterministic_trajectory(
                                           sc, 1.0, path.times[i])));
    }
    return worst;
  };
  const double e1 = sup_error(30000);
  const double e2 = sup_error(60000);
  CHECK(e1 / e2 > 1.5);
  CHECK(e1 / e2 < 2.5);
}

TEST_CASE("milstein correction stays consistent with the dynamics") {
  const Scenario sc = reference_scenario();
  SimConfig cfg = default_sim(77);
  cfg.scheme = Scheme::Milstein;
  const Path path = simulate_path(sc, cfg, 100.0);
  CHECK(path.values.back() > 0.0);
  CHECK(path.values.back() < 150.0);
  // sigma = 0 reduces Milstein to Euler exactly.
  const Scenario det = reference_scenario(150.0, 0.0);
  SimConfig euler = default_sim(77);
  const Path a = simulate_path(det, euler, 1.0);
  euler.scheme = Scheme::Milstein;
  const Path b = simulate_path(det, euler, 1.0);
  for (std::size_t i = 0; i < a.values.size(); i += 1000) {
    CHECK(a.values[i] == b.values[i]);
  }
}

TEST_CASE("paths are bit-identical across reruns") {
  const Scenario sc = reference_scenario();
  const Path a = simulate_path(sc, default_sim(99), 10.0, 5);
  const Path b = simulate_path(sc, default_sim(99), 10.0, 5);
  REQUIRE(a.values.size() == b.values.size());
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    CHECK(a.values[i] == b.values[i]);
  }
  CHECK(a.seed == b.seed);

  const Path c = simulate_path(sc, default_sim(99), 10.0, 6);
  CHECK(c.values.back() != a.values.back());
}

TEST_CASE("grid layout: endpoints and uniform spacing") {
  const Scenario sc = reference_scenario();
  SimConfig cfg = default_sim();
  cfg.t_end = 12.5;
  cfg.n_steps = 250;
  const Path p = simulate_path(sc, cfg, 10.0);
  REQUIRE(p.times.size() == 251);
  CHECK(p.times.front() == 0.0);
  CHECK(p.times.back() == 12.5);
  const double dt = cfg.dt();
  for (std::size_t i = 1; i < p.times.size(); ++i) {
    CHECK(p.times[i] - p.times[i - 1] == doctest::Approx(dt).epsilon(1e-12));
  }
}

TEST_CASE("ensemble: fixed start with zero noise gives identical paths") {
  const Scenario sc = reference_scenario(150.0, 0.0);
  const auto paths = simulate_ensemble(sc, default_sim(5), 20,
                                       InitPolicy::fixed(10.0), 4);
  REQUIRE(paths.size() == 20);
  for (const Path& p : paths) {
    CHECK(p.values.back() == paths[0].values.back());
    CHECK(p.values[1] == paths[0].values[1]);
  }
}

TEST_CASE("ensemble: scheduling independence and per-path streams") {
  const Scenario sc = reference_scenario();
  SimConfig cfg = default_sim(1234);
  cfg.n_steps = 3000;  // cheap
  cfg.t_end = 3.0;
  const auto serial = simulate_ensemble(sc, cfg, 16, sc.init_policy(), 1);
  const auto wide = simulate_ensemble(sc, cfg, 16, sc.init_policy(), 8);
  REQUIRE(serial.size() == wide.size());
  for (std::size_t i = 0; i < serial.size(); ++i) {
    CHECK(serial[i].seed == wide[i].seed);
    REQUIRE(serial[i].values.size() == wide[i].values.size());
    for (std::size_t j = 0; j < serial[i].values.size(); j += 97) {
      CHECK(serial[i].values[j] == wide[i].values[j]);
    }
  }
  // Growing the ensemble leaves existing paths untouched.
  const auto bigger = simulate_ensemble(sc, cfg, 24, sc.init_policy(), 8);
  for (std::size_t i = 0; i < serial.size(); ++i) {
    CHECK(bigger[i].values.back() == serial[i].values.back());
  }
}

TEST_CASE("paths remain strictly inside (0, N) with a clean clamp audit") {
  const Scenario sc = reference_scenario();
  SimConfig cfg = default_sim(31);
  std::size_t clamped = 0, total = 0;
  const auto paths = simulate_ensemble(sc, cfg, 34, sc.init_policy(), 4);
  for (const Path& p : paths) {
    for (double v : p.values) {
      CHECK(v > 0.0);
      CHECK(v < 150.0);
    }
    clamped += p.clamp_count;
    total += p.values.size() - 1;
  }
  CHECK(total >= 1000000);  // 34 paths x 30000 steps
  CHECK(static_cast<double>(clamped) / static_cast<double>(total) < 1e-3);
}

TEST_CASE("weak consistency: ensemble mean approaches the stationary mean") {
  const Scenario sc = reference_scenario();
  const auto paths = simulate_ensemble(sc, default_sim(2025), 1000,
                                       sc.init_policy(), 8);
  double sum = 0.0, sum2 = 0.0;
  for (const Path& p : paths) {
    const double v = p.values.back();
    sum += v;
    sum2 += v * v;
  }
  const double mean = sum / 1000.0;
  const double sd = std::sqrt((sum2 / 1000.0 - mean * mean) * 1000.0 / 999.0);
  const double mu = stationary_moments(sc).mu;
  CHECK(std::abs(mean - mu) < 3.0 * sd / std::sqrt(1000.0));
}

TEST_CASE("free-flow decay rate honors the stability bound") {
  // sigma small keeps the martingale term well inside the 0.1 slack.
  ModelParams p;
  p.sigma = 0.2;
  const Scenario sc(p, 40.0);
  const double bound = (thresholds(sc).r0s - 1.0) * p.c1 + 0.1;
  const auto paths = simulate_ensemble(sc, default_sim(77), 100,
                                       sc.init_policy(), 8);
  int ok = 0;
  for (const Path& path : paths) {
    const double rate = std::log(path.values.back()) / 30.0;
    ok += (rate <= bound) ? 1 : 0;
  }
  CHECK(ok >= 95);
}

TEST_CASE("input validation") {
  const Scenario sc = reference_scenario();
  CHECK_THROWS_AS(simulate_path(sc, default_sim(), 0.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(simulate_path(sc, default_sim(), 150.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(simulate_path(sc, default_sim(), std::nan("")),
                  std::invalid_argument);

  SimConfig bad = default_sim();
  bad.t_end = 0.0;
  CHECK_THROWS_AS(simulate_path(sc, bad, 1.0), std::invalid_argument);
  bad = default_sim();
  bad.boundary_epsilon = 80.0;  // >= N/2
  CHECK_THROWS_AS(simulate_path(sc, bad, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(
      simulate_ensemble(sc, default_sim(), 0, sc.init_policy(), 1),
      std::invalid_argument);
}
