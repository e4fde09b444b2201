#include <doctest.h>

#include <numeric>

#include "bpire/cramer.hpp"
#include "bpire/errors.hpp"
#include "bpire/rwre.hpp"
#include "bpire/stats.hpp"

using namespace bpire;

TEST_CASE("site model validation") {
  CHECK_THROWS_AS(RwreModel({1.2, 0.3}, {0.5, 0.5}), ValidationError);
  CHECK_THROWS_AS(RwreModel({0.5, 0.3}, {0.5, 0.6}), ValidationError);
  // Drift to the left is not transient to the right.
  CHECK_THROWS_AS(RwreModel({0.3}, {1.0}), ValidationError);
  const auto k2 = preset_sites("RW-K2");
  CHECK(k2.drift_exponent() < 0);
  CHECK_FALSE(k2.reflect_at_origin());
  CHECK(k2.reflected().reflect_at_origin());
}

TEST_CASE("ratio models have the advertised kappa") {
  CHECK(solve_kappa(derive_ratio_model(preset_sites("RW-K2"))).kappa == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(solve_kappa(derive_ratio_model(preset_sites("RW-K1"))).kappa == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(solve_kappa(derive_ratio_model(preset_sites("RW-KHALF"))).kappa == doctest::Approx(0.5).epsilon(1e-10));
  const auto forced = forced_right_atom();
  CHECK(forced.offspring.mean() == 0.0);
  CHECK(forced.immigration.mean() == 1.0);
}

TEST_CASE("site draws land in the support") {
  const auto k2 = preset_sites("RW-K2");
  int low = 0;
  for (std::uint64_t b = 0; b < 10000; ++b) {
    const double xi = k2.site_from_bits(splitmix64(b));
    REQUIRE((xi == k2.site_values()[0] || xi == k2.site_values()[1]));
    low += xi == k2.site_values()[0];
  }
  CHECK(low / 10000.0 == doctest::Approx(k2.probs()[0]).epsilon(0.03));
}

TEST_CASE("hitting-time bookkeeping") {
  const auto sites = preset_sites("RW-K2");
  for (auto engine : {WalkEngine::kStepwise, WalkEngine::kCrossingCounts}) {
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
      WalkOptions opt;
      opt.engine = engine;
      const auto run = simulate_walk(sites, 40, seed, opt);
      CHECK(run.hitting_time % 2 == 0);
      CHECK(run.hitting_time == 40 + 2 * run.left_crossings);
      CHECK(std::accumulate(run.crossings.begin(), run.crossings.end(), std::uint64_t{0}) == run.hitting_time);
    }
  }
}

TEST_CASE("reflection shortens a coupled walk") {
  const auto free_sites = preset_sites("RW-K1");
  const auto refl = free_sites.reflected();
  for (std::uint64_t seed = 1; seed <= 200; ++seed) {
    const auto a = simulate_walk(free_sites, 30, seed);
    const auto b = simulate_walk(refl, 30, seed);
    CHECK(b.hitting_time <= a.hitting_time);
    CHECK(b.left_of_origin_crossings == 0);
  }
}

TEST_CASE("walks are reproducible") {
  const auto sites = preset_sites("RW-KHALF");
  CHECK(simulate_walk(sites, 25, 9).hitting_time == simulate_walk(sites, 25, 9).hitting_time);
  CHECK(simulate_position(sites, 5000, 4) == simulate_position(sites, 5000, 4));
  WalkOptions tight;
  tight.step_budget = 10;
  CHECK_THROWS_AS(simulate_walk(sites, 1000, 1, tight), StepBudgetExceeded);
}

TEST_CASE("engines agree in law") {
  const auto sites = preset_sites("RW-K2").reflected();
  std::vector<double> stepwise, counts;
  WalkOptions c;
  c.engine = WalkEngine::kCrossingCounts;
  for (std::uint64_t r = 0; r < 3000; ++r) {
    stepwise.push_back(double(simulate_walk(sites, 50, derive_seed(1, StreamKind::kWalk, r)).hitting_time));
    counts.push_back(double(simulate_walk(sites, 50, derive_seed(2, StreamKind::kWalk, r), c).hitting_time));
  }
  CHECK(stats::ks_two_sample(stepwise, counts) < stats::ks_critical_two_sample(0.01, 3000, 3000));
}

TEST_CASE("L-chain") {
  const auto ratio = derive_ratio_model(preset_sites("RW-K2"));
  Rng rng(4);
  const auto run = simulate_L_chain(ratio, 20, rng);
  REQUIRE(run.values.size() == 20);
  CHECK(run.values[0] == 1);
  std::int64_t s = 0;
  for (auto v : run.values) s += static_cast<std::int64_t>(v);
  CHECK(run.sum2_l_minus_n == 2 * s - 20);
  const auto forced = forced_right_atom();
  Rng rng2(4);
  const auto bounded = simulate_L_chain(ratio, 20, rng2, &forced);
  CHECK(bounded.boundary_value == 1);
  CHECK(bounded.sum2_l_minus_n == 2 * s - 20);
}

TEST_CASE("walk and L-chain hitting times agree") {
  const auto rep = hitting_time_equivalence(preset_sites("RW-K2").reflected(), 30, 3000, 17);
  CHECK(rep.pass);
  CHECK(rep.ks_distance < rep.critical_value_1pct);
}

TEST_CASE("limit experiments reject kappa near 2") {
  const std::uint64_t grid[] = {10, 20};
  CHECK_THROWS_AS(hitting_time_limits(preset_sites("RW-K2"), 2.0, 1.0, grid, 10, 1), RegimeMismatch);
}
