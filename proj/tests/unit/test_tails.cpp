#include <doctest.h>

#include <cmath>
#include <map>
#include <numbers>
#include <vector>

#include "bpire/chain_sim.hpp"
#include "bpire/errors.hpp"
#include "bpire/extremes.hpp"
#include "bpire/rng.hpp"
#include "bpire/stats.hpp"
#include "bpire/tail_analysis.hpp"

using namespace bpire;

namespace {

// Exact Pareto: P(X > x) = x^-alpha for x >= 1.
std::vector<double> pareto(std::size_t n, double alpha, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> out(n);
  for (auto& x : out) x = std::pow(rng.uniform(), -1.0 / alpha);
  return out;
}

}  // namespace

TEST_CASE("Hill recovers a Pareto index") {
  const auto x = pareto(100000, 2.0, 1);
  const auto h = hill_estimator(x, 1000);
  CHECK(h.k == 1000);
  CHECK(std::abs(h.kappa_hat - 2.0) < 3 * h.std_err);
  CHECK(h.std_err == doctest::Approx(2.0 / std::sqrt(1000.0)).epsilon(0.1));
}

TEST_CASE("Hill is scale invariant") {
  auto x = pareto(20000, 1.3, 2);
  const double before = hill_estimator(x, 400).kappa_hat;
  for (auto& v : x) v *= 37.5;
  CHECK(hill_estimator(x, 400).kappa_hat == doctest::Approx(before).epsilon(1e-12));
}

TEST_CASE("Hill failure modes") {
  const std::vector<double> flat(100, 4.0);
  CHECK_THROWS_AS(hill_estimator(flat, 10), DegenerateTail);
  const std::vector<double> few{1, 2, 3};
  CHECK_THROWS_AS(hill_estimator(few, 3), DomainError);
}

TEST_CASE("plateau on an exact power tail") {
  const auto x = pareto(400000, 2.0, 3);
  const auto p = tail_plateau(x, 2.0, 2.0, 20.0);
  CHECK(p.plateau_C == doctest::Approx(1.0).epsilon(0.05));
  PlateauOptions lattice;
  lattice.lattice_factor = 2.0;
  const auto q = tail_plateau(x, 2.0, 2.0, 20.0, lattice);
  // Whole periods only: 2 * 2^3 = 16 <= 20.
  CHECK(q.x_high == doctest::Approx(16.0));
  CHECK(q.plateau_C == doctest::Approx(1.0).epsilon(0.05));
  CHECK_THROWS_AS(tail_plateau(x, 2.0, 2.0, 1e4), InsufficientExceedances);
}

TEST_CASE("Goldie numerator equals E B when kappa = 1") {
  // E[theta o X + B - m X] = E B = 1 for immigration identically 1.
  const auto model = preset_model("ENV-B");
  const auto batch = sample_stationary(model, 235, 100000, 4);
  const auto g = goldie_C_formula(model, 1.0, batch.values, 5);
  CHECK(std::abs(g.numerator - 1.0) < 4 * g.numerator_std_err);
  CHECK(g.lambda_prime == doctest::Approx(std::numbers::ln2 / 3));
  const auto again = goldie_C_formula(model, 1.0, batch.values, 5, 3);
  CHECK(again.C == g.C);
}

TEST_CASE("reference ratio laws") {
  const auto model = preset_model("ENV-A");
  const auto fwd = reference_ratio_law(model, 2.0, 1);
  REQUIRE(fwd.size() == 2);
  CHECK(fwd[0].value == doctest::Approx(0.5));
  CHECK(fwd[0].prob == doctest::Approx(0.8));
  const auto bwd = reference_ratio_law(model, 2.0, -1);
  REQUIRE(bwd.size() == 2);
  CHECK(bwd[1].value == doctest::Approx(2.0));
  CHECK(bwd[1].prob == doctest::Approx(0.2));

  // Lag 2 is the multiplicative self-convolution of lag 1.
  for (int sign : {1, -1}) {
    const auto one = reference_ratio_law(model, 2.0, sign);
    const auto two = reference_ratio_law(model, 2.0, 2 * sign);
    std::map<long, double> conv;
    for (const auto& a : one)
      for (const auto& b : one) conv[std::lround(std::log2(a.value * b.value))] += a.prob * b.prob;
    REQUIRE(two.size() == conv.size());
    for (const auto& atom : two) CHECK(atom.prob == doctest::Approx(conv.at(std::lround(std::log2(atom.value)))));
  }
}

TEST_CASE("spectral test needs enough exceedances") {
  const auto model = preset_model("ENV-A");
  ChainConfig cfg{model, 0, 62, 8};
  std::vector<std::vector<std::uint64_t>> paths{simulate_forward(cfg, 20000).values};
  CHECK_THROWS_AS(spectral_ratio_test(model, 2.0, 1, paths, 0.999), TooFewExceedances);
}

TEST_CASE("anticlustering and blocks on a synthetic path") {
  // Pairs of adjacent spikes every 100 steps: clusters of size 2.
  std::vector<std::uint64_t> path(20000, 1);
  for (std::size_t j = 50; j + 1 < path.size(); j += 100) {
    path[j] = 500;
    path[j + 1] = 400;
  }
  std::vector<std::vector<std::uint64_t>> paths{path};
  const auto th = theta_blocks(paths, 50, 0.97);
  CHECK(th.value == doctest::Approx(0.5));
  CHECK(th.exceedances == 400);

  const std::size_t ks[] = {1, 2, 60, 200};
  const auto rep = anticlustering_diagnostic(1.0, ks, 100, paths);
  CHECK(rep.probability[0] == doctest::Approx(1.0));
  // The next pair is 99 or 100 steps away.
  CHECK(rep.probability[1] == doctest::Approx(1.0));
  CHECK(rep.probability[2] == doctest::Approx(1.0));
  CHECK(rep.probability[3] == 0.0);
  CHECK(pooled_quantile(paths, 0.5) == 1.0);
}
