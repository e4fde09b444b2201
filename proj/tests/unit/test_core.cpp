#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "bpire/cramer.hpp"
#include "bpire/env_model.hpp"
#include "bpire/errors.hpp"
#include "bpire/rng.hpp"
#include "bpire/stats.hpp"

using namespace bpire;

TEST_CASE("streams are reproducible and distinct") {
  Rng a(42, StreamKind::kWalk, 7), b(42, StreamKind::kWalk, 7), c(42, StreamKind::kWalk, 8);
  const auto x = a();
  CHECK(x == b());
  CHECK(x != c());
  CHECK(derive_seed(1, StreamKind::kGoldie, 0) != derive_seed(1, StreamKind::kThetaDirect, 0));
  for (int i = 0; i < 1000; ++i) {
    const double u = a.uniform();
    REQUIRE(u > 0.0);
    REQUIRE(u < 1.0);
  }
}

TEST_CASE("sampler moments") {
  Rng rng(2024);
  const int n = 200000;
  double s1 = 0, s2 = 0;
  for (int i = 0; i < n; ++i) {
    const double g = static_cast<double>(sample_geometric(rng, 0.25));
    s1 += g;
    s2 += g * g;
  }
  const double mean = s1 / n, var = s2 / n - mean * mean;
  CHECK(mean == doctest::Approx(3.0).epsilon(0.02));   // (1-p)/p
  CHECK(var == doctest::Approx(12.0).epsilon(0.04));   // (1-p)/p^2

  double p1 = 0;
  for (int i = 0; i < n; ++i) p1 += sample_poisson(rng, 1e12);
  CHECK(p1 / n == doctest::Approx(1e12).epsilon(1e-6));

  double nb = 0;
  for (int i = 0; i < n; ++i) nb += sample_negative_binomial(rng, 40.0, 0.8);
  CHECK(nb / n == doctest::Approx(10.0).epsilon(0.02));
}

TEST_CASE("progeny sums for geometric offspring") {
  const auto model = preset_model("ENV-A");
  Rng rng(3);
  for (std::uint64_t count : {1ULL, 5ULL, 40ULL, 100000ULL}) {
    // Geometric(2/3): mean 1/2, variance 3/4 per individual.
    const auto& atom = model.atom(0);
    const int n = 40000;
    double s1 = 0, s2 = 0;
    for (int i = 0; i < n; ++i) {
      const double v = static_cast<double>(sample_progeny_sum(atom, count, rng));
      s1 += v;
      s2 += v * v;
    }
    const double c = static_cast<double>(count);
    const double mean = s1 / n, var = s2 / n - mean * mean;
    CHECK(mean == doctest::Approx(0.5 * c).epsilon(4 * std::sqrt(0.75 * c / n) / (0.5 * c)));
    CHECK(var == doctest::Approx(0.75 * c).epsilon(0.06));
  }
}

TEST_CASE("finite laws and the summation cap") {
  EnvironmentAtom atom{CountLaw::finite({0.5, 0.25, 0.25}), CountLaw::deterministic(1)};
  Rng rng(9);
  CHECK_THROWS_AS(sample_progeny_sum(atom, 1000, rng, 100), SummationCapExceeded);
  CHECK(sample_progeny_sum(atom, 0, rng) == 0);
  CHECK(atom.offspring.mean() == doctest::Approx(0.75));
  CHECK(atom.offspring.variance() == doctest::Approx(0.6875));
}

TEST_CASE("model validation reports every violation") {
  std::vector<EnvironmentAtom> atoms{{CountLaw::geometric(0.5), CountLaw::deterministic(1)},
                                     {CountLaw::geometric(0.5), CountLaw::deterministic(1)}};
  const std::vector<double> probs{0.7, -0.1};
  const auto v = EnvironmentModel::violations(atoms, probs);
  CHECK(v.size() >= 2);
  CHECK_THROWS_AS(EnvironmentModel(atoms, probs), ValidationError);
  CHECK_THROWS_AS(CountLaw::geometric(1.5), ValidationError);
  CHECK_THROWS_AS(CountLaw::finite({0.5, 0.6}), ValidationError);
  CHECK_THROWS_AS(preset_model("ENV-Z"), ValidationError);
}

TEST_CASE("kappa for every preset") {
  CHECK(solve_kappa(preset_model("ENV-A")).kappa == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(solve_kappa(preset_model("ENV-B")).kappa == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(solve_kappa(preset_model("ENV-C")).kappa == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(solve_kappa(preset_model("ENV-D")).kappa == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(solve_kappa(preset_model("ENV-K15")).kappa == doctest::Approx(1.5).epsilon(1e-12));
  const auto rep = solve_kappa(preset_model("ENV-B"));
  CHECK_FALSE(rep.nonarithmetic_hint);
  CHECK(rep.lattice_span == doctest::Approx(std::numbers::ln2));
  CHECK(rep.lambda_prime_at_kappa == doctest::Approx(std::numbers::ln2 / 3));
}

TEST_CASE("kappa failure modes") {
  CHECK_THROWS_AS(solve_kappa(two_point_geometric_model(0.4)), NotSubcritical);
  EnvironmentModel all_down({{CountLaw::geometric(2.0 / 3.0), CountLaw::deterministic(1)}}, {1.0});
  CHECK_THROWS_AS(solve_kappa(all_down), NoCramerRoot);
  CHECK_THROWS_AS(tilt(preset_model("ENV-A"), 1.9), CramerNotSatisfied);
}

TEST_CASE("lambda is log-convex") {
  const auto model = two_point_geometric_model(0.7);
  for (double a = 0.1; a < 5; a += 0.37) {
    for (double b = a + 0.2; b < 6; b += 0.53) {
      const double mid = std::log(lambda(model, 0.5 * (a + b)));
      CHECK(mid <= 0.5 * (std::log(lambda(model, a)) + std::log(lambda(model, b))) + 1e-14);
    }
  }
}

TEST_CASE("kappa is invariant under reordering and splitting atoms") {
  const EnvironmentAtom down{CountLaw::geometric(2.0 / 3.0), CountLaw::deterministic(1)};
  const EnvironmentAtom up{CountLaw::poisson(1.7), CountLaw::deterministic(2)};
  const EnvironmentModel base({down, up}, {0.75, 0.25});
  const EnvironmentModel swapped({up, down}, {0.25, 0.75});
  const EnvironmentModel split({down, up, down}, {0.5, 0.25, 0.25});
  const double k = solve_kappa(base).kappa;
  CHECK(solve_kappa(swapped).kappa == doctest::Approx(k).epsilon(1e-12));
  CHECK(solve_kappa(split).kappa == doctest::Approx(k).epsilon(1e-12));
  CHECK(solve_kappa(base).nonarithmetic_hint);
}

TEST_CASE("tilted law") {
  const auto t = tilt(preset_model("ENV-A"), 2.0);
  CHECK(t.probs[0] == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(t.probs[1] == doctest::Approx(0.8).epsilon(1e-12));
  const auto tc = tilt(preset_model("ENV-C"), 0.5);
  // Tilting at kappa makes the walk drift upward: E* log m > 0.
  CHECK(tc.probs[0] * std::log(0.5) + tc.probs[1] * std::log(2.0) > 0);
}

TEST_CASE("lattice detection") {
  const std::vector<double> lat{std::log(0.5), std::log(2.0), std::log(8.0)};
  CHECK(lattice_span(lat) == doctest::Approx(std::numbers::ln2));
  const std::vector<double> non{std::log(0.5), std::log(3.0)};
  CHECK(lattice_span(non) == 0.0);
}

TEST_CASE("moment condition") {
  const auto model = preset_model("ENV-B");
  CHECK(moment_condition_check(model, 0.5));
  CHECK_FALSE(moment_condition_check(model, 1.5));
}

TEST_CASE("stats helpers") {
  const std::vector<double> x{4, 1, 3, 2};
  CHECK(stats::quantile(x, 0.5) == doctest::Approx(2.5));
  CHECK(stats::quantile(x, 0.0) == 1);
  CHECK(stats::quantile(x, 1.0) == 4);
  CHECK(stats::mean(x) == doctest::Approx(2.5));
  CHECK(stats::variance(x) == doctest::Approx(5.0 / 3.0));
  CHECK(stats::ks_two_sample(x, x) == 0.0);
  const std::vector<double> y{10, 11};
  CHECK(stats::ks_two_sample(x, y) == 1.0);
  const std::vector<double> half{0.5};
  CHECK(stats::ks_one_sample(half, [](double t) { return t; }) == doctest::Approx(0.5));
  // Two-sample KS with ties: {0,0,1} vs {0,1,1} differs by 1/3 at 0.
  const std::vector<double> a{0, 0, 1}, b{0, 1, 1};
  CHECK(stats::ks_two_sample(a, b) == doctest::Approx(1.0 / 3.0));
  CHECK(stats::kolmogorov_survival(1.358) == doctest::Approx(0.05).epsilon(0.01));
  const std::vector<double> xs{1, 2, 3, 4}, ys{3, 5, 7, 9};
  const auto fit = stats::least_squares(xs, ys);
  CHECK(fit.slope == doctest::Approx(2.0));
  CHECK(fit.intercept == doctest::Approx(1.0));
}
