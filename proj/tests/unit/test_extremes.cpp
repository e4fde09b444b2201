#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "bpire/cramer.hpp"
#include "bpire/errors.hpp"
#include "bpire/extremes.hpp"
#include "bpire/rng.hpp"
#include "bpire/stable_limits.hpp"

using namespace bpire;

TEST_CASE("closed-form extremal index") {
  const double r2 = std::sqrt(2.0);
  CHECK(theta_lattice_exact(preset_model("ENV-A"), 2.0).value == doctest::Approx(9.0 / 20.0).epsilon(1e-14));
  CHECK(theta_lattice_exact(preset_model("ENV-B"), 1.0).value == doctest::Approx(1.0 / 6.0).epsilon(1e-14));
  CHECK(theta_lattice_exact(preset_model("ENV-C"), 0.5).value ==
        doctest::Approx((3 - 2 * r2) * (1 - 1 / r2)).epsilon(1e-12));
  // (1-a)(1-r)(1-2^-3) with a = 1/9, r = 1/8.
  CHECK(theta_lattice_exact(preset_model("ENV-D"), 3.0).value == doctest::Approx(8.0 / 9 * 7.0 / 8 * 7.0 / 8));
  const EnvironmentModel odd({{CountLaw::geometric(2.0 / 3.0), CountLaw::deterministic(1)},
                              {CountLaw::poisson(3.0), CountLaw::deterministic(1)}},
                             {0.8, 0.2});
  CHECK_THROWS_AS(theta_lattice_exact(odd, solve_kappa(odd).kappa), NotTwoPointLattice);
}

TEST_CASE("direct extremal index agrees with the closed form") {
  const auto model = preset_model("ENV-A");
  const auto d = theta_direct(model, 2.0, 200, 100000, 12);
  CHECK(std::abs(d.value - 0.45) < 4 * d.std_err);
  CHECK(d.truncation_bias_bound < 1e-3);
  CHECK(theta_direct(model, 2.0, 200, 5000, 12, 1).value == theta_direct(model, 2.0, 200, 5000, 12, 3).value);
}

TEST_CASE("Frechet helpers") {
  CHECK(frechet_cdf(1.0, 0.5, 2.0) == doctest::Approx(std::exp(-0.5)));
  CHECK(frechet_cdf(2.0, 0.45, 2.0) == doctest::Approx(std::exp(-0.45 / 4)));
  CHECK(frechet_cdf(0.0, 0.45, 2.0) == 0.0);
  // Maxima of n i.i.d. Pareto(2) values with a_n = sqrt(n): Frechet(1, 2).
  Rng rng(6);
  const std::uint64_t n = 500;
  std::vector<double> maxima(4000);
  for (auto& m : maxima) {
    m = 0;
    for (std::uint64_t i = 0; i < n; ++i) m = std::max(m, std::pow(rng.uniform(), -0.5));
  }
  const auto fit = frechet_fit(maxima, std::sqrt(double(n)), 1.0, 2.0, n);
  CHECK(fit.ks_distance < 0.03);
}

TEST_CASE("regimes") {
  CHECK(classify_regime(0.5) == KappaRegime::kSub1);
  CHECK(classify_regime(1.0) == KappaRegime::kEq1);
  CHECK(classify_regime(1.5) == KappaRegime::kBetween1And2);
  CHECK(classify_regime(3.0) == KappaRegime::kAbove2);
  CHECK_THROWS_AS(classify_regime(2.01), RegimeMismatch);
}

TEST_CASE("ECF fit on exact stable samples") {
  // 1/Z^2 is totally skewed stable with index 1/2.
  Rng rng(21);
  std::vector<double> levy(20000);
  for (auto& x : levy) {
    const double z = sample_standard_normal(rng);
    x = 1.0 / (z * z);
  }
  const auto fl = stable_index_fit(levy);
  CHECK(fl.alpha_hat == doctest::Approx(0.5).epsilon(0.06));
  CHECK(fl.skew_hat == doctest::Approx(1.0).epsilon(0.15));

  // Chambers-Mallows-Stuck, symmetric, alpha = 1.5.
  const double a = 1.5;
  std::vector<double> sym(20000);
  for (auto& x : sym) {
    const double v = std::numbers::pi * (rng.uniform() - 0.5);
    const double w = sample_exponential(rng, 1.0);
    x = std::sin(a * v) / std::pow(std::cos(v), 1 / a) * std::pow(std::cos(v - a * v) / w, (1 - a) / a);
  }
  const auto fs = stable_index_fit(sym);
  CHECK(fs.alpha_hat == doctest::Approx(1.5).epsilon(0.04));
  CHECK(std::abs(fs.skew_hat) < 0.15);
  CHECK(fs.d_hat == doctest::Approx(1.0).epsilon(0.1));
}

TEST_CASE("too few usable ECF points is reported") {
  const std::vector<double> tiny{1.0, 1.0, 1.0, 1.0};
  CHECK_THROWS_AS(stable_index_fit(tiny), IllConditionedFit);
}

TEST_CASE("stable chf and scale") {
  CHECK(std::abs(theoretical_chf(0.5, 0.3, 0.0, 0.0) - 1.0) < 1e-15);
  const auto phi = theoretical_chf(0.5, 0.3, 0.0, 4.0);
  CHECK(std::abs(phi) == doctest::Approx(std::exp(-0.3 * 2.0)));
  const auto one = theoretical_chf(1.0, 0.3, 0.0, std::exp(1.0));
  CHECK(std::abs(one) == doctest::Approx(std::exp(-0.3 * std::exp(1.0))));
  CHECK(stable_scale_d(0.5, 0.2, 3.0) ==
        doctest::Approx(0.2 * std::tgamma(0.5) * 3.0 * std::cos(std::numbers::pi / 4)));
  CHECK(stable_scale_d(1.0, 0.2, 3.0) == doctest::Approx(0.2 * std::numbers::pi / 2 * 3.0));
}

TEST_CASE("centering helpers") {
  const std::vector<std::uint64_t> ones(1000, 1);
  CHECK(truncated_mean_centering(ones, 10, 100) == doctest::Approx(0.1));
  // Integer Pareto(1): P(X > x) ~ 1/x, so n E[X/(Cn); X <= Cn] grows like log(n) / C.
  Rng rng(31);
  std::vector<std::uint64_t> batch(2000000);
  for (auto& x : batch) x = static_cast<std::uint64_t>(1.0 / rng.uniform());
  const double grid[] = {1e2, 1e3, 1e4};
  CHECK(centering_growth(batch, 1.0, grid).slope == doctest::Approx(1.0).epsilon(0.1));
  CHECK(centering_growth(batch, 2.0, grid).slope == doctest::Approx(0.5).epsilon(0.1));
}

TEST_CASE("cluster functional is at least one") {
  const auto model = preset_model("ENV-C");
  const auto c = cluster_moment(model, 0.5, 400, 40000, 3);
  CHECK(c.value >= 1.0);
  CHECK(c.accepted > 0);
  CHECK(c.acceptance_rate == doctest::Approx(double(c.accepted) / double(c.proposals)));
}
