#include <doctest.h>

#include <cmath>
#include <vector>

#include "bpire/chain_sim.hpp"
#include "bpire/cramer.hpp"
#include "bpire/exact_law.hpp"

using namespace bpire;
using exact::Rational;

namespace {

exact::Model finite_offspring_model() {
  exact::Model m;
  m.atoms = {{{{0, Rational(1, 2)}, {2, Rational(1, 2)}}, {{1, Rational(1)}}},
             {{{0, Rational(1, 4)}, {1, Rational(3, 4)}}, {{0, Rational(1, 2)}, {2, Rational(1, 2)}}}};
  m.probs = {Rational(2, 5), Rational(3, 5)};
  return m;
}

std::vector<double> conv(const std::vector<double>& a, const std::vector<double>& b, std::size_t cap) {
  std::vector<double> out(std::min(cap, a.size() + b.size() - 1), 0.0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size() && i + j < out.size(); ++j) out[i + j] += a[i] * b[j];
  return out;
}

// Stationary pmf by iterating the transition operator on a truncated state
// space; the mass pushed past the cap is negligible for this model.
std::vector<double> power_iteration(const EnvironmentModel& model, std::size_t cap, int sweeps) {
  std::vector<std::vector<std::vector<double>>> progeny(model.size());
  for (std::size_t i = 0; i < model.size(); ++i) {
    const auto& off = std::get<FiniteDiscrete>(model.atom(i).offspring.variant()).pmf;
    std::vector<double> cur{1.0};
    for (std::size_t x = 0; x < cap; ++x) {
      progeny[i].push_back(cur);
      cur = conv(cur, off, cap);
    }
  }
  std::vector<double> pi(cap, 0.0);
  pi[0] = 1.0;
  for (int s = 0; s < sweeps; ++s) {
    std::vector<double> next(cap, 0.0);
    for (std::size_t i = 0; i < model.size(); ++i) {
      const auto& imm = std::get<FiniteDiscrete>(model.atom(i).immigration.variant()).pmf;
      for (std::size_t x = 0; x < cap; ++x) {
        if (pi[x] == 0) continue;
        const auto law = conv(progeny[i][x], imm, cap);
        for (std::size_t y = 0; y < law.size(); ++y) next[y] += model.prob(i) * pi[x] * law[y];
      }
    }
    pi = std::move(next);
  }
  return pi;
}

}  // namespace

TEST_CASE("exact thinning is binomial") {
  const exact::Pmf two{{2, Rational(1)}};
  const exact::Pmf half{{0, Rational(1, 2)}, {1, Rational(1, 2)}};
  const auto t = exact::thin(two, half);
  CHECK(t.at(0) == Rational(1, 4));
  CHECK(t.at(1) == Rational(1, 2));
  CHECK(t.at(2) == Rational(1, 4));
}

TEST_CASE("forward chain from 0 equals the truncated backward series") {
  const auto m = finite_offspring_model();
  for (unsigned h = 1; h <= 4; ++h) CHECK(exact::forward_law(m, h) == exact::backward_series_law(m, h));
}

TEST_CASE("stationary batch matches a power-iteration oracle") {
  const auto model = exact::to_environment_model(finite_offspring_model());
  const auto pi = power_iteration(model, 120, 600);
  const std::size_t n = 200000;
  const auto batch = sample_stationary(model, 600, n, 77);
  std::vector<double> hist(pi.size(), 0.0);
  for (auto v : batch.values) {
    if (v < hist.size()) hist[v] += 1.0 / n;
  }
  double worst = 0;
  for (std::size_t k = 0; k < pi.size(); ++k) worst = std::max(worst, std::abs(hist[k] - pi[k]));
  CHECK(worst < 0.006);
}

TEST_CASE("recommended burn-ins for the presets") {
  const std::pair<const char*, std::uint64_t> cases[] = {{"ENV-A", 62}, {"ENV-B", 235}, {"ENV-C", 925}, {"ENV-D", 35}};
  for (const auto& [name, h] : cases) {
    const auto model = preset_model(name);
    CHECK(recommended_burnin(model, solve_kappa(model).kappa) == h);
  }
}

TEST_CASE("short burn-in is flagged, not rejected") {
  const auto batch = sample_stationary(preset_model("ENV-A"), 3, 10, 1);
  CHECK(batch.burn_in_too_small);
  CHECK(batch.values.size() == 10);
}

TEST_CASE("stationary mean and fixed-point residual") {
  CHECK(stationary_mean(preset_model("ENV-D")) == doctest::Approx(3.0));
  CHECK(stationary_mean(preset_model("ENV-A")) == doctest::Approx(5.0));
  const auto model = preset_model("ENV-D");
  const auto batch = sample_stationary(model, 35, 100000, 5);
  double s = 0;
  for (auto v : batch.values) s += static_cast<double>(v);
  CHECK(s / 100000 == doctest::Approx(3.0).epsilon(0.03));
  CHECK(fixed_point_residual(model, batch.values, 6) < 0.01);
}

TEST_CASE("batches do not depend on the worker count") {
  const auto model = preset_model("ENV-B");
  const auto a = sample_stationary(model, 235, 5000, 11, 1);
  const auto b = sample_stationary(model, 235, 5000, 11, 3);
  CHECK(a.values == b.values);
  CHECK(fixed_point_residual(model, a.values, 3, 1) == fixed_point_residual(model, a.values, 3, 4));
}

TEST_CASE("trajectory bookkeeping") {
  ChainConfig cfg{preset_model("ENV-A"), 0, 10, 99};
  const auto t = simulate_forward(cfg, 1000);
  CHECK(t.values.size() == 1000);
  CHECK(t.start_index == 11);
  // The chain never leaves 0 without immigrants: every state is at least 1.
  CHECK(*std::min_element(t.values.begin(), t.values.end()) >= 1);
  const auto again = simulate_forward(cfg, 1000);
  CHECK(t.values == again.values);
}
