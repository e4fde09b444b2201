#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "bpire/env_model.hpp"
#include "bpire/rng.hpp"

namespace bpire {

struct ChainConfig {
  EnvironmentModel model;
  std::uint64_t initial_value = 0;
  std::uint64_t burn_in = 1;
  std::uint64_t seed = 0;
};

/// values[i] is the state after burn_in + 1 + i steps from initial_value.
struct TrajectorySample {
  std::vector<std::uint64_t> values;
  std::uint64_t start_index = 0;
};

struct StationaryBatch {
  std::vector<std::uint64_t> values;
  std::uint64_t burn_in = 0;
  /// burn_in * log lambda(alpha*): log of the geometric bias bound.
  double bias_bound_exponent = 0;
  std::uint64_t seed = 0;
  std::string model_fingerprint;
  /// Set when the bias bound exceeds 1e-6.
  bool burn_in_too_small = false;
};

/// One transition x -> theta o x + B under a freshly drawn environment. The
/// offspring and the immigrants share the same environment draw.
std::uint64_t step(std::uint64_t x, const EnvironmentModel& model, Rng& rng);

/// Single long chain; throws OverflowGuard on a runaway state.
TrajectorySample simulate_forward(const ChainConfig& config, std::size_t n);

/// `count` independent chains from 0, each run `burn_in` steps; the terminal
/// states are exact draws of the burn_in-term truncated backward series.
/// Output order is by chain index, identical for any worker count.
StationaryBatch sample_stationary(const EnvironmentModel& model, std::uint64_t burn_in,
                                  std::size_t count, std::uint64_t seed, unsigned workers = 0);

/// Bias exponent burn_in * log lambda(alpha*), alpha* = argmin of lambda on
/// (0, min(1, kappa)].
double bias_bound_exponent(const EnvironmentModel& model, double kappa, std::uint64_t burn_in);

/// Smallest H with H log lambda(alpha*) <= log(target_bias); at least 1.
std::uint64_t recommended_burnin(const EnvironmentModel& model, double kappa,
                                 double target_bias = 1e-6);

/// Two-sample KS distance between `values` and their one-step images under
/// fresh randomness. Small values certify the fixed-point equation.
double fixed_point_residual(const EnvironmentModel& model, std::span<const std::uint64_t> values,
                            std::uint64_t seed, unsigned workers = 0);

/// E X_inf = E B / (1 - E m); requires E m < 1 (e.g. kappa > 1).
double stationary_mean(const EnvironmentModel& model);

}  // namespace bpire
