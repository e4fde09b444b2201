#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "bpire/env_model.hpp"

namespace bpire {

enum class ThetaMethod { kExactLattice, kDirectMC, kBlocks };
std::string_view to_string(ThetaMethod method);

struct ThetaEstimate {
  double value = 0;
  ThetaMethod method = ThetaMethod::kExactLattice;
  double std_err = 0;
  /// Walk horizon (direct MC only).
  std::uint64_t horizon = 0;
  /// Upper bound on the upward bias from truncating the walk at `horizon`.
  double truncation_bias_bound = 0;
  std::size_t exceedances = 0;
};

struct FrechetFit {
  std::uint64_t block_length = 0;
  std::size_t maxima_count = 0;
  double a_n = 0;
  double theta = 0;
  double kappa = 0;
  double ks_distance = 0;
  /// a_n came from the empirical (1 - 1/n)-quantile instead of (C n)^(1/kappa).
  bool a_n_from_quantile = false;
};

/// P(E0 + max_{1<=t<=horizon} S_t <= 0) by Monte Carlo, E0 ~ Exp(kappa) and
/// S the random walk with steps log m(xi) under the original law.
ThetaEstimate theta_direct(const EnvironmentModel& model, double kappa, std::uint64_t horizon,
                           std::size_t reps, std::uint64_t seed, unsigned workers = 0);

/// Smallest doubling horizon (from 25) whose pilot truncation bound is below
/// `target_bias`.
std::uint64_t default_theta_horizon(const EnvironmentModel& model, double kappa,
                                    std::uint64_t seed, double target_bias = 1e-4);

/// Closed form for two-point lattice environments m in {e^-h, e^h} with
/// up-probability a < 1/2:  theta = (1-a)(1-r)(1-e^{-kappa h}), r = a/(1-a).
/// Throws NotTwoPointLattice otherwise.
ThetaEstimate theta_lattice_exact(const EnvironmentModel& model, double kappa);

/// Blocks estimator: (# blocks whose max exceeds u) / (# exceedances of u),
/// u the pooled empirical `threshold_quantile`. Incomplete trailing blocks
/// are dropped. Throws TooFewExceedances below `min_exceedances`.
ThetaEstimate theta_blocks(std::span<const std::vector<std::uint64_t>> paths,
                           std::size_t block_length, double threshold_quantile,
                           std::size_t min_exceedances = 100);

double frechet_cdf(double x, double theta, double kappa);

/// KS distance of maxima / a_n against exp(-theta x^-kappa).
FrechetFit frechet_fit(std::span<const double> maxima, double a_n, double theta, double kappa,
                       std::uint64_t block_length);

/// Simulates `reps` independent stationary stretches of length n (chains
/// from 0 with the recommended burn-in) and fits their maxima with
/// a_n = (C n)^(1/kappa).
FrechetFit frechet_gof(const EnvironmentModel& model, double kappa, double C, std::uint64_t n,
                       std::size_t reps, double theta, std::uint64_t seed, unsigned workers = 0);

/// Fallback normalisation: empirical (1 - 1/n)-quantile of a stationary batch.
double a_n_from_quantile(std::span<const std::uint64_t> batch, std::uint64_t n);

}  // namespace bpire
