#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "bpire/chain_sim.hpp"
#include "bpire/env_model.hpp"

namespace bpire {

enum class KappaRegime { kSub1, kEq1, kBetween1And2, kAbove2 };
std::string_view to_string(KappaRegime regime);

/// Throws RegimeMismatch when kappa is within 0.02 of 2 (the boundary case
/// needs different normalisation and is excluded).
KappaRegime classify_regime(double kappa);

struct SumExperiment {
  std::uint64_t n = 0;
  std::size_t reps = 0;
  KappaRegime regime = KappaRegime::kSub1;
  std::vector<double> normalized_sums;
  double a_n = 0;
  double b_n = 0;
  double b_n_std_err = 0;
  /// Gaussian branch only: sigma^2 = (1 + E m)/(1 - E m) Var(X_inf).
  double sigma = 0;
  double stationary_mean = 0;
  double batch_variance = 0;
  /// Var(S_n / sqrt(n)) over the replicates, Gaussian branch only.
  double raw_scaled_variance = 0;
};

/// Truncated-mean centering n E[(X/a_n) 1{X <= a_n}] estimated from a batch.
double truncated_mean_centering(std::span<const std::uint64_t> batch, double n, double a_n,
                                double* std_err = nullptr);

/// `reps` independent stationary stretches of length n. kappa < 2: returns
/// sum X_k / a_n - b_n with a_n = (C n)^(1/kappa). kappa > 2: returns
/// (S_n - n E X) / (sqrt(n) sigma). `centering_batch` is required for
/// kappa >= 1.
SumExperiment partial_sum_experiment(const EnvironmentModel& model, double kappa, double C,
                                     std::uint64_t n, std::size_t reps, std::uint64_t seed,
                                     const StationaryBatch* centering_batch = nullptr,
                                     unsigned workers = 0);

struct CenteringGrowth {
  std::vector<double> n_grid;
  std::vector<double> b_n;
  double slope = 0;
  double slope_std_err = 0;
};

/// Regression of b_n on log n for kappa = 1 (a_n = C n).
CenteringGrowth centering_growth(std::span<const std::uint64_t> batch, double C,
                                 std::span<const double> n_grid);

struct StableFitResult {
  double alpha_hat = 0;
  /// d^(1/alpha), with |phi(t)| = exp(-d |t|^alpha).
  double scale_hat = 0;
  double d_hat = 0;
  double skew_hat = 0;
  double location_hat = 0;
  std::size_t grid_points = 0;
  double t_low = 0;
  double t_high = 0;
  std::string_view method = "ecf-loglog-regression";
};

/// Empirical characteristic function regression: log(-log|phi(t)|) is
/// affine in log t with slope alpha. Points with |phi| in [phi_low, phi_high]
/// enter the fit. Throws IllConditionedFit if fewer than 8 grid points
/// qualify.
StableFitResult stable_index_fit(std::span<const double> sums, double phi_low = 0.2,
                                 double phi_high = 0.9);

struct ClusterMomentEstimate {
  /// Estimate of E (sum_j Q_j)^kappa.
  double value = 0;
  double std_err = 0;
  std::uint64_t horizon = 0;
  double acceptance_rate = 0;
  std::size_t accepted = 0;
  std::size_t proposals = 0;
  /// Share of accepted paths whose horizon tail bound exceeded 1e-3 of the sum.
  double flagged_fraction = 0;
};

/// Rejection sampler for the cluster functional: two-sided walk with
/// forward steps log m (original law) and backward steps -log m* (tilted
/// law), accepted when S_t < 0 for t < 0 and S_t <= 0 for t > 0. Throws
/// HorizonTooSmall when more than 1% of accepted paths are flagged.
ClusterMomentEstimate cluster_moment(const EnvironmentModel& model, double kappa,
                                     std::uint64_t horizon, std::size_t proposals,
                                     std::uint64_t seed, unsigned workers = 0);

/// Stable scale d from theta and E(sum Q)^kappa: theta Gamma(1-k) E cos(pi k/2)
/// for kappa != 1, theta (pi/2) E for kappa = 1.
double stable_scale_d(double kappa, double theta, double cluster_moment_value);

/// exp(-d|t|^k (1 - i sgn(t) tan(pi k/2)) + i c t) for kappa != 1 and
/// exp(-d|t| (1 + i (2/pi) sgn(t) log|t|) + i c t) for kappa = 1.
std::complex<double> theoretical_chf(double kappa, double d, double c, double t);

}  // namespace bpire
