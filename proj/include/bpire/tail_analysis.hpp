#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "bpire/env_model.hpp"

namespace bpire {

struct HillResult {
  double kappa_hat = 0;
  double std_err = 0;
  std::size_t k = 0;
  /// X_(k+1), the order statistic the log-excesses are measured from.
  double threshold = 0;
};

/// Hill estimator on the top k order statistics. Throws DegenerateTail when
/// X_(1) == X_(k+1), DomainError on invalid k or non-positive order stats.
HillResult hill_estimator(std::span<const double> values, std::size_t k);

struct GoldieEstimate {
  double C = 0;
  double C_std_err = 0;
  /// Monte Carlo mean of Psi(X)^kappa - (m X)^kappa.
  double numerator = 0;
  double numerator_std_err = 0;
  double lambda_prime = 0;
};

/// Goldie constant C = E[Psi(X)^k - (m X)^k] / (k E m^k log m), each batch
/// value paired with one fresh environment shared by both terms.
GoldieEstimate goldie_C_formula(const EnvironmentModel& model, double kappa,
                                std::span<const std::uint64_t> batch, std::uint64_t seed,
                                unsigned workers = 0);

struct PlateauOptions {
  /// Multiplicative lattice period of the tail (e.g. 2); 0 = nonarithmetic.
  double lattice_factor = 0;
  int grid_per_period = 32;
  /// Sample size behind `values`; 0 means values.size(). Allows passing just
  /// the upper part of a large sample.
  std::size_t sample_size = 0;
  std::size_t min_exceedances = 100;
};

struct PlateauResult {
  double plateau_C = 0;
  /// Window actually averaged over (trimmed to whole periods when lattice).
  double x_low = 0;
  double x_high = 0;
  std::size_t grid_points = 0;
  std::size_t exceedances_at_high = 0;
};

/// Mean of x^kappa * P_hat(X > x) over a log-spaced grid in [x_low, x_high].
/// Lattice models average over whole multiplicative periods (Cesaro mean).
PlateauResult tail_plateau(std::span<const double> values, double kappa, double x_low,
                           double x_high, const PlateauOptions& options = {});

struct TailReport {
  HillResult hill;
  PlateauResult plateau;
  GoldieEstimate goldie;
  std::size_t sample_size = 0;
};

struct LawAtom {
  double value;
  double prob;
};

/// Limit law of X_lag / X_0 given X_0 large: product of `lag` original m's
/// (lag > 0) or inverse product of |lag| tilted m*'s (lag < 0). Sorted by
/// value, equal products merged.
std::vector<LawAtom> reference_ratio_law(const EnvironmentModel& model, double kappa, int lag);

struct SpectralTestReport {
  int lag = 0;
  double threshold_quantile = 0;
  double threshold = 0;
  std::vector<LawAtom> empirical;
  std::vector<LawAtom> reference;
  double ks_distance = 0;
  std::size_t exceedances = 0;
  /// Fraction of ratios within relative 5% of their assigned lattice point.
  double matched_fraction = 0;
};

/// Ratios X_{t+lag} / X_t over positions with X_t above the pooled
/// threshold_quantile, bucketed to the nearest reference atom (log scale).
/// Throws TooFewExceedances below `min_exceedances`.
SpectralTestReport spectral_ratio_test(const EnvironmentModel& model, double kappa, int lag,
                                       std::span<const std::vector<std::uint64_t>> paths,
                                       double threshold_quantile,
                                       std::size_t min_exceedances = 500);

struct AnticlusteringReport {
  double threshold = 0;
  std::size_t r = 0;
  std::vector<std::size_t> k_list;
  std::vector<double> probability;
  std::vector<double> std_err;
  std::size_t conditioning_events = 0;
};

/// P(max_{k <= |t| <= r} X_{s+t} > u | X_s > u), estimated over positions s
/// at least r away from both path ends. k > r gives 0.
AnticlusteringReport anticlustering_diagnostic(double u, std::span<const std::size_t> k_list,
                                               std::size_t r,
                                               std::span<const std::vector<std::uint64_t>> paths,
                                               std::size_t min_events = 100);

/// Pooled empirical quantile over a set of paths.
double pooled_quantile(std::span<const std::vector<std::uint64_t>> paths, double q);

}  // namespace bpire
