#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "bpire/env_model.hpp"
#include "bpire/extremes.hpp"
#include "bpire/rng.hpp"

namespace bpire {

/// Law of the right-step probability xi at each site, i.i.d. over sites.
class RwreModel {
 public:
  /// Validates probs (positive, sum 1) and site values in (0, 1], and the
  /// drift condition E log(xi'/xi) < 0.
  RwreModel(std::vector<double> site_values, std::vector<double> probs, bool reflect_at_origin = false);

  const std::vector<double>& site_values() const { return values_; }
  const std::vector<double>& probs() const { return probs_; }
  bool reflect_at_origin() const { return reflect_; }
  RwreModel reflected(bool on = true) const { return RwreModel(values_, probs_, on); }

  /// Site value from 64 bits (inverse CDF on a hashed uniform).
  double site_from_bits(std::uint64_t bits) const;
  /// E log(xi'/xi).
  double drift_exponent() const;

  bool operator==(const RwreModel& other) const {
    return values_ == other.values_ && probs_ == other.probs_ && reflect_ == other.reflect_;
  }

 private:
  std::vector<double> values_;
  std::vector<double> probs_;
  std::vector<double> cdf_;
  bool reflect_ = false;
};

/// Site presets: "RW-K2", "RW-K1", "RW-KHALF" (ratio models ENV-A/B/C).
RwreModel preset_sites(std::string_view name);
bool is_site_preset_name(std::string_view name);

/// Ratio branching model: one atom per site value with Geometric(xi)
/// offspring (mean xi'/xi) and immigration identically 1.
EnvironmentModel derive_ratio_model(const RwreModel& rwre);

enum class WalkEngine {
  /// Step-by-step simulation of the walk.
  kStepwise,
  /// Exact joint law of (T_n, edge crossings) from per-edge geometric
  /// crossing counts; O(visited range) instead of O(T_n).
  kCrossingCounts,
};

struct WalkOptions {
  std::uint64_t step_budget = 1'000'000'000;
  WalkEngine engine = WalkEngine::kStepwise;
};

struct RwreRun {
  std::uint64_t target_n = 0;
  std::uint64_t hitting_time = 0;
  /// crossings[j] = V_k for edge (k, k+1), k = min_edge + j, k < target_n.
  std::vector<std::uint64_t> crossings;
  std::int64_t min_edge = 0;
  /// Total right-to-left crossings before T_n.
  std::uint64_t left_crossings = 0;
  /// Left crossings of edges left of the origin (edges k < 0).
  std::uint64_t left_of_origin_crossings = 0;
  std::uint64_t max_crossings = 0;
  std::uint64_t seed = 0;
};

/// Walk from 0 until the first hit of n. Site environments and the step
/// noise at each site are counter-based functions of (seed, site, visit), so
/// two walks with the same seed share environment and noise site by site.
/// Throws StepBudgetExceeded when T_n exceeds the budget (stepwise engine).
RwreRun simulate_walk(const RwreModel& rwre, std::uint64_t n, std::uint64_t seed,
                      const WalkOptions& options = {});

/// Position W_t of the free (or reflected) walk after t steps.
std::int64_t simulate_position(const RwreModel& rwre, std::uint64_t t, std::uint64_t seed);

struct LChainRun {
  std::vector<std::uint64_t> values;
  /// 2 sum L_i - n, plus 2 (L_{n+1} - 1) when a boundary atom is given.
  std::int64_t sum2_l_minus_n = 0;
  /// L_{n+1} produced by the boundary atom (0 if none).
  std::uint64_t boundary_value = 0;
};

/// L_1 = 1, L_i = theta o L_{i-1} + 1 under the ratio model for i = 2..n.
/// The optional boundary atom drives the transition out of L_n (site 0):
/// with the forced-right atom of a reflected walk it contributes nothing.
LChainRun simulate_L_chain(const EnvironmentModel& ratio_model, std::uint64_t n, Rng& rng,
                           const EnvironmentAtom* boundary_atom = nullptr);

/// Forced-right site (xi = 1): zero offspring, immigration 1.
EnvironmentAtom forced_right_atom();

struct EquivalenceReport {
  double ks_distance = 0;
  double critical_value_1pct = 0;
  bool pass = false;
  double mean_walk = 0;
  double mean_chain = 0;
  std::size_t reps = 0;
};

/// Two-sample KS between T_n of reflected walks and 2 sum L_i - n of
/// independent boundary-modified L-chains.
EquivalenceReport hitting_time_equivalence(const RwreModel& rwre, std::uint64_t n, std::size_t reps,
                                           std::uint64_t seed, unsigned workers = 0,
                                           const WalkOptions& options = {});

struct HittingTimeSample {
  std::uint64_t n = 0;
  std::vector<double> scaled;
  std::size_t censored = 0;
};

struct QuantileCheck {
  double p = 0;
  double position_quantile = 0;
  double transformed_quantile = 0;
  double relative_error = 0;
};

struct LimitsReport {
  double kappa = 0;
  double centering_e_l = 0;
  std::vector<HittingTimeSample> samples;
  /// KS between consecutive entries of `samples`.
  std::vector<double> consecutive_ks;
  double censored_fraction = 0;
  std::uint64_t position_time = 0;
  std::vector<QuantileCheck> position_checks;
};

struct LimitsOptions {
  WalkOptions walk{};
  /// t for the W_t / t^kappa check; 0 skips it (kappa < 1 only).
  std::uint64_t position_time = 0;
  std::size_t position_reps = 0;
  std::vector<double> position_probs{0.25, 0.5, 0.75};
  unsigned workers = 0;
  /// Stationary batch size for E L_inf (kappa in (1,2)) and b_n (kappa = 1).
  std::size_t centering_batch = 1'000'000;
};

/// Scaled hitting times per regime: T_n / n^(1/k) (k < 1), (T_n - n c_n)/n
/// with c_n = 2 E[L 1{L <= C n}] - 1 (k = 1), (T_n - n(2 E L - 1))/n^(1/k)
/// (1 < k < 2). Throws RegimeMismatch near kappa = 2.
LimitsReport hitting_time_limits(const RwreModel& rwre, double kappa, double C,
                                 std::span<const std::uint64_t> n_grid, std::size_t reps,
                                 std::uint64_t seed, const LimitsOptions& options = {});

/// Law of max_{k<n} V_k / (2 a_n), a_n = (C n)^(1/kappa), against
/// Frechet(theta, kappa).
FrechetFit most_visited_edge(const RwreModel& rwre, std::uint64_t n, std::size_t reps, double theta,
                             double kappa, double C, std::uint64_t seed, unsigned workers = 0,
                             const WalkOptions& options = {});

}  // namespace bpire
