#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "bpire/rng.hpp"

namespace bpire {

/// Geometric on {0,1,2,...}: P(k) = (1-p)^k p, mean (1-p)/p.
struct Geometric {
  double success_prob;
  bool operator==(const Geometric&) const = default;
};
struct Poisson {
  double rate;
  bool operator==(const Poisson&) const = default;
};
struct Deterministic {
  std::uint64_t value;
  bool operator==(const Deterministic&) const = default;
};
/// pmf[k] = P(k). Weights must be nonnegative and sum to 1 within 1e-12.
struct FiniteDiscrete {
  std::vector<double> pmf;
  bool operator==(const FiniteDiscrete&) const = default;
};

inline constexpr std::uint64_t kDefaultSummationCap = 10'000'000;

/// A law on the nonnegative integers, used for both offspring and
/// immigration. Immutable after construction.
class CountLaw {
 public:
  using Variant = std::variant<Geometric, Poisson, Deterministic, FiniteDiscrete>;

  /// Throws ValidationError on out-of-range parameters.
  explicit CountLaw(Variant law);

  static CountLaw geometric(double success_prob) { return CountLaw(Geometric{success_prob}); }
  static CountLaw poisson(double rate) { return CountLaw(Poisson{rate}); }
  static CountLaw deterministic(std::uint64_t value) { return CountLaw(Deterministic{value}); }
  static CountLaw finite(std::vector<double> pmf) { return CountLaw(FiniteDiscrete{std::move(pmf)}); }
  static CountLaw bernoulli(double p) { return finite({1.0 - p, p}); }

  const Variant& variant() const { return law_; }
  std::string_view kind() const;

  double mean() const;
  double variance() const;
  double prob_zero() const;
  bool concentrated_at_zero() const { return prob_zero() >= 1.0; }

  std::uint64_t sample(Rng& rng) const;

  bool operator==(const CountLaw& other) const { return law_ == other.law_; }

 private:
  Variant law_;
  std::vector<double> cdf_;  // FiniteDiscrete only
};

using OffspringLaw = CountLaw;
using ImmigrationLaw = CountLaw;

struct EnvironmentAtom {
  OffspringLaw offspring;
  ImmigrationLaw immigration;
  bool operator==(const EnvironmentAtom&) const = default;
};

/// Finite mixture of environment atoms. Construction validates every
/// invariant and reports all violations in one ValidationError.
class EnvironmentModel {
 public:
  EnvironmentModel(std::vector<EnvironmentAtom> atoms, std::vector<double> probs);

  /// Every violated invariant, as human-readable messages. Empty when valid.
  static std::vector<std::string> violations(std::span<const EnvironmentAtom> atoms,
                                             std::span<const double> probs);

  std::size_t size() const { return atoms_.size(); }
  const std::vector<EnvironmentAtom>& atoms() const { return atoms_; }
  const std::vector<double>& probs() const { return probs_; }
  const EnvironmentAtom& atom(std::size_t i) const { return atoms_[i]; }
  double prob(std::size_t i) const { return probs_[i]; }
  /// m(xi) for atom i.
  double offspring_mean(std::size_t i) const { return offspring_means_[i]; }
  const std::vector<double>& offspring_means() const { return offspring_means_; }

  std::size_t sample_index(Rng& rng) const;

  std::uint64_t summation_cap() const { return summation_cap_; }
  void set_summation_cap(std::uint64_t cap) { summation_cap_ = cap; }

  bool operator==(const EnvironmentModel& other) const {
    return atoms_ == other.atoms_ && probs_ == other.probs_;
  }

 private:
  std::vector<EnvironmentAtom> atoms_;
  std::vector<double> probs_;
  std::vector<double> offspring_means_;
  std::vector<double> cdf_;
  std::uint64_t summation_cap_ = kDefaultSummationCap;
};

/// Environment reweighted by m^kappa. Atoms with m = 0 keep a zero weight.
struct TiltedModel {
  std::vector<EnvironmentAtom> atoms;
  std::vector<double> probs;
  std::vector<double> offspring_means;
  double source_kappa = 0;
};

double mean_offspring(const EnvironmentAtom& atom);

/// Throws CramerNotSatisfied unless lambda(kappa) = 1 within 1e-9.
TiltedModel tilt(const EnvironmentModel& model, double kappa);

/// Sum of `count` i.i.d. offspring draws. O(1) for Geometric, Poisson and
/// Deterministic; FiniteDiscrete sums term by term and throws
/// SummationCapExceeded above `cap`. Throws OverflowGuard past 2^63-1.
std::uint64_t sample_progeny_sum(const EnvironmentAtom& atom, std::uint64_t count,
                                 Rng& rng, std::uint64_t cap = kDefaultSummationCap);

inline const EnvironmentAtom& sample_environment(const EnvironmentModel& model, Rng& rng) {
  return model.atom(model.sample_index(rng));
}
inline std::uint64_t sample_immigration(const EnvironmentAtom& atom, Rng& rng) {
  return atom.immigration.sample(rng);
}

/// Two atoms with Geometric(2/3) and Geometric(1/3) offspring (m = 1/2 and
/// m = 2), immigration identically 1; `down_prob` is the weight on m = 1/2.
EnvironmentModel two_point_geometric_model(double down_prob);

/// Built-in presets: "ENV-A", "ENV-B", "ENV-C", "ENV-D" (kappa 2, 1, 1/2, 3)
/// and "ENV-K15" (kappa 3/2). Throws ValidationError for unknown names.
EnvironmentModel preset_model(std::string_view name);
bool is_preset_name(std::string_view name);
std::vector<std::string> preset_names();

}  // namespace bpire
