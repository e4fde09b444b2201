#pragma once

#include <cstdint>
#include <limits>

namespace bpire {

/// SplitMix64 finalizer. Used both to seed engines and as a counter-based
/// hash for stream derivation.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Task kinds for stream derivation. A stream is identified by
/// (masterSeed, kind, index), so results never depend on how tasks are
/// scheduled over workers.
enum class StreamKind : std::uint64_t {
  kStationaryChain = 1,
  kResidualStep = 2,
  kTrajectory = 3,
  kGoldie = 4,
  kThetaDirect = 5,
  kFrechetStretch = 6,
  kSumStretch = 7,
  kClusterProposal = 8,
  kWalk = 9,
  kWalkEnvironment = 10,
  kLChain = 11,
  kPositionWalk = 12,
  kSurrogate = 13,
  kPilot = 14,
};

constexpr std::uint64_t derive_seed(std::uint64_t master, StreamKind kind,
                                    std::uint64_t index) noexcept {
  const std::uint64_t k = splitmix64(static_cast<std::uint64_t>(kind) * 0xD1B54A32D192ED03ULL);
  return splitmix64(splitmix64(master ^ k) + index * 0x9E3779B97F4A7C15ULL);
}

/// Maps 64 random bits to a double in the open interval (0, 1).
constexpr double bits_to_unit(std::uint64_t bits) noexcept {
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

/// xoshiro256** engine. Satisfies UniformRandomBitGenerator.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed) noexcept {
    std::uint64_t s = seed;
    for (auto& w : state_) {
      s = splitmix64(s);
      w = s;
    }
  }

  Rng(std::uint64_t master, StreamKind kind, std::uint64_t index) noexcept
      : Rng(derive_seed(master, kind, index)) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() noexcept {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  /// Uniform on (0, 1); never returns 0 or 1.
  double uniform() noexcept { return bits_to_unit((*this)()); }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
    return (x << k) | (x >> (64 - k));
  }
  std::uint64_t state_[4]{};
};

// Samplers are written out instead of using <random> distributions so the
// draws are identical across standard library implementations.

/// Exponential with the given rate, by inverse CDF.
double sample_exponential(Rng& rng, double rate);
double sample_standard_normal(Rng& rng);
/// Gamma(shape, 1). Stable for very large shapes.
double sample_gamma(Rng& rng, double shape);
/// Poisson(mean). Exact for all means (inversion below 10, PTRS above with a
/// saddle-point log-density so that means up to ~1e18 stay accurate).
double sample_poisson(Rng& rng, double mean);
/// Failures before the first success, P(k) = (1-p)^k p.
std::uint64_t sample_geometric(Rng& rng, double success_prob);
/// Sum of `count` geometric(success_prob) variables (negative binomial).
double sample_negative_binomial(Rng& rng, double count, double success_prob);

/// log(1+x) - x, accurate for small |x|.
double log1pmx(double x);
/// log of the Poisson pmf at integer-valued k, accurate for huge arguments.
double log_poisson_pmf(double k, double mean);

}  // namespace bpire
