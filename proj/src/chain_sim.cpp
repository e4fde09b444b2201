#include "bpire/chain_sim.hpp"

#include <cmath>
#include <limits>

#include "bpire/cramer.hpp"
#include "bpire/errors.hpp"
#include "bpire/model_io.hpp"
#include "bpire/parallel.hpp"
#include "bpire/stats.hpp"

namespace bpire {

namespace {
constexpr std::uint64_t kMaxState = std::numeric_limits<std::int64_t>::max();
}

std::uint64_t step(std::uint64_t x, const EnvironmentModel& model, Rng& rng) {
  const EnvironmentAtom& atom = sample_environment(model, rng);
  const std::uint64_t progeny = sample_progeny_sum(atom, x, rng, model.summation_cap());
  std::uint64_t next = 0;
  if (__builtin_add_overflow(progeny, sample_immigration(atom, rng), &next) || next > kMaxState) {
    throw OverflowGuard("chain state exceeds 2^63-1 (supercritical configuration?)");
  }
  return next;
}

TrajectorySample simulate_forward(const ChainConfig& config, std::size_t n) {
  if (n == 0) throw DomainError("simulate_forward needs n >= 1");
  Rng rng(config.seed, StreamKind::kTrajectory, 0);
  std::uint64_t x = config.initial_value;
  for (std::uint64_t i = 0; i < config.burn_in; ++i) x = step(x, config.model, rng);
  TrajectorySample out;
  out.start_index = config.burn_in + 1;
  out.values.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    x = step(x, config.model, rng);
    out.values[i] = x;
  }
  return out;
}

double bias_bound_exponent(const EnvironmentModel& model, double kappa, std::uint64_t burn_in) {
  const double alpha = argmin_lambda(model, std::min(1.0, kappa));
  return static_cast<double>(burn_in) * std::log(lambda(model, alpha));
}

std::uint64_t recommended_burnin(const EnvironmentModel& model, double kappa, double target_bias) {
  if (target_bias >= 1.0) return 1;
  const double per_step = bias_bound_exponent(model, kappa, 1);
  const double h = std::ceil(std::log(target_bias) / per_step);
  return std::max<std::uint64_t>(1, static_cast<std::uint64_t>(h));
}

StationaryBatch sample_stationary(const EnvironmentModel& model, std::uint64_t burn_in,
                                  std::size_t count, std::uint64_t seed, unsigned workers) {
  // Without a Cramer root (every m <= 1) lambda < 1 on all of (0, 1].
  double kappa = 1.0;
  try {
    kappa = solve_kappa(model).kappa;
  } catch (const NoCramerRoot&) {
  }
  StationaryBatch batch;
  batch.burn_in = burn_in;
  batch.seed = seed;
  batch.model_fingerprint = model_fingerprint(model);
  batch.bias_bound_exponent = bias_bound_exponent(model, kappa, burn_in);
  batch.burn_in_too_small = batch.bias_bound_exponent > std::log(1e-6);
  batch.values.resize(count);
  parallel_for(count, workers, [&](std::size_t i) {
    Rng rng(seed, StreamKind::kStationaryChain, i);
    std::uint64_t x = 0;
    for (std::uint64_t s = 0; s < burn_in; ++s) x = step(x, model, rng);
    batch.values[i] = x;
  });
  return batch;
}

double fixed_point_residual(const EnvironmentModel& model, std::span<const std::uint64_t> values,
                            std::uint64_t seed, unsigned workers) {
  if (values.empty()) throw DomainError("fixed_point_residual needs a nonempty batch");
  std::vector<double> evolved(values.size());
  parallel_for(values.size(), workers, [&](std::size_t i) {
    Rng rng(seed, StreamKind::kResidualStep, i);
    evolved[i] = static_cast<double>(step(values[i], model, rng));
  });
  const auto original = stats::to_double(values);
  return stats::ks_two_sample(original, evolved);
}

double stationary_mean(const EnvironmentModel& model) {
  double em = 0;
  double eb = 0;
  for (std::size_t i = 0; i < model.size(); ++i) {
    em += model.prob(i) * model.offspring_mean(i);
    eb += model.prob(i) * model.atom(i).immigration.mean();
  }
  if (!(em < 1.0)) throw DomainError("stationary mean is infinite when E m >= 1");
  return eb / (1.0 - em);
}

}  // namespace bpire
