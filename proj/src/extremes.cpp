#include "bpire/extremes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "bpire/chain_sim.hpp"
#include "bpire/cramer.hpp"
#include "bpire/errors.hpp"
#include "bpire/parallel.hpp"
#include "bpire/stats.hpp"

namespace bpire {

std::string_view to_string(ThetaMethod method) {
  switch (method) {
    case ThetaMethod::kExactLattice: return "exactLattice";
    case ThetaMethod::kDirectMC: return "directMC";
    case ThetaMethod::kBlocks: return "blocks";
  }
  return "unknown";
}

namespace {

struct DirectTally {
  std::vector<unsigned char> success;
  std::vector<double> bias;
};

// One replicate per index; `bias` is the Lundberg bound e^{-kappa y} on the
// walk later climbing the gap y between -E0 and S_horizon.
DirectTally run_direct(const EnvironmentModel& model, double kappa, std::uint64_t horizon,
                       std::size_t reps, std::uint64_t seed, StreamKind kind, unsigned workers) {
  std::vector<double> logs(model.size());
  for (std::size_t i = 0; i < model.size(); ++i) {
    const double m = model.offspring_mean(i);
    logs[i] = m > 0 ? std::log(m) : -std::numeric_limits<double>::infinity();
  }
  DirectTally out{std::vector<unsigned char>(reps), std::vector<double>(reps)};
  parallel_for(reps, workers, [&](std::size_t r) {
    Rng rng(seed, kind, r);
    const double e0 = sample_exponential(rng, kappa);
    double s = 0;
    double mx = -std::numeric_limits<double>::infinity();
    for (std::uint64_t t = 0; t < horizon; ++t) {
      s += logs[model.sample_index(rng)];
      mx = std::max(mx, s);
      if (e0 + mx > 0 || s == -std::numeric_limits<double>::infinity()) break;
    }
    const bool ok = e0 + mx <= 0;
    out.success[r] = ok;
    out.bias[r] = ok ? std::min(1.0, std::exp(-kappa * (-e0 - s))) : 0.0;
  });
  return out;
}

}  // namespace

ThetaEstimate theta_direct(const EnvironmentModel& model, double kappa, std::uint64_t horizon,
                           std::size_t reps, std::uint64_t seed, unsigned workers) {
  if (horizon == 0 || reps == 0) throw DomainError("theta_direct needs horizon >= 1 and reps >= 1");
  if (!(mean_log_m(model) < 0)) throw NotSubcritical("theta_direct needs E log m < 0");
  const DirectTally tally = run_direct(model, kappa, horizon, reps, seed, StreamKind::kThetaDirect, workers);
  double hits = 0;
  double bias = 0;
  for (std::size_t r = 0; r < reps; ++r) {
    hits += tally.success[r];
    bias += tally.bias[r];
  }
  ThetaEstimate est;
  est.method = ThetaMethod::kDirectMC;
  est.horizon = horizon;
  est.value = hits / static_cast<double>(reps);
  est.std_err = std::sqrt(est.value * (1 - est.value) / static_cast<double>(reps));
  est.truncation_bias_bound = bias / static_cast<double>(reps);
  return est;
}

std::uint64_t default_theta_horizon(const EnvironmentModel& model, double kappa,
                                    std::uint64_t seed, double target_bias) {
  constexpr std::size_t kPilotReps = 10'000;
  for (std::uint64_t h = 25; h <= (1ULL << 24); h *= 2) {
    const DirectTally t = run_direct(model, kappa, h, kPilotReps, seed, StreamKind::kPilot, 1);
    double bias = 0;
    for (double b : t.bias) bias += b;
    if (bias / kPilotReps < target_bias) return h;
  }
  throw DomainError("no theta_direct horizon reaches the target truncation bias");
}

ThetaEstimate theta_lattice_exact(const EnvironmentModel& model, double kappa) {
  if (model.size() != 2) throw NotTwoPointLattice("closed form needs exactly two atoms");
  std::size_t up = model.offspring_mean(0) > model.offspring_mean(1) ? 0 : 1;
  const double mu = model.offspring_mean(up);
  const double md = model.offspring_mean(1 - up);
  if (!(md > 0) || !(mu > 1) || std::abs(mu * md - 1.0) > 1e-12) {
    throw NotTwoPointLattice("offspring means are not of the form e^{-h}, e^{h}");
  }
  const double a = model.prob(up);
  if (!(a < 0.5)) throw NotTwoPointLattice("up-probability must be below 1/2");
  const double h = std::log(mu);
  const double r = a / (1 - a);
  ThetaEstimate est;
  est.method = ThetaMethod::kExactLattice;
  est.value = (1 - a) * (1 - r) * (1 - std::exp(-kappa * h));
  return est;
}

ThetaEstimate theta_blocks(std::span<const std::vector<std::uint64_t>> paths,
                           std::size_t block_length, double threshold_quantile,
                           std::size_t min_exceedances) {
  if (block_length == 0) throw DomainError("theta_blocks needs block_length >= 1");
  // Quantile over the complete blocks only, so the threshold matches the data used.
  std::vector<std::vector<std::uint64_t>> trimmed;
  for (const auto& p : paths) {
    const std::size_t keep = p.size() / block_length * block_length;
    trimmed.emplace_back(p.begin(), p.begin() + static_cast<std::ptrdiff_t>(keep));
  }
  std::vector<std::uint64_t> all;
  for (const auto& p : trimmed) all.insert(all.end(), p.begin(), p.end());
  if (all.empty()) throw TooFewExceedances("no complete block");
  std::vector<double> sorted(all.begin(), all.end());
  all.clear();
  all.shrink_to_fit();
  std::sort(sorted.begin(), sorted.end());
  const double u = stats::quantile_sorted(sorted, threshold_quantile);

  std::size_t exceed = 0;
  std::size_t blocks_hit = 0;
  for (const auto& p : trimmed) {
    for (std::size_t b = 0; b < p.size(); b += block_length) {
      bool hit = false;
      for (std::size_t i = b; i < b + block_length; ++i) {
        if (static_cast<double>(p[i]) > u) {
          ++exceed;
          hit = true;
        }
      }
      blocks_hit += hit;
    }
  }
  if (exceed < min_exceedances) {
    throw TooFewExceedances("blocks estimator found " + std::to_string(exceed) + " exceedances");
  }
  ThetaEstimate est;
  est.method = ThetaMethod::kBlocks;
  est.exceedances = exceed;
  est.value = static_cast<double>(blocks_hit) / static_cast<double>(exceed);
  // Binomial approximation; ignores the dependence between clusters.
  est.std_err = std::sqrt(est.value * (1 - est.value) / static_cast<double>(exceed));
  return est;
}

double frechet_cdf(double x, double theta, double kappa) {
  if (!(x > 0)) return 0.0;
  return std::exp(-theta * std::pow(x, -kappa));
}

FrechetFit frechet_fit(std::span<const double> maxima, double a_n, double theta, double kappa,
                       std::uint64_t block_length) {
  if (!(a_n > 0)) throw DomainError("frechet_fit needs a_n > 0");
  std::vector<double> scaled(maxima.begin(), maxima.end());
  for (double& v : scaled) v /= a_n;
  FrechetFit fit;
  fit.block_length = block_length;
  fit.maxima_count = scaled.size();
  fit.a_n = a_n;
  fit.theta = theta;
  fit.kappa = kappa;
  fit.ks_distance = stats::ks_one_sample(scaled, [&](double x) { return frechet_cdf(x, theta, kappa); });
  return fit;
}

FrechetFit frechet_gof(const EnvironmentModel& model, double kappa, double C, std::uint64_t n,
                       std::size_t reps, double theta, std::uint64_t seed, unsigned workers) {
  if (n == 0) throw DomainError("frechet_gof needs n >= 1");
  const std::uint64_t burn_in = recommended_burnin(model, kappa);
  std::vector<double> maxima(reps);
  parallel_for(reps, workers, [&](std::size_t r) {
    Rng rng(seed, StreamKind::kFrechetStretch, r);
    std::uint64_t x = 0;
    for (std::uint64_t s = 0; s < burn_in; ++s) x = step(x, model, rng);
    std::uint64_t mx = 0;
    for (std::uint64_t s = 0; s < n; ++s) {
      x = step(x, model, rng);
      mx = std::max(mx, x);
    }
    maxima[r] = static_cast<double>(mx);
  });
  return frechet_fit(maxima, std::pow(C * static_cast<double>(n), 1.0 / kappa), theta, kappa, n);
}

double a_n_from_quantile(std::span<const std::uint64_t> batch, std::uint64_t n) {
  if (batch.empty() || n == 0) throw DomainError("a_n_from_quantile needs a batch and n >= 1");
  const auto values = stats::to_double(batch);
  return stats::quantile(values, 1.0 - 1.0 / static_cast<double>(n));
}

}  // namespace bpire
