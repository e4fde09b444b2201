#include "bpire/stable_limits.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "bpire/cramer.hpp"
#include "bpire/errors.hpp"
#include "bpire/parallel.hpp"
#include "bpire/stats.hpp"

namespace bpire {

std::string_view to_string(KappaRegime regime) {
  switch (regime) {
    case KappaRegime::kSub1: return "sub1";
    case KappaRegime::kEq1: return "eq1";
    case KappaRegime::kBetween1And2: return "between1and2";
    case KappaRegime::kAbove2: return "above2";
  }
  return "unknown";
}

KappaRegime classify_regime(double kappa) {
  if (std::abs(kappa - 2.0) <= 0.02) {
    throw RegimeMismatch("kappa within 0.02 of 2: the boundary case needs a different "
                         "normalisation and centering and is excluded");
  }
  if (std::abs(kappa - 1.0) < 1e-6) return KappaRegime::kEq1;
  if (kappa < 1) return KappaRegime::kSub1;
  if (kappa < 2) return KappaRegime::kBetween1And2;
  return KappaRegime::kAbove2;
}

double truncated_mean_centering(std::span<const std::uint64_t> batch, double n, double a_n,
                                double* std_err) {
  if (batch.empty()) throw DomainError("centering needs a nonempty batch");
  std::vector<double> terms(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const double x = static_cast<double>(batch[i]) / a_n;
    terms[i] = x <= 1.0 ? x : 0.0;
  }
  if (std_err) *std_err = n * std::sqrt(stats::variance(terms) / static_cast<double>(terms.size()));
  return n * stats::mean(terms);
}

SumExperiment partial_sum_experiment(const EnvironmentModel& model, double kappa, double C,
                                     std::uint64_t n, std::size_t reps, std::uint64_t seed,
                                     const StationaryBatch* centering_batch, unsigned workers) {
  if (n == 0) throw DomainError("partial_sum_experiment needs n >= 1");
  SumExperiment ex;
  ex.n = n;
  ex.reps = reps;
  ex.regime = classify_regime(kappa);
  const double nd = static_cast<double>(n);
  if (ex.regime != KappaRegime::kSub1 && !centering_batch) {
    throw DomainError("kappa >= 1 needs a stationary batch for the centering");
  }

  const std::uint64_t burn_in = recommended_burnin(model, kappa);
  std::vector<double> sums(reps);
  parallel_for(reps, workers, [&](std::size_t r) {
    Rng rng(seed, StreamKind::kSumStretch, r);
    std::uint64_t x = 0;
    for (std::uint64_t s = 0; s < burn_in; ++s) x = step(x, model, rng);
    long double acc = 0;
    for (std::uint64_t s = 0; s < n; ++s) {
      x = step(x, model, rng);
      acc += static_cast<long double>(x);
    }
    sums[r] = static_cast<double>(acc);
  });

  ex.normalized_sums.resize(reps);
  if (ex.regime == KappaRegime::kAbove2) {
    double em = 0;
    for (std::size_t i = 0; i < model.size(); ++i) em += model.prob(i) * model.offspring_mean(i);
    ex.stationary_mean = stationary_mean(model);
    ex.batch_variance = stats::variance(stats::to_double(centering_batch->values));
    ex.sigma = std::sqrt((1 + em) / (1 - em) * ex.batch_variance);
    std::vector<double> scaled(reps);
    for (std::size_t r = 0; r < reps; ++r) {
      scaled[r] = sums[r] / std::sqrt(nd);
      ex.normalized_sums[r] = (sums[r] - nd * ex.stationary_mean) / (std::sqrt(nd) * ex.sigma);
    }
    ex.raw_scaled_variance = stats::variance(scaled);
    return ex;
  }

  ex.a_n = std::pow(C * nd, 1.0 / kappa);
  if (ex.regime != KappaRegime::kSub1) {
    ex.b_n = truncated_mean_centering(centering_batch->values, nd, ex.a_n, &ex.b_n_std_err);
  }
  for (std::size_t r = 0; r < reps; ++r) ex.normalized_sums[r] = sums[r] / ex.a_n - ex.b_n;
  return ex;
}

CenteringGrowth centering_growth(std::span<const std::uint64_t> batch, double C,
                                 std::span<const double> n_grid) {
  if (n_grid.size() < 2) throw DomainError("centering_growth needs at least two n values");
  CenteringGrowth g;
  std::vector<double> log_n;
  for (double n : n_grid) {
    g.n_grid.push_back(n);
    g.b_n.push_back(truncated_mean_centering(batch, n, C * n));
    log_n.push_back(std::log(n));
  }
  const auto fit = stats::least_squares(log_n, g.b_n);
  g.slope = fit.slope;
  g.slope_std_err = fit.slope_stderr;
  return g;
}

StableFitResult stable_index_fit(std::span<const double> sums, double phi_low, double phi_high) {
  if (sums.size() < 2) throw IllConditionedFit("stable_index_fit needs a sample");
  // Scale the t-grid by the interquartile range so the fit window is found
  // whatever the units of the sums.
  std::vector<double> sorted(sums.begin(), sums.end());
  std::sort(sorted.begin(), sorted.end());
  double spread = stats::quantile_sorted(sorted, 0.75) - stats::quantile_sorted(sorted, 0.25);
  if (!(spread > 0)) spread = std::max(1e-300, std::abs(sorted.back() - sorted.front()));
  if (!(spread > 0)) throw IllConditionedFit("degenerate sample");

  constexpr int kGrid = 240;
  const double t0 = 1e-3 / spread;
  const double t1 = 1e3 / spread;
  const double nn = static_cast<double>(sums.size());

  std::vector<double> ts;
  std::vector<double> mods;
  std::vector<double> phases;
  double prev_phase = 0;
  double phase_offset = 0;
  for (int j = 0; j < kGrid; ++j) {
    const double t = t0 * std::pow(t1 / t0, static_cast<double>(j) / (kGrid - 1));
    double re = 0;
    double im = 0;
    for (double x : sums) {
      re += std::cos(t * x);
      im += std::sin(t * x);
    }
    re /= nn;
    im /= nn;
    double ph = std::atan2(im, re);
    if (j > 0) {
      while (ph + phase_offset - prev_phase > std::numbers::pi) phase_offset -= 2 * std::numbers::pi;
      while (ph + phase_offset - prev_phase < -std::numbers::pi) phase_offset += 2 * std::numbers::pi;
    }
    ph += phase_offset;
    prev_phase = ph;
    ts.push_back(t);
    mods.push_back(std::hypot(re, im));
    phases.push_back(ph);
  }

  std::vector<double> lx;
  std::vector<double> ly;
  std::vector<std::size_t> used;
  for (std::size_t j = 0; j < ts.size(); ++j) {
    if (mods[j] >= phi_low && mods[j] <= phi_high) {
      lx.push_back(std::log(ts[j]));
      ly.push_back(std::log(-std::log(mods[j])));
      used.push_back(j);
    }
  }
  if (used.size() < 8) {
    throw IllConditionedFit("only " + std::to_string(used.size()) +
                            " grid points have |phi| inside the fit window");
  }
  const auto fit = stats::least_squares(lx, ly);
  StableFitResult out;
  out.alpha_hat = fit.slope;
  out.d_hat = std::exp(fit.intercept);
  out.scale_hat = std::pow(out.d_hat, 1.0 / out.alpha_hat);
  out.grid_points = used.size();
  out.t_low = ts[used.front()];
  out.t_high = ts[used.back()];

  // Phase = d beta tan(pi alpha/2) t^alpha + mu t; two-regressor least squares.
  const double tg = std::tan(std::numbers::pi * out.alpha_hat / 2);
  if (std::abs(tg) > 1e-8 && std::abs(out.alpha_hat - 1.0) > 1e-3) {
    double s11 = 0, s12 = 0, s22 = 0, r1 = 0, r2 = 0;
    for (std::size_t j : used) {
      const double f1 = out.d_hat * tg * std::pow(ts[j], out.alpha_hat);
      const double f2 = ts[j];
      s11 += f1 * f1;
      s12 += f1 * f2;
      s22 += f2 * f2;
      r1 += f1 * phases[j];
      r2 += f2 * phases[j];
    }
    const double det = s11 * s22 - s12 * s12;
    if (std::abs(det) > 1e-300) {
      out.skew_hat = (r1 * s22 - r2 * s12) / det;
      out.location_hat = (s11 * r2 - s12 * r1) / det;
    }
  }
  return out;
}

ClusterMomentEstimate cluster_moment(const EnvironmentModel& model, double kappa,
                                     std::uint64_t horizon, std::size_t proposals,
                                     std::uint64_t seed, unsigned workers) {
  if (horizon == 0 || proposals == 0) throw DomainError("cluster_moment needs horizon, proposals >= 1");
  const TiltedModel tilted = tilt(model, kappa);
  std::vector<double> fwd(model.size());
  std::vector<double> bwd(model.size());
  std::vector<double> tilted_cdf;
  double acc_p = 0;
  for (std::size_t i = 0; i < model.size(); ++i) {
    const double m = model.offspring_mean(i);
    fwd[i] = m > 0 ? std::log(m) : -INFINITY;
    bwd[i] = m > 0 ? -std::log(m) : -INFINITY;
    acc_p += tilted.probs[i];
    tilted_cdf.push_back(acc_p);
  }
  auto sample_tilted = [&](Rng& rng) {
    const double u = rng.uniform() * tilted_cdf.back();
    const auto it = std::upper_bound(tilted_cdf.begin(), tilted_cdf.end(), u);
    return std::min<std::size_t>(static_cast<std::size_t>(it - tilted_cdf.begin()), tilted_cdf.size() - 1);
  };

  // Per-path remainder after the horizon, approximated by the geometric
  // series of the mean drift on each side: e^{S_H} q/(1-q), q = e^{drift}.
  // Forward drift is E log m, backward drift is -E* log m* = -lambda'(kappa).
  const double q_fwd = std::exp(mean_log_m(model));
  const double q_bwd = std::exp(-lambda_prime(model, kappa));
  const double tail_fwd = q_fwd / (1 - q_fwd);
  const double tail_bwd = q_bwd / (1 - q_bwd);

  std::vector<double> value(proposals, -1.0);
  std::vector<unsigned char> flagged(proposals, 0);
  parallel_for(proposals, workers, [&](std::size_t p) {
    Rng rng(seed, StreamKind::kClusterProposal, p);
    double sum = 1.0;
    double s = 0;
    for (std::uint64_t t = 0; t < horizon; ++t) {
      s += fwd[model.sample_index(rng)];
      if (s > 0) return;
      sum += std::exp(s);
    }
    const double s_fwd = s;
    s = 0;
    for (std::uint64_t t = 0; t < horizon; ++t) {
      s += bwd[sample_tilted(rng)];
      if (s >= 0) return;
      sum += std::exp(s);
    }
    const double remainder = tail_fwd * std::exp(s_fwd) + tail_bwd * std::exp(s);
    flagged[p] = remainder > 1e-3 * sum;
    value[p] = std::pow(sum, kappa);
  });

  ClusterMomentEstimate est;
  est.horizon = horizon;
  est.proposals = proposals;
  std::vector<double> accepted;
  std::size_t flags = 0;
  for (std::size_t p = 0; p < proposals; ++p) {
    if (value[p] < 0) continue;
    accepted.push_back(value[p]);
    flags += flagged[p];
  }
  est.accepted = accepted.size();
  est.acceptance_rate = static_cast<double>(est.accepted) / static_cast<double>(proposals);
  if (accepted.empty()) throw HorizonTooSmall("cluster_moment accepted no proposal");
  est.flagged_fraction = static_cast<double>(flags) / static_cast<double>(est.accepted);
  if (est.flagged_fraction > 0.01) {
    throw HorizonTooSmall("horizon tail bound exceeds 1e-3 of the sum on more than 1% of paths");
  }
  est.value = stats::mean(accepted);
  est.std_err = std::sqrt(stats::variance(accepted) / static_cast<double>(accepted.size()));
  return est;
}

double stable_scale_d(double kappa, double theta, double cluster_moment_value) {
  if (std::abs(kappa - 1.0) < 1e-6) return theta * std::numbers::pi / 2 * cluster_moment_value;
  return theta * std::tgamma(1 - kappa) * cluster_moment_value * std::cos(std::numbers::pi * kappa / 2);
}

std::complex<double> theoretical_chf(double kappa, double d, double c, double t) {
  using namespace std::complex_literals;
  if (t == 0) return 1.0;
  const double sg = t > 0 ? 1.0 : -1.0;
  const double at = std::abs(t);
  std::complex<double> expo;
  if (std::abs(kappa - 1.0) < 1e-12) {
    expo = -d * at * (1.0 + 1i * (2.0 / std::numbers::pi) * sg * std::log(at)) + 1i * c * t;
  } else {
    expo = -d * std::pow(at, kappa) * (1.0 - 1i * sg * std::tan(std::numbers::pi * kappa / 2)) + 1i * c * t;
  }
  return std::exp(expo);
}

}  // namespace bpire
