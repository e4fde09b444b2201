#include "bpire/tail_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>

#include "bpire/cramer.hpp"
#include "bpire/errors.hpp"
#include "bpire/parallel.hpp"
#include "bpire/stats.hpp"

namespace bpire {

HillResult hill_estimator(std::span<const double> values, std::size_t k) {
  if (k == 0 || k >= values.size()) {
    throw DomainError("hill_estimator needs 0 < k < sample size");
  }
  std::vector<double> top(values.begin(), values.end());
  std::nth_element(top.begin(), top.begin() + static_cast<std::ptrdiff_t>(k), top.end(),
                   std::greater<>());
  const double threshold = top[k];
  if (!(threshold > 0)) throw DomainError("hill_estimator: order statistic X_(k+1) must be > 0");
  double acc = 0;
  double largest = threshold;
  for (std::size_t i = 0; i < k; ++i) {
    acc += std::log(top[i] / threshold);
    largest = std::max(largest, top[i]);
  }
  if (largest == threshold || acc <= 0) {
    throw DegenerateTail("top order statistics are all equal; tail index undefined");
  }
  HillResult out;
  out.k = k;
  out.threshold = threshold;
  out.kappa_hat = static_cast<double>(k) / acc;
  out.std_err = out.kappa_hat / std::sqrt(static_cast<double>(k));
  return out;
}

GoldieEstimate goldie_C_formula(const EnvironmentModel& model, double kappa,
                                std::span<const std::uint64_t> batch, std::uint64_t seed,
                                unsigned workers) {
  if (batch.empty()) throw DomainError("goldie_C_formula needs a nonempty batch");
  std::vector<double> terms(batch.size());
  parallel_for(batch.size(), workers, [&](std::size_t i) {
    Rng rng(seed, StreamKind::kGoldie, i);
    const std::size_t a = model.sample_index(rng);
    const EnvironmentAtom& atom = model.atom(a);
    const std::uint64_t x = batch[i];
    const double psi = static_cast<double>(sample_progeny_sum(atom, x, rng, model.summation_cap()) +
                                           sample_immigration(atom, rng));
    const double mx = model.offspring_mean(a) * static_cast<double>(x);
    terms[i] = std::pow(psi, kappa) - std::pow(mx, kappa);
  });
  GoldieEstimate out;
  out.numerator = stats::mean(terms);
  out.numerator_std_err = std::sqrt(stats::variance(terms) / static_cast<double>(terms.size()));
  out.lambda_prime = lambda_prime(model, kappa);
  const double denom = kappa * out.lambda_prime;
  out.C = out.numerator / denom;
  out.C_std_err = out.numerator_std_err / std::abs(denom);
  return out;
}

PlateauResult tail_plateau(std::span<const double> values, double kappa, double x_low,
                           double x_high, const PlateauOptions& options) {
  if (!(x_low > 0) || !(x_high > x_low)) throw DomainError("tail_plateau needs 0 < x_low < x_high");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(options.sample_size ? options.sample_size : sorted.size());
  auto exceed = [&](double x) {
    return static_cast<std::size_t>(sorted.end() - std::upper_bound(sorted.begin(), sorted.end(), x));
  };

  PlateauResult out;
  std::vector<double> grid;
  if (options.lattice_factor > 1) {
    const double log_l = std::log(options.lattice_factor);
    const auto periods = static_cast<int>(std::floor(std::log(x_high / x_low) / log_l + 1e-12));
    if (periods < 1) {
      throw DomainError("plateau window is shorter than one lattice period");
    }
    const int g = options.grid_per_period;
    // Midpoint rule over whole periods: a Cesaro mean of the periodic tail.
    for (int j = 0; j < periods * g; ++j) {
      grid.push_back(x_low * std::exp(log_l * (j + 0.5) / g));
    }
    out.x_low = x_low;
    out.x_high = x_low * std::pow(options.lattice_factor, periods);
  } else {
    const int g = 64;
    for (int j = 0; j < g; ++j) {
      grid.push_back(x_low * std::pow(x_high / x_low, static_cast<double>(j) / (g - 1)));
    }
    out.x_low = x_low;
    out.x_high = x_high;
  }
  out.exceedances_at_high = exceed(out.x_high);
  if (out.exceedances_at_high < options.min_exceedances) {
    throw InsufficientExceedances("only " + std::to_string(out.exceedances_at_high) +
                                  " values exceed the window's upper end");
  }
  double acc = 0;
  for (double x : grid) acc += std::pow(x, kappa) * static_cast<double>(exceed(x)) / n;
  out.grid_points = grid.size();
  out.plateau_C = acc / static_cast<double>(grid.size());
  return out;
}

namespace {

std::vector<LawAtom> merge_atoms(std::vector<LawAtom> atoms) {
  std::sort(atoms.begin(), atoms.end(), [](const LawAtom& a, const LawAtom& b) { return a.value < b.value; });
  std::vector<LawAtom> out;
  for (const auto& a : atoms) {
    if (a.prob <= 0) continue;
    if (!out.empty() && std::abs(a.value - out.back().value) <= 1e-9 * std::max(1.0, a.value)) {
      out.back().prob += a.prob;
    } else {
      out.push_back(a);
    }
  }
  return out;
}

}  // namespace

std::vector<LawAtom> reference_ratio_law(const EnvironmentModel& model, double kappa, int lag) {
  std::vector<LawAtom> step;
  if (lag > 0) {
    for (std::size_t i = 0; i < model.size(); ++i) step.push_back({model.offspring_mean(i), model.prob(i)});
  } else if (lag < 0) {
    const TiltedModel t = tilt(model, kappa);
    for (std::size_t i = 0; i < t.probs.size(); ++i) {
      if (t.offspring_means[i] > 0 && t.probs[i] > 0) step.push_back({1.0 / t.offspring_means[i], t.probs[i]});
    }
  }
  std::vector<LawAtom> law{{1.0, 1.0}};
  for (int s = 0; s < std::abs(lag); ++s) {
    std::vector<LawAtom> next;
    for (const auto& a : law) {
      for (const auto& b : step) next.push_back({a.value * b.value, a.prob * b.prob});
    }
    law = merge_atoms(std::move(next));
  }
  return law;
}

double pooled_quantile(std::span<const std::vector<std::uint64_t>> paths, double q) {
  std::vector<std::uint64_t> all;
  for (const auto& p : paths) all.insert(all.end(), p.begin(), p.end());
  if (all.empty()) throw DomainError("pooled_quantile of empty paths");
  const double h = (static_cast<double>(all.size()) - 1) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  std::nth_element(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(lo), all.end());
  const double v_lo = static_cast<double>(all[lo]);
  if (lo + 1 >= all.size()) return v_lo;
  const double v_hi = static_cast<double>(*std::min_element(all.begin() + static_cast<std::ptrdiff_t>(lo) + 1, all.end()));
  return v_lo + (h - static_cast<double>(lo)) * (v_hi - v_lo);
}

SpectralTestReport spectral_ratio_test(const EnvironmentModel& model, double kappa, int lag,
                                       std::span<const std::vector<std::uint64_t>> paths,
                                       double threshold_quantile, std::size_t min_exceedances) {
  SpectralTestReport rep;
  rep.lag = lag;
  rep.threshold_quantile = threshold_quantile;
  rep.threshold = pooled_quantile(paths, threshold_quantile);
  rep.reference = reference_ratio_law(model, kappa, lag);

  std::vector<double> counts(rep.reference.size(), 0.0);
  std::size_t matched = 0;
  auto nearest = [&](double ratio) {
    std::size_t best = 0;
    double best_d = INFINITY;
    for (std::size_t j = 0; j < rep.reference.size(); ++j) {
      const double ref = rep.reference[j].value;
      double d;
      if (ratio == 0 || ref == 0) {
        d = (ratio == ref) ? 0.0 : INFINITY;
      } else {
        d = std::abs(std::log(ratio / ref));
      }
      if (d < best_d) {
        best_d = d;
        best = j;
      }
    }
    return best;
  };
  for (const auto& path : paths) {
    const auto len = static_cast<std::ptrdiff_t>(path.size());
    for (std::ptrdiff_t t = 0; t < len; ++t) {
      if (static_cast<double>(path[t]) <= rep.threshold) continue;
      const std::ptrdiff_t u = t + lag;
      if (u < 0 || u >= len) continue;
      const double ratio = static_cast<double>(path[u]) / static_cast<double>(path[t]);
      const std::size_t j = nearest(ratio);
      counts[j] += 1;
      const double ref = rep.reference[j].value;
      if ((ref == 0 && ratio == 0) || (ref > 0 && std::abs(ratio / ref - 1.0) <= 0.05)) ++matched;
      ++rep.exceedances;
    }
  }
  if (rep.exceedances < min_exceedances) {
    throw TooFewExceedances("spectral test found " + std::to_string(rep.exceedances) +
                            " exceedances, need " + std::to_string(min_exceedances));
  }
  const double total = static_cast<double>(rep.exceedances);
  double cum_emp = 0;
  double cum_ref = 0;
  for (std::size_t j = 0; j < counts.size(); ++j) {
    rep.empirical.push_back({rep.reference[j].value, counts[j] / total});
    cum_emp += counts[j] / total;
    cum_ref += rep.reference[j].prob;
    rep.ks_distance = std::max(rep.ks_distance, std::abs(cum_emp - cum_ref));
  }
  rep.matched_fraction = static_cast<double>(matched) / total;
  return rep;
}

AnticlusteringReport anticlustering_diagnostic(double u, std::span<const std::size_t> k_list,
                                               std::size_t r,
                                               std::span<const std::vector<std::uint64_t>> paths,
                                               std::size_t min_events) {
  AnticlusteringReport rep;
  rep.threshold = u;
  rep.r = r;
  rep.k_list.assign(k_list.begin(), k_list.end());
  // For each conditioning event keep the farthest |t| <= r with an
  // exceedance; the event for k happens iff that distance is >= k.
  std::vector<std::size_t> hits(k_list.size(), 0);
  for (const auto& path : paths) {
    if (path.size() <= 2 * r) continue;
    for (std::size_t s = r; s + r < path.size(); ++s) {
      if (static_cast<double>(path[s]) <= u) continue;
      ++rep.conditioning_events;
      std::size_t farthest = 0;
      for (std::size_t t = r; t >= 1; --t) {
        if (static_cast<double>(path[s + t]) > u || static_cast<double>(path[s - t]) > u) {
          farthest = t;
          break;
        }
      }
      for (std::size_t j = 0; j < k_list.size(); ++j) {
        const std::size_t k = k_list[j];
        if (k == 0 || (k <= r && farthest >= k)) ++hits[j];
      }
    }
  }
  if (rep.conditioning_events < min_events) {
    throw TooFewExceedances("anticlustering diagnostic found " +
                            std::to_string(rep.conditioning_events) + " conditioning events");
  }
  const double n = static_cast<double>(rep.conditioning_events);
  for (std::size_t h : hits) {
    const double p = static_cast<double>(h) / n;
    rep.probability.push_back(p);
    rep.std_err.push_back(std::sqrt(p * (1 - p) / n));
  }
  return rep;
}

}  // namespace bpire
