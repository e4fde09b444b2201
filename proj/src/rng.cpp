#include "bpire/rng.hpp"

#include <cmath>
#include <numbers>

namespace bpire {

namespace {

// Stirling series remainder: log(n!) - [(n+1/2)log n - n + log(2 pi)/2].
double stirling_error(double n) {
  constexpr double s0 = 1.0 / 12;
  constexpr double s1 = 1.0 / 360;
  constexpr double s2 = 1.0 / 1260;
  constexpr double s3 = 1.0 / 1680;
  constexpr double s4 = 1.0 / 1188;
  if (n < 15.0) {
    return std::lgamma(n + 1.0) - (n + 0.5) * std::log(n) + n -
           0.5 * std::log(2.0 * std::numbers::pi);
  }
  const double nn = n * n;
  if (n > 500) return (s0 - s1 / nn) / n;
  if (n > 80) return (s0 - (s1 - s2 / nn) / nn) / n;
  if (n > 35) return (s0 - (s1 - (s2 - s3 / nn) / nn) / nn) / n;
  return (s0 - (s1 - (s2 - (s3 - s4 / nn) / nn) / nn) / nn) / n;
}

// Deviance term x log(x/np) + np - x, computed without cancellation.
double deviance(double x, double np) {
  if (std::abs(x - np) < 0.1 * (x + np)) {
    double v = (x - np) / (x + np);
    double s = (x - np) * v;
    double ej = 2 * x * v;
    v *= v;
    for (int j = 1; j < 1000; ++j) {
      ej *= v;
      const double s1 = s + ej / (2 * j + 1);
      if (s1 == s) return s1;
      s = s1;
    }
    return s;
  }
  return x * std::log(x / np) + np - x;
}

double poisson_inversion(Rng& rng, double mean) {
  const double u = rng.uniform();
  double p = std::exp(-mean);
  double cdf = p;
  double k = 0;
  while (u > cdf) {
    k += 1;
    p *= mean / k;
    cdf += p;
    if (p < 1e-300 && k > mean) break;
  }
  return k;
}

}  // namespace

double log1pmx(double x) {
  if (std::abs(x) < 1e-2) {
    // -x^2/2 + x^3/3 - x^4/4 + ...
    double term = x;
    double sum = 0;
    for (int j = 2; j < 30; ++j) {
      term *= -x;
      sum += term / j;
    }
    return sum;
  }
  return std::log1p(x) - x;
}

double log_poisson_pmf(double k, double mean) {
  if (k == 0) return -mean;
  return -stirling_error(k) - deviance(k, mean) -
         0.5 * std::log(2.0 * std::numbers::pi * k);
}

double sample_exponential(Rng& rng, double rate) {
  return -std::log(rng.uniform()) / rate;
}

double sample_standard_normal(Rng& rng) {
  const double u1 = rng.uniform();
  const double u2 = rng.uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double sample_gamma(Rng& rng, double shape) {
  if (shape < 1.0) {
    // Boost to shape + 1, then scale back by U^(1/shape).
    const double g = sample_gamma(rng, shape + 1.0);
    return g * std::pow(rng.uniform(), 1.0 / shape);
  }
  // Marsaglia-Tsang. The acceptance test is written as
  //   log U < x^2/2 + d (1 - v + log v)
  // with the bracket expanded through log1pmx so it stays accurate when the
  // shape is large and v is within 1e-8 of 1.
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x;
    double y;
    do {
      x = sample_standard_normal(rng);
      y = c * x;
    } while (y <= -1.0);
    const double v = (1.0 + y) * (1.0 + y) * (1.0 + y);
    // 1 - v + log v = 3*log1pmx(y) - 3y^2 - y^3
    const double bracket = 3.0 * log1pmx(y) - 3.0 * y * y - y * y * y;
    const double u = rng.uniform();
    if (std::log(u) < 0.5 * x * x + d * bracket) return d * v;
  }
}

double sample_poisson(Rng& rng, double mean) {
  if (mean <= 0) return 0;
  if (mean < 10) return poisson_inversion(rng, mean);
  // Hormann's transformed rejection with squeeze (PTRS).
  const double smu = std::sqrt(mean);
  const double b = 0.931 + 2.53 * smu;
  const double a = -0.059 + 0.02483 * b;
  const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
  const double vr = 0.9277 - 3.6224 / (b - 2);
  for (;;) {
    const double u = rng.uniform() - 0.5;
    const double v = rng.uniform();
    const double us = 0.5 - std::abs(u);
    const double k = std::floor((2 * a / us + b) * u + mean + 0.43);
    if (us >= 0.07 && v <= vr) return k;
    if (k < 0 || (us < 0.013 && v > us)) continue;
    if (std::log(v) + std::log(inv_alpha) - std::log(a / (us * us) + b) <=
        log_poisson_pmf(k, mean)) {
      return k;
    }
  }
}

std::uint64_t sample_geometric(Rng& rng, double success_prob) {
  if (success_prob >= 1.0) return 0;
  return static_cast<std::uint64_t>(
      std::floor(std::log(rng.uniform()) / std::log1p(-success_prob)));
}

double sample_negative_binomial(Rng& rng, double count, double success_prob) {
  if (count <= 0) return 0;
  if (success_prob >= 1.0) return 0;
  const double scale = (1.0 - success_prob) / success_prob;
  return sample_poisson(rng, sample_gamma(rng, count) * scale);
}

}  // namespace bpire
