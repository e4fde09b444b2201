#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace bpire::stats {

std::vector<double> to_double(std::span<const std::uint64_t> values);

double mean(std::span<const double> x);
/// Unbiased sample variance.
double variance(std::span<const double> x);
/// Type-7 (linear interpolation) empirical quantile, q in [0, 1].
double quantile(std::span<const double> x, double q);
/// Same as quantile() but on an already ascending-sorted sample.
double quantile_sorted(std::span<const double> sorted, double q);

/// Two-sample Kolmogorov-Smirnov statistic sup |F_a - F_b|. Ties (discrete
/// data) are handled by evaluating both CDFs after each distinct value.
double ks_two_sample(std::span<const double> a, std::span<const double> b);

/// One-sample KS statistic against a continuous CDF.
double ks_one_sample(std::span<const double> sample,
                     const std::function<double(double)>& cdf);

/// Asymptotic two-sample critical value c(alpha) * sqrt((n+m)/(n m)).
double ks_critical_two_sample(double alpha, std::size_t n, std::size_t m);

/// Survival function of the Kolmogorov distribution, P(K > z).
double kolmogorov_survival(double z);

struct LinearFit {
  double slope = 0;
  double intercept = 0;
  double slope_stderr = 0;
};
LinearFit least_squares(std::span<const double> x, std::span<const double> y);

}  // namespace bpire::stats
