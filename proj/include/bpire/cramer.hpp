#pragma once

#include <span>

#include "bpire/env_model.hpp"

namespace bpire {

/// lambda(alpha) = E m(xi)^alpha, with 0^0 taken as 1.
double lambda(const EnvironmentModel& model, double alpha);
double lambda(std::span<const double> probs, std::span<const double> means, double alpha);
/// d lambda / d alpha = E m^alpha log m (natural log; atoms with m = 0 add 0).
double lambda_prime(const EnvironmentModel& model, double alpha);
/// E log m(xi); -infinity if some atom has m = 0.
double mean_log_m(const EnvironmentModel& model);

struct CramerReport {
  double kappa = 0;
  double lambda_prime_at_kappa = 0;
  double mean_log_m = 0;
  bool subcritical = false;
  /// False when the nonzero log m values lie on a lattice.
  bool nonarithmetic_hint = true;
  /// Lattice span h of log m when arithmetic (0 otherwise); the tail
  /// oscillates with multiplicative period e^h.
  double lattice_span = 0;
  int iterations = 0;
};

/// Finds kappa > 0 with |lambda(kappa) - 1| <= tol. Throws NotSubcritical if
/// E log m >= 0, NoCramerRoot if every m <= 1 or the root exceeds 64.
CramerReport solve_kappa(const EnvironmentModel& model, double tol = 1e-12);

/// true iff lambda(alpha) < 1 and all offspring / immigration laws have a
/// finite alpha-moment (always the case for the supported variants).
bool moment_condition_check(const EnvironmentModel& model, double alpha);

/// Lattice detection for a finite set of log values: returns the span h > 0
/// if all values are integer multiples of a common h (ratio test tolerance
/// 1e-9, denominators up to 1000), or 0 if nonarithmetic.
double lattice_span(std::span<const double> log_values);

/// Argmin of lambda over a grid on (0, upper]; used for burn-in bounds.
double argmin_lambda(const EnvironmentModel& model, double upper, int grid = 2000);

}  // namespace bpire
