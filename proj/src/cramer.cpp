#include "bpire/cramer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "bpire/errors.hpp"

namespace bpire {

double lambda(std::span<const double> probs, std::span<const double> means, double alpha) {
  if (alpha < 0) throw DomainError("lambda is only defined for alpha >= 0");
  double sum = 0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const double m = means[i];
    // 0^0 = 1 by convention.
    const double term = (m == 0.0) ? (alpha == 0.0 ? 1.0 : 0.0) : std::pow(m, alpha);
    sum += probs[i] * term;
  }
  return sum;
}

double lambda(const EnvironmentModel& model, double alpha) {
  return lambda(model.probs(), model.offspring_means(), alpha);
}

double lambda_prime(const EnvironmentModel& model, double alpha) {
  double sum = 0;
  for (std::size_t i = 0; i < model.size(); ++i) {
    const double m = model.offspring_mean(i);
    if (m > 0) sum += model.prob(i) * std::pow(m, alpha) * std::log(m);
  }
  return sum;
}

double mean_log_m(const EnvironmentModel& model) {
  double sum = 0;
  for (std::size_t i = 0; i < model.size(); ++i) {
    const double m = model.offspring_mean(i);
    if (m == 0.0) return -std::numeric_limits<double>::infinity();
    sum += model.prob(i) * std::log(m);
  }
  return sum;
}

namespace {

// Best rational approximation p/q with q <= max_den via continued fractions.
bool as_rational(double x, long max_den, double tol, long& p_out, long& q_out) {
  long p0 = 0, q0 = 1, p1 = 1, q1 = 0;
  double r = x;
  for (int iter = 0; iter < 64; ++iter) {
    const double a = std::floor(r);
    const long ai = static_cast<long>(a);
    const long p2 = ai * p1 + p0;
    const long q2 = ai * q1 + q0;
    if (q2 > max_den) break;
    p0 = p1; q0 = q1; p1 = p2; q1 = q2;
    if (std::abs(x - static_cast<double>(p1) / static_cast<double>(q1)) <=
        tol * std::max(1.0, std::abs(x))) {
      p_out = p1;
      q_out = q1;
      return true;
    }
    const double frac = r - a;
    if (frac < 1e-15) break;
    r = 1.0 / frac;
  }
  return false;
}

}  // namespace

double lattice_span(std::span<const double> log_values) {
  std::vector<double> v;
  for (double x : log_values) {
    if (!std::isfinite(x) || std::abs(x) < 1e-14) continue;
    v.push_back(x);
  }
  if (v.empty()) return 0;
  const double base = v.front();
  std::vector<long> num;
  std::vector<long> den;
  for (double x : v) {
    long p = 0;
    long q = 1;
    if (!as_rational(x / base, 1000, 1e-9, p, q)) return 0;
    num.push_back(p);
    den.push_back(q);
  }
  long lcm = 1;
  for (long q : den) lcm = std::lcm(lcm, q);
  long g = 0;
  for (std::size_t i = 0; i < num.size(); ++i) g = std::gcd(g, std::abs(num[i] * (lcm / den[i])));
  return std::abs(base) * static_cast<double>(g) / static_cast<double>(lcm);
}

CramerReport solve_kappa(const EnvironmentModel& model, double tol) {
  CramerReport report;
  report.mean_log_m = mean_log_m(model);
  report.subcritical = report.mean_log_m < 0;
  if (!report.subcritical) {
    std::ostringstream msg;
    msg << "E log m = " << report.mean_log_m << " >= 0: the process is not subcritical";
    throw NotSubcritical(msg.str());
  }
  const auto& means = model.offspring_means();
  if (std::none_of(means.begin(), means.end(), [](double m) { return m > 1.0; })) {
    throw NoCramerRoot("every m(xi) <= 1, so lambda(alpha) < 1 for all alpha > 0");
  }

  std::vector<double> logs;
  for (double m : means) {
    if (m > 0) logs.push_back(std::log(m));
  }
  report.lattice_span = lattice_span(logs);
  report.nonarithmetic_hint = report.lattice_span == 0.0 && !logs.empty();

  // Work on f = log lambda: f(0) = 0, f'(0) = E log m < 0, f convex.
  auto f = [&](double a) { return std::log(lambda(model, a)); };
  auto fprime = [&](double a) { return lambda_prime(model, a) / lambda(model, a); };

  double hi = 1.0;
  while (f(hi) <= 0) {
    hi *= 2.0;
    if (hi > 64.0) throw NoCramerRoot("Cramer root exceeds 64 (NoCramerRoot-in-range)");
  }
  double lo = hi / 2.0;
  while (f(lo) >= 0) {
    lo /= 2.0;
    if (lo < tol) throw NoCramerRoot("could not bracket the Cramer root above tol");
  }

  // Newton from the right end of the bracket converges monotonically on a
  // convex function; bisection guards against leaving the bracket.
  double x = hi;
  for (int iter = 0; iter < 200; ++iter) {
    report.iterations = iter + 1;
    const double fx = f(x);
    if (fx > 0) hi = x; else lo = x;
    double next = x - fx / fprime(x);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    const bool converged = std::abs(next - x) <= 1e-15 * std::max(1.0, x);
    x = next;
    if (converged || (hi - lo) <= 1e-15 * hi) break;
  }
  if (std::abs(lambda(model, x) - 1.0) > tol) {
    std::ostringstream msg;
    msg << "Cramer solve did not reach |lambda - 1| <= " << tol;
    throw NoCramerRoot(msg.str());
  }
  report.kappa = x;
  report.lambda_prime_at_kappa = lambda_prime(model, x);
  return report;
}

bool moment_condition_check(const EnvironmentModel& model, double alpha) {
  if (!(alpha > 0)) throw DomainError("moment condition needs alpha > 0");
  // The parametric and finite-support variants all have every moment finite.
  return lambda(model, alpha) < 1.0 - 1e-12;
}

double argmin_lambda(const EnvironmentModel& model, double upper, int grid) {
  double best_alpha = upper;
  double best = lambda(model, upper);
  for (int j = 1; j <= grid; ++j) {
    const double a = upper * static_cast<double>(j) / grid;
    const double v = lambda(model, a);
    if (v < best) {
      best = v;
      best_alpha = a;
    }
  }
  return best_alpha;
}

}  // namespace bpire
