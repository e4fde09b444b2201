#include "bpire/env_model.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "bpire/cramer.hpp"
#include "bpire/errors.hpp"

namespace bpire {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

constexpr double kMaxState = 9223372036854775807.0;  // 2^63 - 1

std::uint64_t checked_state(double value) {
  if (!(value < kMaxState)) {
    throw OverflowGuard("progeny sum exceeds 2^63-1 (supercritical configuration?)");
  }
  return static_cast<std::uint64_t>(value);
}

}  // namespace

CountLaw::CountLaw(Variant law) : law_(std::move(law)) {
  std::visit(
      Overloaded{
          [](const Geometric& g) {
            if (!(g.success_prob > 0.0 && g.success_prob < 1.0)) {
              throw ValidationError("geometric success probability must lie in (0,1)");
            }
          },
          [](const Poisson& p) {
            if (!(p.rate > 0.0) || !std::isfinite(p.rate)) {
              throw ValidationError("poisson rate must be positive and finite");
            }
          },
          [](const Deterministic&) {},
          [this](const FiniteDiscrete& f) {
            if (f.pmf.empty()) throw ValidationError("finite pmf is empty");
            double sum = 0;
            for (double w : f.pmf) {
              if (!(w >= 0.0)) throw ValidationError("finite pmf has a negative weight");
              sum += w;
              cdf_.push_back(sum);
            }
            if (std::abs(sum - 1.0) > 1e-12) {
              std::ostringstream msg;
              msg.precision(17);
              msg << "finite pmf sums to " << sum << ", not 1";
              throw ValidationError(msg.str());
            }
          }},
      law_);
}

std::string_view CountLaw::kind() const {
  return std::visit(Overloaded{[](const Geometric&) { return std::string_view("geometric"); },
                               [](const Poisson&) { return std::string_view("poisson"); },
                               [](const Deterministic&) { return std::string_view("deterministic"); },
                               [](const FiniteDiscrete&) { return std::string_view("finite"); }},
                    law_);
}

double CountLaw::mean() const {
  return std::visit(
      Overloaded{[](const Geometric& g) { return (1.0 - g.success_prob) / g.success_prob; },
                 [](const Poisson& p) { return p.rate; },
                 [](const Deterministic& d) { return static_cast<double>(d.value); },
                 [](const FiniteDiscrete& f) {
                   double m = 0;
                   for (std::size_t k = 0; k < f.pmf.size(); ++k) m += static_cast<double>(k) * f.pmf[k];
                   return m;
                 }},
      law_);
}

double CountLaw::variance() const {
  return std::visit(
      Overloaded{[](const Geometric& g) {
                   return (1.0 - g.success_prob) / (g.success_prob * g.success_prob);
                 },
                 [](const Poisson& p) { return p.rate; },
                 [](const Deterministic&) { return 0.0; },
                 [this](const FiniteDiscrete& f) {
                   const double m = mean();
                   double v = 0;
                   for (std::size_t k = 0; k < f.pmf.size(); ++k) {
                     const double d = static_cast<double>(k) - m;
                     v += d * d * f.pmf[k];
                   }
                   return v;
                 }},
      law_);
}

double CountLaw::prob_zero() const {
  return std::visit(Overloaded{[](const Geometric& g) { return g.success_prob; },
                               [](const Poisson& p) { return std::exp(-p.rate); },
                               [](const Deterministic& d) { return d.value == 0 ? 1.0 : 0.0; },
                               [](const FiniteDiscrete& f) { return f.pmf[0]; }},
                    law_);
}

std::uint64_t CountLaw::sample(Rng& rng) const {
  return std::visit(
      Overloaded{[&](const Geometric& g) { return sample_geometric(rng, g.success_prob); },
                 [&](const Poisson& p) { return checked_state(sample_poisson(rng, p.rate)); },
                 [](const Deterministic& d) { return d.value; },
                 [&](const FiniteDiscrete&) {
                   const double u = rng.uniform();
                   std::size_t k = 0;
                   while (k + 1 < cdf_.size() && u >= cdf_[k]) ++k;
                   return static_cast<std::uint64_t>(k);
                 }},
      law_);
}

double mean_offspring(const EnvironmentAtom& atom) { return atom.offspring.mean(); }

std::vector<std::string> EnvironmentModel::violations(std::span<const EnvironmentAtom> atoms,
                                                      std::span<const double> probs) {
  std::vector<std::string> out;
  if (atoms.empty()) out.emplace_back("model has no atoms");
  if (atoms.size() != probs.size()) {
    out.emplace_back("atoms and probs differ in length");
    return out;
  }
  double sum = 0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    sum += probs[i];
    if (!(probs[i] > 0.0)) {
      out.push_back("prob of atom " + std::to_string(i) + " is not positive");
    }
  }
  if (std::abs(sum - 1.0) > 1e-12) {
    std::ostringstream msg;
    msg.precision(12);
    msg << "probs sum " << sum << ", expected 1";
    out.push_back(msg.str());
  }
  bool any_immigration = false;
  bool any_extinction = false;
  for (const auto& a : atoms) {
    any_immigration |= !a.immigration.concentrated_at_zero();
    any_extinction |= a.offspring.prob_zero() > 0.0;
  }
  if (!atoms.empty() && !any_immigration) {
    out.emplace_back("immigration law is concentrated at 0 on every atom (must be not concentrated at 0)");
  }
  if (!atoms.empty() && !any_extinction) {
    out.emplace_back("no atom gives positive probability to zero offspring");
  }
  return out;
}

EnvironmentModel::EnvironmentModel(std::vector<EnvironmentAtom> atoms, std::vector<double> probs)
    : atoms_(std::move(atoms)), probs_(std::move(probs)) {
  const auto problems = violations(atoms_, probs_);
  if (!problems.empty()) {
    std::string msg = "invalid environment model:";
    for (const auto& p : problems) msg += "\n  - " + p;
    throw ValidationError(msg);
  }
  double acc = 0;
  for (std::size_t i = 0; i < atoms_.size(); ++i) {
    offspring_means_.push_back(atoms_[i].offspring.mean());
    acc += probs_[i];
    cdf_.push_back(acc);
  }
}

std::size_t EnvironmentModel::sample_index(Rng& rng) const {
  const double u = rng.uniform() * cdf_.back();
  std::size_t i = 0;
  while (i + 1 < cdf_.size() && u >= cdf_[i]) ++i;
  return i;
}

TiltedModel tilt(const EnvironmentModel& model, double kappa) {
  const double lam = lambda(model, kappa);
  if (std::abs(lam - 1.0) > 1e-9) {
    std::ostringstream msg;
    msg.precision(12);
    msg << "lambda(" << kappa << ") = " << lam << " is not 1; tilting requires the Cramer root";
    throw CramerNotSatisfied(msg.str());
  }
  TiltedModel out;
  out.atoms = model.atoms();
  out.offspring_means = model.offspring_means();
  out.source_kappa = kappa;
  for (std::size_t i = 0; i < model.size(); ++i) {
    const double m = model.offspring_mean(i);
    out.probs.push_back(m > 0 ? model.prob(i) * std::pow(m, kappa) / lam : 0.0);
  }
  return out;
}

std::uint64_t sample_progeny_sum(const EnvironmentAtom& atom, std::uint64_t count, Rng& rng,
                                 std::uint64_t cap) {
  if (count == 0) return 0;
  const auto& law = atom.offspring.variant();
  if (const auto* g = std::get_if<Geometric>(&law)) {
    const double p = g->success_prob;
    const double c = static_cast<double>(count);
    if (c * (1 - p) / p <= 30.0) {
      // Small mean: invert the negative binomial pmf by its recursion,
      // P(k+1)/P(k) = (count+k)(1-p)/(k+1), starting from p^count.
      const double u = rng.uniform();
      double pk = std::pow(p, c);
      double cdf = pk;
      std::uint64_t k = 0;
      while (u > cdf && k < 2000) {
        pk *= (c + static_cast<double>(k)) * (1 - p) / static_cast<double>(k + 1);
        cdf += pk;
        ++k;
      }
      if (k < 2000) return k;
      // Rounding left the cdf short of u; fall through to an exact sampler.
    }
    if (count <= 16) {
      std::uint64_t sum = 0;
      for (std::uint64_t i = 0; i < count; ++i) {
        if (__builtin_add_overflow(sum, sample_geometric(rng, g->success_prob), &sum) ||
            sum > static_cast<std::uint64_t>(kMaxState)) {
          throw OverflowGuard("progeny sum exceeds 2^63-1");
        }
      }
      return sum;
    }
    return checked_state(sample_negative_binomial(rng, static_cast<double>(count), g->success_prob));
  }
  if (const auto* p = std::get_if<Poisson>(&law)) {
    return checked_state(sample_poisson(rng, static_cast<double>(count) * p->rate));
  }
  if (const auto* d = std::get_if<Deterministic>(&law)) {
    std::uint64_t out = 0;
    if (__builtin_mul_overflow(count, d->value, &out) ||
        out > static_cast<std::uint64_t>(kMaxState)) {
      throw OverflowGuard("progeny sum exceeds 2^63-1");
    }
    return out;
  }
  if (count > cap) {
    throw SummationCapExceeded("finite-support offspring sum over " + std::to_string(count) +
                               " individuals exceeds the summation cap " + std::to_string(cap));
  }
  std::uint64_t sum = 0;
  for (std::uint64_t i = 0; i < count; ++i) sum += atom.offspring.sample(rng);
  return sum;
}

EnvironmentModel two_point_geometric_model(double down_prob) {
  std::vector<EnvironmentAtom> atoms{
      {OffspringLaw::geometric(2.0 / 3.0), ImmigrationLaw::deterministic(1)},
      {OffspringLaw::geometric(1.0 / 3.0), ImmigrationLaw::deterministic(1)}};
  return EnvironmentModel(std::move(atoms), {down_prob, 1.0 - down_prob});
}

namespace {
double k15_down_prob() {
  // p 2^{-3/2} + (1-p) 2^{3/2} = 1
  const double up = std::pow(2.0, 1.5);
  return (up - 1.0) / (up - 1.0 / up);
}
}  // namespace

std::vector<std::string> preset_names() { return {"ENV-A", "ENV-B", "ENV-C", "ENV-D", "ENV-K15"}; }

bool is_preset_name(std::string_view name) {
  for (const auto& p : preset_names()) {
    if (p == name) return true;
  }
  return false;
}

EnvironmentModel preset_model(std::string_view name) {
  if (name == "ENV-A") return two_point_geometric_model(4.0 / 5.0);
  if (name == "ENV-B") return two_point_geometric_model(2.0 / 3.0);
  if (name == "ENV-C") return two_point_geometric_model(2.0 - std::sqrt(2.0));
  if (name == "ENV-D") return two_point_geometric_model(8.0 / 9.0);
  if (name == "ENV-K15") return two_point_geometric_model(k15_down_prob());
  throw ValidationError("unknown preset '" + std::string(name) + "'");
}

}  // namespace bpire
