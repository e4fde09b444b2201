#pragma once

// Exact rational-arithmetic laws for small finite-support models. Used to
// check the distributional identity between the forward chain started at 0
// and the truncated backward series.

#include <boost/multiprecision/cpp_int.hpp>
#include <cstdint>
#include <map>
#include <vector>

#include "bpire/env_model.hpp"

namespace bpire::exact {

using Rational = boost::multiprecision::cpp_rational;
using Pmf = std::map<std::uint64_t, Rational>;

struct Atom {
  Pmf offspring;
  Pmf immigration;
};

struct Model {
  std::vector<Atom> atoms;
  std::vector<Rational> probs;
};

Pmf convolve(const Pmf& a, const Pmf& b);
/// Law of theta o X: each of X individuals reproduces by `offspring`.
Pmf thin(const Pmf& x, const Pmf& offspring);

/// Law of X_steps for the chain started at X_0 = 0, by enumerating every
/// environment sequence.
Pmf forward_law(const Model& model, unsigned steps);

/// Law of sum_{i<terms} theta_0 o ... o theta_{i-1} o B_i, enumerating every
/// environment sequence (xi_0, ..., xi_{terms-1}).
Pmf backward_series_law(const Model& model, unsigned terms);

/// Floating-point EnvironmentModel with FiniteDiscrete laws.
EnvironmentModel to_environment_model(const Model& model);

}  // namespace bpire::exact
