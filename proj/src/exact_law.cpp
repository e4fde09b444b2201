#include "bpire/exact_law.hpp"

#include <functional>

namespace bpire::exact {

Pmf convolve(const Pmf& a, const Pmf& b) {
  Pmf out;
  for (const auto& [x, px] : a) {
    for (const auto& [y, py] : b) out[x + y] += px * py;
  }
  return out;
}

Pmf thin(const Pmf& x, const Pmf& offspring) {
  Pmf out;
  Pmf power{{0, Rational(1)}};
  std::uint64_t reached = 0;
  for (const auto& [count, p] : x) {
    while (reached < count) {
      power = convolve(power, offspring);
      ++reached;
    }
    for (const auto& [v, pv] : power) out[v] += p * pv;
  }
  return out;
}

namespace {

// Calls visit(sequence, weight) for every environment sequence of length len.
void for_each_sequence(const Model& model, unsigned len,
                       const std::function<void(const std::vector<std::size_t>&, const Rational&)>& visit) {
  std::vector<std::size_t> seq(len, 0);
  for (;;) {
    Rational w(1);
    for (std::size_t i : seq) w *= model.probs[i];
    visit(seq, w);
    unsigned pos = 0;
    while (pos < len && ++seq[pos] == model.atoms.size()) seq[pos++] = 0;
    if (pos == len) break;
  }
}

void accumulate(Pmf& into, const Pmf& pmf, const Rational& weight) {
  for (const auto& [v, p] : pmf) into[v] += weight * p;
}

}  // namespace

Pmf forward_law(const Model& model, unsigned steps) {
  if (steps == 0) return {{0, Rational(1)}};
  Pmf out;
  for_each_sequence(model, steps, [&](const std::vector<std::size_t>& seq, const Rational& w) {
    Pmf state{{0, Rational(1)}};
    for (std::size_t idx : seq) {
      const Atom& a = model.atoms[idx];
      state = convolve(thin(state, a.offspring), a.immigration);
    }
    accumulate(out, state, w);
  });
  return out;
}

Pmf backward_series_law(const Model& model, unsigned terms) {
  if (terms == 0) return {{0, Rational(1)}};
  Pmf out;
  for_each_sequence(model, terms, [&](const std::vector<std::size_t>& seq, const Rational& w) {
    Pmf total{{0, Rational(1)}};
    for (unsigned i = 0; i < terms; ++i) {
      // B_i pushed through theta_{i-1}, ..., theta_0.
      Pmf term = model.atoms[seq[i]].immigration;
      for (unsigned j = i; j-- > 0;) term = thin(term, model.atoms[seq[j]].offspring);
      total = convolve(total, term);
    }
    accumulate(out, total, w);
  });
  return out;
}

namespace {
CountLaw to_count_law(const Pmf& pmf) {
  std::vector<double> dense(pmf.rbegin()->first + 1, 0.0);
  for (const auto& [k, p] : pmf) dense[k] = static_cast<double>(p);
  return CountLaw::finite(std::move(dense));
}
}  // namespace

EnvironmentModel to_environment_model(const Model& model) {
  std::vector<EnvironmentAtom> atoms;
  std::vector<double> probs;
  for (std::size_t i = 0; i < model.atoms.size(); ++i) {
    atoms.push_back({to_count_law(model.atoms[i].offspring), to_count_law(model.atoms[i].immigration)});
    probs.push_back(static_cast<double>(model.probs[i]));
  }
  return EnvironmentModel(std::move(atoms), std::move(probs));
}

}  // namespace bpire::exact
