#include "bpire/rwre.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "bpire/chain_sim.hpp"
#include "bpire/errors.hpp"
#include "bpire/parallel.hpp"
#include "bpire/stable_limits.hpp"
#include "bpire/stats.hpp"

namespace bpire {

RwreModel::RwreModel(std::vector<double> site_values, std::vector<double> probs, bool reflect_at_origin)
    : values_(std::move(site_values)), probs_(std::move(probs)), reflect_(reflect_at_origin) {
  std::vector<std::string> problems;
  if (values_.empty() || values_.size() != probs_.size()) {
    problems.push_back("site values and probs must be nonempty and of equal length");
  }
  double total = 0;
  for (std::size_t i = 0; i < probs_.size(); ++i) {
    if (!(probs_[i] > 0)) problems.push_back("sites[" + std::to_string(i) + "].prob must be > 0");
    total += probs_[i];
  }
  if (std::abs(total - 1.0) > 1e-12) problems.push_back("site probs sum " + std::to_string(total) + ", not 1");
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!(values_[i] > 0 && values_[i] <= 1)) {
      problems.push_back("sites[" + std::to_string(i) + "].xi must lie in (0, 1]");
    }
  }
  if (problems.empty() && !(drift_exponent() < 0)) {
    problems.push_back("drift condition E log(xi'/xi) < 0 fails");
  }
  if (!problems.empty()) {
    std::string msg = "invalid site law:";
    for (const auto& p : problems) msg += "\n  - " + p;
    throw ValidationError(msg);
  }
  double acc = 0;
  for (double p : probs_) cdf_.push_back(acc += p);
}

double RwreModel::site_from_bits(std::uint64_t bits) const {
  const double u = bits_to_unit(bits) * cdf_.back();
  const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  return values_[std::min<std::size_t>(static_cast<std::size_t>(it - cdf_.begin()), values_.size() - 1)];
}

double RwreModel::drift_exponent() const {
  double s = 0;
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (values_[i] >= 1.0) return -std::numeric_limits<double>::infinity();
    s += probs_[i] * std::log((1 - values_[i]) / values_[i]);
  }
  return s;
}

RwreModel preset_sites(std::string_view name) {
  if (name == "RW-K2") return RwreModel({2.0 / 3.0, 1.0 / 3.0}, {0.8, 0.2});
  if (name == "RW-K1") return RwreModel({2.0 / 3.0, 1.0 / 3.0}, {2.0 / 3.0, 1.0 / 3.0});
  if (name == "RW-KHALF") {
    return RwreModel({2.0 / 3.0, 1.0 / 3.0}, {2.0 - std::sqrt(2.0), std::sqrt(2.0) - 1.0});
  }
  throw ValidationError("unknown site preset '" + std::string(name) + "'");
}

bool is_site_preset_name(std::string_view name) {
  return name == "RW-K2" || name == "RW-K1" || name == "RW-KHALF";
}

EnvironmentModel derive_ratio_model(const RwreModel& rwre) {
  std::vector<EnvironmentAtom> atoms;
  for (double xi : rwre.site_values()) {
    atoms.push_back({xi >= 1.0 ? OffspringLaw::deterministic(0) : OffspringLaw::geometric(xi),
                     ImmigrationLaw::deterministic(1)});
  }
  return EnvironmentModel(std::move(atoms), rwre.probs());
}

EnvironmentAtom forced_right_atom() {
  return {OffspringLaw::deterministic(0), ImmigrationLaw::deterministic(1)};
}

namespace {

std::uint64_t zigzag(std::int64_t x) {
  return (static_cast<std::uint64_t>(x) << 1) ^ static_cast<std::uint64_t>(x >> 63);
}

// Site environment and step noise are pure functions of (seed, site, visit).
struct SiteSource {
  const RwreModel& rwre;
  std::uint64_t seed;

  double xi(std::int64_t x) const {
    if (rwre.reflect_at_origin() && x <= 0) return 1.0;
    return rwre.site_from_bits(derive_seed(seed, StreamKind::kWalkEnvironment, zigzag(x)));
  }
  std::uint64_t noise_key(std::int64_t x) const {
    return derive_seed(seed, StreamKind::kWalk, zigzag(x));
  }
};

struct Site {
  double xi = 0;
  std::uint64_t key = 0;
  std::uint64_t visits = 0;
  std::uint64_t right = 0;  // crossings of (x, x+1) to the right
  std::uint64_t left = 0;   // crossings of (x, x+1) to the left
};

// Sites stored for x in [base, n]; grows to the left on demand.
class SiteTable {
 public:
  SiteTable(const SiteSource& src, std::int64_t n) : src_(src), base_(0) {
    sites_.resize(static_cast<std::size_t>(n) + 1);
    for (std::int64_t x = 0; x <= n; ++x) init(sites_[static_cast<std::size_t>(x)], x);
  }
  Site& at(std::int64_t x) {
    if (x < base_) grow(x);
    return sites_[static_cast<std::size_t>(x - base_)];
  }
  std::int64_t base() const { return base_; }
  const std::vector<Site>& sites() const { return sites_; }

 private:
  void init(Site& s, std::int64_t x) const {
    s.xi = src_.xi(x);
    s.key = src_.noise_key(x);
  }
  void grow(std::int64_t x) {
    const std::int64_t new_base = std::min(x, base_ - static_cast<std::int64_t>(sites_.size() / 2 + 16));
    std::vector<Site> fresh(static_cast<std::size_t>(base_ - new_base));
    for (std::int64_t y = new_base; y < base_; ++y) init(fresh[static_cast<std::size_t>(y - new_base)], y);
    sites_.insert(sites_.begin(), fresh.begin(), fresh.end());
    base_ = new_base;
  }
  const SiteSource& src_;
  std::int64_t base_;
  std::vector<Site> sites_;
};

inline bool step_right(Site& s) {
  const std::uint64_t bits = splitmix64(s.key + s.visits * 0x9E3779B97F4A7C15ULL);
  ++s.visits;
  return bits_to_unit(bits) < s.xi;
}

RwreRun walk_stepwise(const RwreModel& rwre, std::uint64_t n, std::uint64_t seed, std::uint64_t budget) {
  const SiteSource src{rwre, seed};
  const auto target = static_cast<std::int64_t>(n);
  SiteTable table(src, target);
  std::int64_t x = 0;
  std::uint64_t t = 0;
  while (x < target) {
    if (++t > budget) {
      throw StepBudgetExceeded("walk exceeded the step budget of " + std::to_string(budget));
    }
    Site& s = table.at(x);
    if (step_right(s)) {
      ++s.right;
      ++x;
    } else {
      ++table.at(x - 1).left;
      --x;
    }
  }
  RwreRun run;
  run.target_n = n;
  run.seed = seed;
  run.hitting_time = t;
  // Lowest edge actually crossed.
  const auto& sites = table.sites();
  std::size_t first = 0;
  while (first < sites.size() && sites[first].right + sites[first].left == 0 &&
         table.base() + static_cast<std::int64_t>(first) < 0) {
    ++first;
  }
  run.min_edge = table.base() + static_cast<std::int64_t>(first);
  for (std::size_t i = first; i < sites.size(); ++i) {
    const std::int64_t k = table.base() + static_cast<std::int64_t>(i);
    if (k >= target) break;
    const std::uint64_t v = sites[i].right + sites[i].left;
    run.crossings.push_back(v);
    run.left_crossings += sites[i].left;
    if (k < 0) run.left_of_origin_crossings += sites[i].left;
    else run.max_crossings = std::max(run.max_crossings, v);
  }
  return run;
}

std::uint64_t nb_count(Rng& rng, std::uint64_t count, double xi) {
  if (count == 0 || xi >= 1.0) return 0;
  if (count <= 16) {
    std::uint64_t s = 0;
    for (std::uint64_t i = 0; i < count; ++i) s += sample_geometric(rng, xi);
    return s;
  }
  const double v = sample_negative_binomial(rng, static_cast<double>(count), xi);
  if (!(v < 9.2e18)) throw OverflowGuard("crossing count exceeds 2^63-1");
  return static_cast<std::uint64_t>(v);
}

// Left crossings U_{x-1} of edge (x-1, x) are the failures before R_x
// successes at site x, with R_x = U_x + 1 for x >= 0 and U_x below 0.
RwreRun walk_crossings(const RwreModel& rwre, std::uint64_t n, std::uint64_t seed) {
  const SiteSource src{rwre, seed};
  Rng rng(seed, StreamKind::kWalk, std::numeric_limits<std::uint64_t>::max());
  const auto target = static_cast<std::int64_t>(n);
  std::vector<std::uint64_t> u_right;  // U_k for k = n-1 down to 0
  std::vector<std::uint64_t> u_left;   // U_k for k = -1, -2, ...
  std::uint64_t u = 0;                  // U_{n-1}
  u_right.push_back(0);
  for (std::int64_t x = target - 1; x >= 1; --x) {
    u = nb_count(rng, u + 1, src.xi(x));
    u_right.push_back(u);
  }
  u = nb_count(rng, u + 1, src.xi(0));
  for (std::int64_t x = -1; u > 0; --x) {
    u_left.push_back(u);
    u = nb_count(rng, u, src.xi(x));
  }
  RwreRun run;
  run.target_n = n;
  run.seed = seed;
  run.min_edge = -static_cast<std::int64_t>(u_left.size());
  std::uint64_t total = n;
  for (auto it = u_left.rbegin(); it != u_left.rend(); ++it) {
    run.crossings.push_back(2 * *it);
    run.left_crossings += *it;
    run.left_of_origin_crossings += *it;
  }
  for (auto it = u_right.rbegin(); it != u_right.rend(); ++it) {
    const std::uint64_t v = 2 * *it + 1;
    run.crossings.push_back(v);
    run.left_crossings += *it;
    run.max_crossings = std::max(run.max_crossings, v);
  }
  total += 2 * run.left_crossings;
  run.hitting_time = total;
  return run;
}

}  // namespace

RwreRun simulate_walk(const RwreModel& rwre, std::uint64_t n, std::uint64_t seed, const WalkOptions& options) {
  if (n == 0) throw DomainError("simulate_walk needs n >= 1");
  if (options.engine == WalkEngine::kCrossingCounts) return walk_crossings(rwre, n, seed);
  return walk_stepwise(rwre, n, seed, options.step_budget);
}

std::int64_t simulate_position(const RwreModel& rwre, std::uint64_t t, std::uint64_t seed) {
  const SiteSource src{rwre, seed};
  // The table only needs to cover the range actually visited to the right.
  const auto reach = static_cast<std::int64_t>(std::min<std::uint64_t>(t, 1u << 16));
  SiteTable table(src, reach);
  std::vector<Site> right_ext;
  std::int64_t x = 0;
  for (std::uint64_t s = 0; s < t; ++s) {
    Site* site;
    if (x <= reach) {
      site = &table.at(x);
    } else {
      const auto idx = static_cast<std::size_t>(x - reach - 1);
      if (idx >= right_ext.size()) {
        Site fresh;
        fresh.xi = src.xi(x);
        fresh.key = src.noise_key(x);
        right_ext.push_back(fresh);
      }
      site = &right_ext[idx];
    }
    x += step_right(*site) ? 1 : -1;
  }
  return x;
}

LChainRun simulate_L_chain(const EnvironmentModel& ratio_model, std::uint64_t n, Rng& rng,
                           const EnvironmentAtom* boundary_atom) {
  if (n == 0) throw DomainError("simulate_L_chain needs n >= 1");
  LChainRun run;
  run.values.reserve(n);
  std::uint64_t l = 1;
  run.values.push_back(l);
  for (std::uint64_t i = 2; i <= n; ++i) {
    l = step(l, ratio_model, rng);
    run.values.push_back(l);
  }
  std::int64_t total = 0;
  for (std::uint64_t v : run.values) total += static_cast<std::int64_t>(v);
  run.sum2_l_minus_n = 2 * total - static_cast<std::int64_t>(n);
  if (boundary_atom) {
    run.boundary_value = sample_progeny_sum(*boundary_atom, l, rng) + sample_immigration(*boundary_atom, rng);
    run.sum2_l_minus_n += 2 * (static_cast<std::int64_t>(run.boundary_value) - 1);
  }
  return run;
}

EquivalenceReport hitting_time_equivalence(const RwreModel& rwre, std::uint64_t n, std::size_t reps,
                                           std::uint64_t seed, unsigned workers,
                                           const WalkOptions& options) {
  if (!rwre.reflect_at_origin()) throw DomainError("equivalence test needs the reflected walk");
  const EnvironmentModel ratio = derive_ratio_model(rwre);
  const EnvironmentAtom boundary = forced_right_atom();
  std::vector<double> walk(reps);
  std::vector<double> chain(reps);
  parallel_for(reps, workers, [&](std::size_t r) {
    walk[r] = static_cast<double>(simulate_walk(rwre, n, derive_seed(seed, StreamKind::kWalk, r), options).hitting_time);
    Rng rng(seed, StreamKind::kLChain, r);
    chain[r] = static_cast<double>(simulate_L_chain(ratio, n, rng, &boundary).sum2_l_minus_n);
  });
  EquivalenceReport rep;
  rep.reps = reps;
  rep.ks_distance = stats::ks_two_sample(walk, chain);
  rep.critical_value_1pct = stats::ks_critical_two_sample(0.01, reps, reps);
  rep.pass = rep.ks_distance < rep.critical_value_1pct;
  rep.mean_walk = stats::mean(walk);
  rep.mean_chain = stats::mean(chain);
  return rep;
}

LimitsReport hitting_time_limits(const RwreModel& rwre, double kappa, double C,
                                 std::span<const std::uint64_t> n_grid, std::size_t reps,
                                 std::uint64_t seed, const LimitsOptions& options) {
  const KappaRegime regime = classify_regime(kappa);
  if (regime == KappaRegime::kAbove2) throw RegimeMismatch("hitting-time limits cover kappa < 2 only");
  LimitsReport rep;
  rep.kappa = kappa;

  std::vector<std::uint64_t> centering;
  if (regime != KappaRegime::kSub1) {
    const EnvironmentModel ratio = derive_ratio_model(rwre);
    centering = sample_stationary(ratio, recommended_burnin(ratio, kappa), options.centering_batch,
                                  derive_seed(seed, StreamKind::kStationaryChain, 0), options.workers)
                    .values;
    if (regime == KappaRegime::kBetween1And2) {
      rep.centering_e_l = stats::mean(stats::to_double(centering));
    }
  }

  std::size_t total = 0;
  std::size_t censored = 0;
  for (std::size_t g = 0; g < n_grid.size(); ++g) {
    const std::uint64_t n = n_grid[g];
    const double nd = static_cast<double>(n);
    const std::uint64_t grid_seed = derive_seed(seed, StreamKind::kWalk, g);
    std::vector<double> t(reps, std::numeric_limits<double>::quiet_NaN());
    parallel_for(reps, options.workers, [&](std::size_t r) {
      try {
        t[r] = static_cast<double>(simulate_walk(rwre, n, derive_seed(grid_seed, StreamKind::kWalk, r), options.walk).hitting_time);
      } catch (const StepBudgetExceeded&) {
        // Censored; counted below and excluded.
      }
    });
    double shift = 0;
    double scale = std::pow(nd, 1.0 / kappa);
    if (regime == KappaRegime::kEq1) {
      double el = 0;
      for (std::uint64_t v : centering) el += static_cast<double>(v) <= C * nd ? static_cast<double>(v) : 0.0;
      el /= static_cast<double>(centering.size());
      shift = nd * (2 * el - 1);
      scale = nd;
    } else if (regime == KappaRegime::kBetween1And2) {
      shift = nd * (2 * rep.centering_e_l - 1);
    }
    HittingTimeSample hs;
    hs.n = n;
    for (double v : t) {
      if (std::isnan(v)) {
        ++hs.censored;
        continue;
      }
      hs.scaled.push_back((v - shift) / scale);
    }
    total += reps;
    censored += hs.censored;
    rep.samples.push_back(std::move(hs));
  }
  for (std::size_t g = 1; g < rep.samples.size(); ++g) {
    rep.consecutive_ks.push_back(stats::ks_two_sample(rep.samples[g - 1].scaled, rep.samples[g].scaled));
  }
  rep.censored_fraction = total ? static_cast<double>(censored) / static_cast<double>(total) : 0.0;

  if (options.position_time > 0 && regime == KappaRegime::kSub1 && !rep.samples.empty()) {
    rep.position_time = options.position_time;
    std::vector<double> w(options.position_reps);
    const double tk = std::pow(static_cast<double>(options.position_time), kappa);
    parallel_for(options.position_reps, options.workers, [&](std::size_t r) {
      w[r] = static_cast<double>(simulate_position(rwre, options.position_time,
                                                   derive_seed(seed, StreamKind::kPositionWalk, r))) / tk;
    });
    std::vector<double> tv = rep.samples.back().scaled;
    std::sort(tv.begin(), tv.end());
    std::sort(w.begin(), w.end());
    for (double p : options.position_probs) {
      QuantileCheck qc;
      qc.p = p;
      qc.position_quantile = stats::quantile_sorted(w, p);
      qc.transformed_quantile = std::pow(stats::quantile_sorted(tv, 1 - p), -kappa);
      qc.relative_error = std::abs(qc.position_quantile - qc.transformed_quantile) / qc.transformed_quantile;
      rep.position_checks.push_back(qc);
    }
  }
  return rep;
}

FrechetFit most_visited_edge(const RwreModel& rwre, std::uint64_t n, std::size_t reps, double theta,
                             double kappa, double C, std::uint64_t seed, unsigned workers,
                             const WalkOptions& options) {
  std::vector<double> maxima(reps);
  parallel_for(reps, workers, [&](std::size_t r) {
    maxima[r] = static_cast<double>(simulate_walk(rwre, n, derive_seed(seed, StreamKind::kWalk, r), options).max_crossings);
  });
  const double a_n = std::pow(C * static_cast<double>(n), 1.0 / kappa);
  return frechet_fit(maxima, 2 * a_n, theta, kappa, n);
}

}  // namespace bpire
