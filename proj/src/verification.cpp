#include "bpire/verification.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <map>
#include <memory>
#include <numbers>
#include <optional>

#include "bpire/chain_sim.hpp"
#include "bpire/cramer.hpp"
#include "bpire/errors.hpp"
#include "bpire/exact_law.hpp"
#include "bpire/extremes.hpp"
#include "bpire/model_io.hpp"
#include "bpire/parallel.hpp"
#include "bpire/rwre.hpp"
#include "bpire/stable_limits.hpp"
#include "bpire/stats.hpp"
#include "bpire/tail_analysis.hpp"

namespace bpire {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string num(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

class Digest {
 public:
  void add(double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    add(bits);
  }
  void add(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      h_ ^= (v >> (8 * i)) & 0xFF;
      h_ *= 0x100000001B3ULL;
    }
  }
  void add(std::span<const double> xs) {
    for (double x : xs) add(x);
  }
  void add(std::span<const std::uint64_t> xs) {
    for (auto x : xs) add(x);
  }
  std::uint64_t value() const { return h_; }

 private:
  std::uint64_t h_ = 0xCBF29CE484222325ULL;
};

// Known closed forms for the two-point presets.
const double kLn2 = std::numbers::ln2;
const double kThetaA = 9.0 / 20.0;
const double kThetaB = 1.0 / 6.0;
const double kThetaC = (3.0 - 2.0 * std::sqrt(2.0)) * (1.0 - 1.0 / std::sqrt(2.0));
const double kGoldieA = 15.0 / kLn2;
const double kGoldieB = 3.0 / kLn2;

struct Sizes {
  std::size_t batch;
  std::size_t path;
  std::size_t theta_reps;
  std::uint64_t block_n;
  std::size_t block_reps;
  std::size_t equiv_reps;
  std::size_t equiv_rounds;
  std::size_t limit_reps;
  std::uint64_t position_time;
  std::size_t position_reps;
  std::uint64_t edge_n;
  std::size_t edge_reps;
};

Sizes sizes_for(Budget b) {
  if (b == Budget::kFull) {
    return {1'000'000, 10'000'000, 1'000'000, 10'000, 10'000, 10'000, 20, 20'000, 1'000'000, 4'000, 10'000, 10'000};
  }
  return {100'000, 2'000'000, 100'000, 2'000, 2'000, 2'000, 5, 1'000, 100'000, 500, 2'000, 2'000};
}

// Block length giving about 0.1 expected exceedances per block.
std::size_t block_length_for(double q) {
  return static_cast<std::size_t>(std::llround(0.1 / (1.0 - q)));
}

class Suite {
 public:
  explicit Suite(const VerifyOptions& opt) : opt_(opt), sz_(sizes_for(opt.budget)) {}

  CheckResult run(int id) {
    CheckResult r;
    r.id = id;
    digest_ = Digest{};
    const auto t0 = Clock::now();
    try {
      switch (id) {
        case 1: c1(r); break;
        case 2: c2(r); break;
        case 3: c3(r); break;
        case 4: c4(r); break;
        case 5: c5(r); break;
        case 6: c6(r); break;
        case 7: c7(r); break;
        case 8: c8(r); break;
        case 9: c9(r); break;
        case 10: c10(r); break;
        case 11: c11(r); break;
        case 12: c12(r); break;
        case 13: c13(r); break;
        case 14: c14(r); break;
        default: throw DomainError("unknown criterion " + std::to_string(id));
      }
    } catch (const Error& e) {
      r.rows.push_back({"error", e.what(), "no error", false});
    }
    r.seconds = seconds_since(t0);
    r.pass = !r.rows.empty();
    for (const auto& row : r.rows) r.pass = r.pass && row.pass;
    r.digest = digest_.value();
    return r;
  }

  // Per-preset summary table.
  CheckResult preset(const std::string& name);

 private:
  std::uint64_t seed(int id, int sub = 0) const {
    return derive_seed(opt_.seed, StreamKind::kPilot, static_cast<std::uint64_t>(id) * 1000 + sub);
  }

  void row(CheckResult& r, std::string label, double measured, std::string target, bool pass) {
    digest_.add(measured);
    r.rows.push_back({std::move(label), num(measured), std::move(target), pass});
  }
  static double kappa_of(const std::string& preset) { return solve_kappa(preset_model(preset)).kappa; }

  const StationaryBatch& batch(const std::string& preset) {
    auto it = batches_.find(preset);
    if (it == batches_.end()) {
      const auto model = preset_model(preset);
      const double kappa = solve_kappa(model).kappa;
      const std::uint64_t salt = fnv1a64(preset);
      it = batches_.emplace(preset, sample_stationary(model, recommended_burnin(model, kappa), sz_.batch,
                                                      derive_seed(opt_.seed, StreamKind::kStationaryChain, salt),
                                                      opt_.workers)).first;
    }
    return it->second;
  }

  const std::vector<std::vector<std::uint64_t>>& path(const std::string& preset) {
    auto it = paths_.find(preset);
    if (it == paths_.end()) {
      const auto model = preset_model(preset);
      const double kappa = solve_kappa(model).kappa;
      ChainConfig cfg{model, 0, recommended_burnin(model, kappa),
                      derive_seed(opt_.seed, StreamKind::kTrajectory, fnv1a64(preset))};
      std::vector<std::vector<std::uint64_t>> p;
      p.push_back(simulate_forward(cfg, sz_.path).values);
      it = paths_.emplace(preset, std::move(p)).first;
    }
    return it->second;
  }

  void c1(CheckResult& r) {
    r.title = "kappa exactness";
    const std::pair<const char*, double> cases[] = {{"ENV-A", 2.0}, {"ENV-B", 1.0}, {"ENV-C", 0.5}, {"ENV-D", 3.0}};
    for (const auto& [name, target] : cases) {
      const auto model = preset_model(name);
      const auto t0 = Clock::now();
      const auto rep = solve_kappa(model);
      const double dt = seconds_since(t0);
      row(r, std::string(name) + " kappa", rep.kappa, num(target) + " +- 1e-9",
          std::abs(rep.kappa - target) <= 1e-9);
      r.rows.push_back({std::string(name) + " solve time [s]", num(dt, 3), "< 1", dt < 1.0});
    }
  }

  void c2(CheckResult& r) {
    r.title = "tilted law";
    const TiltedModel t = tilt(preset_model("ENV-A"), 2.0);
    row(r, "P*(m = 1/2)", t.probs[0], "0.2 +- 1e-12", std::abs(t.probs[0] - 0.2) <= 1e-12);
    row(r, "P*(m = 2)", t.probs[1], "0.8 +- 1e-12", std::abs(t.probs[1] - 0.8) <= 1e-12);
  }

  void c3(CheckResult& r) {
    r.title = "backward/forward identity";
    using exact::Rational;
    exact::Model micro;
    micro.atoms = {{{{0, Rational(1)}}, {{0, Rational(1, 2)}, {1, Rational(1, 2)}}},
                   {{{1, Rational(1)}}, {{0, Rational(2, 3)}, {1, Rational(1, 3)}}}};
    micro.probs = {Rational(1, 3), Rational(2, 3)};
    exact::Model branching;
    branching.atoms = {{{{0, Rational(1, 2)}, {2, Rational(1, 2)}}, {{1, Rational(1)}}},
                       {{{0, Rational(1, 4)}, {1, Rational(3, 4)}}, {{0, Rational(1, 2)}, {2, Rational(1, 2)}}}};
    branching.probs = {Rational(2, 5), Rational(3, 5)};
    const std::pair<const char*, const exact::Model*> models[] = {{"Det(0)/Det(1)", &micro},
                                                                  {"finite offspring", &branching}};
    for (const auto& [label, model] : models) {
      for (unsigned h = 1; h <= 3; ++h) {
        const auto fwd = exact::forward_law(*model, h);
        const auto bwd = exact::backward_series_law(*model, h);
        Rational mass(0);
        for (const auto& [k, p] : fwd) mass += p;
        const bool equal = fwd == bwd && mass == 1;
        digest_.add(static_cast<std::uint64_t>(fwd.size()));
        r.rows.push_back({std::string(label) + " H=" + std::to_string(h),
                          equal ? "identical (" + std::to_string(fwd.size()) + " atoms)" : "differ",
                          "exact equality", equal});
      }
    }
  }

  void c4(CheckResult& r) {
    r.title = "Goldie constant, kappa = 1";
    const auto t0 = Clock::now();
    const auto model = preset_model("ENV-B");
    const auto& b = batch("ENV-B");
    const auto values = stats::to_double(b.values);
    PlateauOptions po;
    po.lattice_factor = 2.0;
    const auto plateau = tail_plateau(values, 1.0, 50, 500, po);
    const auto g = goldie_C_formula(model, 1.0, b.values, seed(4), opt_.workers);
    const double dt = seconds_since(t0);
    const std::string target = num(kGoldieB) + " +- 15%";
    row(r, "plateau C [" + num(plateau.x_low) + ", " + num(plateau.x_high) + "]", plateau.plateau_C, target,
        std::abs(plateau.plateau_C / kGoldieB - 1) <= 0.15);
    row(r, "formula C (se " + num(g.C_std_err, 3) + ")", g.C, target, std::abs(g.C / kGoldieB - 1) <= 0.15);
    row(r, "formula numerator E B", g.numerator, "1 (informational)", true);
    r.rows.push_back({"runtime [s], " + std::to_string(resolve_workers(opt_.workers)) + " workers", num(dt, 3),
                      "< 300", dt < 300});
  }

  void c5(CheckResult& r) {
    r.title = "Hill estimator";
    const auto hb = hill_estimator(stats::to_double(batch("ENV-B").values), sz_.batch / 100);
    const auto ha = hill_estimator(stats::to_double(batch("ENV-A").values), sz_.batch / 100);
    row(r, "ENV-B kappa_hat (se " + num(hb.std_err, 3) + ")", hb.kappa_hat, "1.0 +- 0.1", std::abs(hb.kappa_hat - 1) <= 0.1);
    row(r, "ENV-A kappa_hat (se " + num(ha.std_err, 3) + ")", ha.kappa_hat, "2.0 +- 0.2", std::abs(ha.kappa_hat - 2) <= 0.2);
  }

  void c6(CheckResult& r) {
    r.title = "extremal index, three ways";
    const std::pair<const char*, double> cases[] = {{"ENV-A", kThetaA}, {"ENV-B", kThetaB}, {"ENV-C", kThetaC}};
    int k = 0;
    for (const auto& [name, target] : cases) {
      const auto model = preset_model(name);
      const double kappa = solve_kappa(model).kappa;
      const auto ex = theta_lattice_exact(model, kappa);
      row(r, std::string(name) + " exact", ex.value, num(target, 10), std::abs(ex.value - target) <= 1e-12);
      const std::uint64_t horizon = std::max<std::uint64_t>(200, default_theta_horizon(model, kappa, seed(6, 10 + k)));
      const auto d = theta_direct(model, kappa, horizon, sz_.theta_reps, seed(6, k), opt_.workers);
      row(r, std::string(name) + " direct (T=" + std::to_string(horizon) + ", se " + num(d.std_err, 2) + ")",
          d.value, num(target, 5) + " +- 3 se", std::abs(d.value - target) <= 3 * d.std_err);
      const double q = 0.999;
      const auto bl = theta_blocks(path(name), block_length_for(q), q);
      row(r, std::string(name) + " blocks (b=" + std::to_string(block_length_for(q)) + ", " +
                 std::to_string(bl.exceedances) + " exc.)",
          bl.value, num(target, 5) + " +- 0.05", std::abs(bl.value - target) <= 0.05);
      ++k;
    }
  }

  void c7(CheckResult& r) {
    r.title = "Frechet maxima";
    const auto fit = frechet_gof(preset_model("ENV-B"), 1.0, kGoldieB, sz_.block_n, sz_.block_reps, kThetaB,
                                 seed(7), opt_.workers);
    row(r, "ENV-B KS vs exp(-x^-1/6), n=" + std::to_string(fit.block_length), fit.ks_distance, "< 0.03",
        fit.ks_distance < 0.03);
  }

  void c8(CheckResult& r) {
    r.title = "spectral tail process";
    const auto model = preset_model("ENV-A");
    const auto& p = path("ENV-A");
    auto prob_at = [](const SpectralTestReport& s, double v) {
      for (const auto& a : s.empirical) {
        if (std::abs(a.value - v) < 1e-9) return a.prob;
      }
      return 0.0;
    };
    const auto fwd = spectral_ratio_test(model, 2.0, 1, p, 0.999);
    const auto bwd = spectral_ratio_test(model, 2.0, -1, p, 0.999);
    row(r, "lag +1 P(ratio ~ 1/2)", prob_at(fwd, 0.5), "0.8 +- 0.03", std::abs(prob_at(fwd, 0.5) - 0.8) <= 0.03);
    row(r, "lag +1 P(ratio ~ 2)", prob_at(fwd, 2.0), "0.2 +- 0.03", std::abs(prob_at(fwd, 2.0) - 0.2) <= 0.03);
    row(r, "lag -1 P(ratio ~ 2)", prob_at(bwd, 2.0), "0.2 +- 0.03", std::abs(prob_at(bwd, 2.0) - 0.2) <= 0.03);
    row(r, "lag -1 P(ratio ~ 1/2)", prob_at(bwd, 0.5), "0.8 +- 0.03", std::abs(prob_at(bwd, 0.5) - 0.8) <= 0.03);
    row(r, "exceedances", static_cast<double>(fwd.exceedances), ">= 5000", fwd.exceedances >= 5000);
  }

  void c9(CheckResult& r) {
    r.title = "stable sums";
    const auto ex = partial_sum_experiment(preset_model("ENV-C"), 0.5, 1.0, sz_.block_n, sz_.block_reps,
                                           seed(9), nullptr, opt_.workers);
    digest_.add(ex.normalized_sums);
    const auto fit = stable_index_fit(ex.normalized_sums);
    const double mn = *std::min_element(ex.normalized_sums.begin(), ex.normalized_sums.end());
    row(r, "ENV-C alpha_hat", fit.alpha_hat, "0.50 +- 0.05", std::abs(fit.alpha_hat - 0.5) <= 0.05);
    row(r, "ENV-C min V_n", mn, "> 0", mn > 0);
    row(r, "ENV-C skew_hat", fit.skew_hat, "1 (informational)", true);
    const double grid[] = {1e3, 1e4, 1e5};
    const auto g = centering_growth(batch("ENV-B").values, kGoldieB, grid);
    const double target = kLn2 / 3;
    row(r, "ENV-B slope of b_n on ln n (se " + num(g.slope_std_err, 2) + ")", g.slope,
        num(target, 5) + " +- 10%", std::abs(g.slope / target - 1) <= 0.10);
  }

  void c10(CheckResult& r) {
    r.title = "Gaussian branch";
    const auto model = preset_model("ENV-D");
    const auto& b = batch("ENV-D");
    const auto ex = partial_sum_experiment(model, 3.0, 0.0, sz_.block_n, sz_.block_reps, seed(10), &b, opt_.workers);
    digest_.add(ex.normalized_sums);
    const double ratio = ex.raw_scaled_variance / ex.batch_variance;
    const double ks = stats::ks_one_sample(ex.normalized_sums,
                                           [](double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); });
    row(r, "Var(S_n/sqrt n) / Var(X)", ratio, "5 +- 15%", std::abs(ratio / 5 - 1) <= 0.15);
    row(r, "KS vs N(0,1)", ks, "< 0.02", ks < 0.02);
  }

  void c11(CheckResult& r) {
    r.title = "RWRE equivalence";
    const auto sites = preset_sites("RW-K2").reflected();
    std::size_t passed = 0;
    double worst = 0;
    for (std::size_t k = 0; k < sz_.equiv_rounds; ++k) {
      const auto rep = hitting_time_equivalence(sites, 100, sz_.equiv_reps, seed(11, static_cast<int>(k)), opt_.workers);
      digest_.add(rep.ks_distance);
      passed += rep.pass;
      worst = std::max(worst, rep.ks_distance / rep.critical_value_1pct);
    }
    const double frac = static_cast<double>(passed) / static_cast<double>(sz_.equiv_rounds);
    r.rows.push_back({"rounds below the 1% critical value",
                      std::to_string(passed) + "/" + std::to_string(sz_.equiv_rounds), ">= 95%", frac >= 0.95});
    row(r, "worst KS / critical", worst, "informational", true);
  }

  void c12(CheckResult& r) {
    r.title = "RWRE limits, kappa = 1/2";
    const auto sites = preset_sites("RW-KHALF");
    LimitsOptions lo;
    lo.walk.engine = WalkEngine::kCrossingCounts;
    lo.position_time = sz_.position_time;
    lo.position_reps = sz_.position_reps;
    lo.workers = opt_.workers;
    // The last n matches t^kappa, the scale of W_t.
    const auto n_match = static_cast<std::uint64_t>(std::llround(std::sqrt(static_cast<double>(sz_.position_time))));
    const std::uint64_t grid[] = {200, 400, n_match};
    const auto rep = hitting_time_limits(sites, 0.5, 1.0, grid, sz_.limit_reps, seed(12), lo);
    row(r, "KS(T_200/200^2, T_400/400^2)", rep.consecutive_ks.at(0), "< 0.05", rep.consecutive_ks.at(0) < 0.05);
    row(r, "censored fraction", rep.censored_fraction, "< 0.001", rep.censored_fraction < 0.001);
    for (const auto& q : rep.position_checks) {
      digest_.add(q.position_quantile);
      row(r, "W_t/t^k quantile " + num(q.p) + " = " + num(q.position_quantile, 4) + " vs T_" +
                 std::to_string(n_match) + " transform " + num(q.transformed_quantile, 4),
          q.relative_error, "rel. error <= 0.10", q.relative_error <= 0.10);
    }
  }

  void c13(CheckResult& r) {
    r.title = "most-visited edge";
    const auto fit = most_visited_edge(preset_sites("RW-K2"), sz_.edge_n, sz_.edge_reps, kThetaA, 2.0, kGoldieA,
                                       seed(13), opt_.workers);
    row(r, "KS vs Frechet(9/20, 2), n=" + std::to_string(sz_.edge_n), fit.ks_distance, "< 0.05", fit.ks_distance < 0.05);
  }

  void c14(CheckResult& r) {
    r.title = "anticlustering";
    const auto& p = path("ENV-A");
    const double q = 0.9999;
    const double u = pooled_quantile(p, q);
    const std::size_t ks[] = {1, 5, 20};
    const auto rep = anticlustering_diagnostic(u, ks, 100, p);
    bool monotone = true;
    for (std::size_t j = 1; j < rep.probability.size(); ++j) {
      monotone = monotone && rep.probability[j] <= rep.probability[j - 1];
    }
    for (std::size_t j = 0; j < rep.probability.size(); ++j) {
      row(r, "P(max_{" + std::to_string(ks[j]) + "<=|t|<=100} X > u | X_0 > u), u = q" + num(q) + " = " + num(u),
          rep.probability[j], j + 1 == rep.probability.size() ? "< 0.05" : "nonincreasing",
          j + 1 == rep.probability.size() ? rep.probability[j] < 0.05 : true);
    }
    r.rows.push_back({"nonincreasing in k", monotone ? "yes" : "no", "yes", monotone});
    r.rows.push_back({"conditioning events", std::to_string(rep.conditioning_events), ">= 100", rep.conditioning_events >= 100});
  }

  VerifyOptions opt_;
  Sizes sz_;
  Digest digest_;
  std::map<std::string, StationaryBatch> batches_;
  std::map<std::string, std::vector<std::vector<std::uint64_t>>> paths_;
};

CheckResult Suite::preset(const std::string& name) {
  CheckResult r;
  r.title = name + " report";
  digest_ = Digest{};
  const auto t0 = Clock::now();
  const auto model = preset_model(name);
  const std::map<std::string, double> kappas{{"ENV-A", 2}, {"ENV-B", 1}, {"ENV-C", 0.5}, {"ENV-D", 3}, {"ENV-K15", 1.5}};
  const std::map<std::string, double> goldie{{"ENV-A", kGoldieA}, {"ENV-B", kGoldieB}};
  const std::map<std::string, double> thetas{{"ENV-A", kThetaA}, {"ENV-B", kThetaB}, {"ENV-C", kThetaC}};
  try {
    const auto cr = solve_kappa(model);
    const double kappa = cr.kappa;
    const double kt = kappas.at(name);
    row(r, "kappa", kappa, num(kt) + " +- 1e-9", std::abs(kappa - kt) <= 1e-9);
    row(r, "lattice span h (0 = nonarithmetic)", cr.lattice_span, "informational", true);
    double tsum = 0;
    for (double p : tilt(model, kappa).probs) tsum += p;
    row(r, "tilted probs sum", tsum, "1 +- 1e-12", std::abs(tsum - 1) <= 1e-12);

    const auto& b = batch(name);
    const auto values = stats::to_double(b.values);
    const auto g = goldie_C_formula(model, kappa, b.values, seed(100), opt_.workers);
    if (goldie.count(name)) {
      const double tol = std::max(0.15 * goldie.at(name), 3 * g.C_std_err);
      row(r, "C formula (se " + num(g.C_std_err, 3) + ")", g.C, num(goldie.at(name)) + " +- max(15%, 3 se)",
          std::abs(g.C - goldie.at(name)) <= tol);
    } else {
      row(r, "C formula (se " + num(g.C_std_err, 3) + ")", g.C, "informational", true);
    }
    PlateauOptions po;
    po.lattice_factor = cr.lattice_span > 0 ? std::exp(cr.lattice_span) : 0.0;
    const double n = static_cast<double>(values.size());
    const double x_low = stats::quantile(values, 0.99);
    const double x_high = stats::quantile(values, 1 - 200 / n);
    try {
      const auto pl = tail_plateau(values, kappa, std::max(1.0, x_low), x_high, po);
      // A window shorter than two lattice periods says little about C.
      const bool judged =
          goldie.count(name) && (po.lattice_factor == 0 || pl.x_high >= po.lattice_factor * po.lattice_factor * pl.x_low);
      row(r, "plateau C [" + num(pl.x_low) + ", " + num(pl.x_high) + "]", pl.plateau_C,
          judged ? num(goldie.at(name)) + " +- 15%" : "informational",
          judged ? std::abs(pl.plateau_C / goldie.at(name) - 1) <= 0.15 : true);
    } catch (const Error& e) {
      r.rows.push_back({"plateau C", "not available", std::string("informational: ") + e.what(), true});
    }
    const auto h = hill_estimator(values, values.size() / 100);
    // Bands are applied where the acceptance suite defines them (Hill: A and
    // B; blocks: A, B and C). Elsewhere the estimator bias at these sizes is
    // real and the row is shown for information.
    const bool hill_judged = name == "ENV-A" || name == "ENV-B";
    row(r, "Hill kappa_hat (se " + num(h.std_err, 2) + ")", h.kappa_hat,
        hill_judged ? num(kt) + " +- 10%" : "informational", !hill_judged || std::abs(h.kappa_hat / kt - 1) <= 0.10);

    double theta_ref = 0;
    try {
      theta_ref = theta_lattice_exact(model, kappa).value;
      if (thetas.count(name)) {
        row(r, "theta exact", theta_ref, num(thetas.at(name)), std::abs(theta_ref - thetas.at(name)) <= 1e-12);
      } else {
        row(r, "theta exact (two-point lattice)", theta_ref, "informational", true);
      }
    } catch (const NotTwoPointLattice&) {
    }
    const std::uint64_t horizon = std::max<std::uint64_t>(200, default_theta_horizon(model, kappa, seed(101)));
    const auto d = theta_direct(model, kappa, horizon, sz_.theta_reps, seed(102), opt_.workers);
    row(r, "theta direct (se " + num(d.std_err, 2) + ")", d.value,
        theta_ref > 0 ? num(theta_ref, 5) + " +- 3 se" : "informational",
        theta_ref > 0 ? std::abs(d.value - theta_ref) <= 3 * d.std_err : true);
    const auto bl = theta_blocks(path(name), block_length_for(0.999), 0.999);
    const bool blocks_judged = thetas.count(name) > 0;
    row(r, "theta blocks", bl.value, blocks_judged ? num(theta_ref, 5) + " +- 0.05" : "informational",
        !blocks_judged || std::abs(bl.value - theta_ref) <= 0.05);

    const std::uint64_t sum_n = sz_.block_n;
    KappaRegime regime;
    try {
      regime = classify_regime(kappa);
    } catch (const RegimeMismatch&) {
      r.rows.push_back({"partial sums", "skipped", "kappa = 2 is excluded", true});
      throw;
    }
    if (regime == KappaRegime::kSub1) {
      const auto ex = partial_sum_experiment(model, kappa, 1.0, sum_n, sz_.block_reps, seed(103), nullptr, opt_.workers);
      const auto fit = stable_index_fit(ex.normalized_sums);
      row(r, "stable alpha_hat", fit.alpha_hat, num(kappa) + " +- 0.05", std::abs(fit.alpha_hat - kappa) <= 0.05);
    } else if (regime == KappaRegime::kAbove2) {
      const auto ex = partial_sum_experiment(model, kappa, 0.0, sum_n, sz_.block_reps, seed(103), &b, opt_.workers);
      double em = 0;
      for (std::size_t i = 0; i < model.size(); ++i) em += model.prob(i) * model.offspring_mean(i);
      const double target = (1 + em) / (1 - em);
      const double ratio = ex.raw_scaled_variance / ex.batch_variance;
      row(r, "Var(S_n/sqrt n)/Var(X)", ratio, num(target) + " +- 15%", std::abs(ratio / target - 1) <= 0.15);
    } else {
      const double C = goldie.count(name) ? goldie.at(name) : g.C;
      const auto ex = partial_sum_experiment(model, kappa, C, sum_n, sz_.block_reps, seed(103), &b, opt_.workers);
      row(r, "b_n at n=" + std::to_string(sum_n), ex.b_n, "informational", true);
      row(r, "median V_n", stats::quantile(ex.normalized_sums, 0.5), "informational", true);
    }
  } catch (const RegimeMismatch&) {
  } catch (const Error& e) {
    r.rows.push_back({"error", e.what(), "no error", false});
  }
  r.seconds = seconds_since(t0);
  r.pass = true;
  for (const auto& row : r.rows) r.pass = r.pass && row.pass;
  r.digest = digest_.value();
  return r;
}

}  // namespace

std::vector<CheckResult> run_acceptance(const VerifyOptions& options, std::vector<int> ids,
                                        const std::function<void(const CheckResult&)>& on_result) {
  if (ids.empty()) {
    for (int i = 1; i <= kCriteriaCount; ++i) ids.push_back(i);
  }
  std::sort(ids.begin(), ids.end());
  std::vector<CheckResult> out;
  Suite suite(options);
  for (int id : ids) {
    if (id == kCriteriaCount) continue;
    out.push_back(suite.run(id));
    if (on_result) on_result(out.back());
  }
  if (std::find(ids.begin(), ids.end(), kCriteriaCount) != ids.end()) {
    CheckResult det;
    det.id = kCriteriaCount;
    det.title = "determinism across worker counts";
    const auto t0 = Clock::now();
    VerifyOptions other = options;
    const unsigned w = resolve_workers(options.workers);
    other.workers = w > 1 ? 1 : 3;
    Suite rerun(other);
    std::vector<CheckResult> base = out;
    if (base.empty()) {
      // Criterion 15 asked for on its own: establish the reference run first.
      for (int id = 1; id < kCriteriaCount; ++id) base.push_back(suite.run(id));
    }
    for (const auto& b : base) {
      const CheckResult again = rerun.run(b.id);
      char buf[64];
      std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(again.digest));
      det.rows.push_back({"criterion " + std::to_string(b.id) + " digest, " + std::to_string(w) + " vs " +
                              std::to_string(other.workers) + " workers",
                          buf, b.digest == again.digest ? "identical" : "DIFFERENT", b.digest == again.digest});
    }
    det.seconds = seconds_since(t0);
    det.pass = !det.rows.empty();
    for (const auto& row : det.rows) det.pass = det.pass && row.pass;
    out.push_back(det);
    if (on_result) on_result(out.back());
  }
  return out;
}

CheckResult run_preset_report(const std::string& preset, const VerifyOptions& options) {
  Suite suite(options);
  return suite.preset(preset);
}

std::string format_result(const CheckResult& result) {
  std::string out;
  char head[256];
  std::snprintf(head, sizeof head, "%s [%2d] %s (%.1f s)\n", result.pass ? "PASS" : "FAIL", result.id,
                result.title.c_str(), result.seconds);
  out += head;
  for (const auto& row : result.rows) {
    out += "       ";
    out += row.pass ? "ok   " : "FAIL ";
    out += row.label + ": " + row.measured + "  (target " + row.target + ")\n";
  }
  return out;
}

}  // namespace bpire
