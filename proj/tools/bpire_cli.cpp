// bpire: command-line front end for the toolkit.
//
// Exit codes: 0 ok, 1 usage, 2 validation/parse, 3 runtime, 4 acceptance failure.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "bpire/chain_sim.hpp"
#include "bpire/cramer.hpp"
#include "bpire/errors.hpp"
#include "bpire/extremes.hpp"
#include "bpire/model_io.hpp"
#include "bpire/parallel.hpp"
#include "bpire/rwre.hpp"
#include "bpire/stable_limits.hpp"
#include "bpire/stats.hpp"
#include "bpire/tail_analysis.hpp"
#include "bpire/verification.hpp"

using nlohmann::json;
using namespace bpire;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitValidation = 2;
constexpr int kExitRuntime = 3;
constexpr int kExitAcceptance = 4;

struct Common {
  std::uint64_t seed = 20240917;
  unsigned workers = 0;
  std::string out;
};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Clock = std::chrono::steady_clock;

json manifest_json(const RunManifest& m) {
  return {{"hash", m.hash()},
          {"tool_version", m.tool_version},
          {"master_seed", m.master_seed},
          {"model_fingerprint", m.model_fingerprint},
          {"subcommand", m.subcommand},
          {"flags", m.flags},
          {"wall_time_seconds", m.wall_time_seconds},
          {"workers", m.workers}};
}

// Collects the manifest for one invocation; flags are recorded as given.
struct Run {
  RunManifest manifest;
  Clock::time_point start = Clock::now();

  Run(const std::string& sub, const Common& c, std::map<std::string, std::string> flags, std::string fingerprint) {
    manifest.tool_version = std::string(kToolVersion);
    manifest.master_seed = c.seed;
    manifest.subcommand = sub;
    manifest.flags = std::move(flags);
    manifest.model_fingerprint = std::move(fingerprint);
    manifest.workers = resolve_workers(c.workers);
  }

  json finish(json body) {
    manifest.wall_time_seconds = std::chrono::duration<double>(Clock::now() - start).count();
    body["manifest"] = manifest_json(manifest);
    return body;
  }
};

void emit_json(const json& j, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << j.dump(2) << "\n";
    return;
  }
  std::ofstream f(path);
  if (!f) throw Error("cannot write " + path);
  f << j.dump(2) << "\n";
}

std::string csv_path_for(const std::string& out, const std::string& suffix) {
  if (out.empty() || out == "-") return "";
  const auto dot = out.rfind('.');
  return (dot == std::string::npos ? out : out.substr(0, dot)) + suffix;
}

std::string ftos(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string flag_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

json law_json(const std::vector<LawAtom>& law) {
  json a = json::array();
  for (const auto& l : law) a.push_back({{"value", l.value}, {"prob", l.prob}});
  return a;
}

json cramer_json(const CramerReport& r) {
  return {{"kappa", r.kappa},
          {"lambda_prime_at_kappa", r.lambda_prime_at_kappa},
          {"mean_log_m", r.mean_log_m},
          {"subcritical", r.subcritical},
          {"nonarithmetic_hint", r.nonarithmetic_hint},
          {"lattice_span", r.lattice_span},
          {"iterations", r.iterations}};
}

json theta_json(const ThetaEstimate& t) {
  return {{"value", t.value},          {"method", std::string(to_string(t.method))},
          {"std_err", t.std_err},      {"horizon", t.horizon},
          {"truncation_bias_bound", t.truncation_bias_bound}, {"exceedances", t.exceedances}};
}

json frechet_json(const FrechetFit& f) {
  return {{"block_length", f.block_length}, {"maxima_count", f.maxima_count}, {"a_n", f.a_n},
          {"theta", f.theta},               {"kappa", f.kappa},               {"ks_distance", f.ks_distance},
          {"a_n_from_quantile", f.a_n_from_quantile}};
}

double resolve_kappa(const EnvironmentModel& model, const std::string& spec) {
  if (spec == "auto") return solve_kappa(model).kappa;
  try {
    return std::stod(spec);
  } catch (const std::exception&) {
    throw UsageError("--kappa must be 'auto' or a number, got '" + spec + "'");
  }
}

// ---------------------------------------------------------------- kappa
int cmd_kappa(const Common& c, const std::string& model_arg, double tol) {
  const auto model = parse_model(model_arg);
  Run run("kappa", c, {{"model", model_arg}, {"tol", flag_num(tol)}}, model_fingerprint(model));
  const auto rep = solve_kappa(model, tol);
  json body = cramer_json(rep);
  body["tilted_probs"] = tilt(model, rep.kappa).probs;
  body["lambda_at_kappa"] = lambda(model, rep.kappa);
  emit_json(run.finish(body), c.out);
  return 0;
}

// ------------------------------------------------------------- simulate
int cmd_simulate(const Common& c, const std::string& model_arg, std::size_t count, std::optional<std::uint64_t> burnin,
                 bool trajectory) {
  const auto model = parse_model(model_arg);
  const double kappa = solve_kappa(model).kappa;
  const std::uint64_t h = burnin.value_or(recommended_burnin(model, kappa));
  Run run("simulate", c,
          {{"model", model_arg}, {"count", std::to_string(count)}, {"burnin", std::to_string(h)},
           {"mode", trajectory ? "trajectory" : "stationary"}},
          model_fingerprint(model));
  std::vector<std::uint64_t> values;
  json side;
  if (trajectory) {
    auto t = simulate_forward({model, 0, h, c.seed}, count);
    values = std::move(t.values);
    side["start_index"] = t.start_index;
  } else {
    auto b = sample_stationary(model, h, count, c.seed, c.workers);
    side["bias_bound_exponent"] = b.bias_bound_exponent;
    side["bias_bound"] = std::exp(b.bias_bound_exponent);
    side["burn_in_too_small"] = b.burn_in_too_small;
    values = std::move(b.values);
  }
  side["burn_in"] = h;
  side["count"] = values.size();
  side["kappa"] = kappa;
  json full = run.finish(side);

  auto write_csv = [&](std::ostream& os) {
    os << "# manifest " << run.manifest.hash() << "\n";
    os << "index,value\n";
    for (std::size_t i = 0; i < values.size(); ++i) os << i << ',' << values[i] << '\n';
  };
  if (c.out.empty() || c.out == "-") {
    write_csv(std::cout);
    std::cerr << full.dump(2) << "\n";
  } else {
    std::ofstream f(c.out);
    if (!f) throw Error("cannot write " + c.out);
    write_csv(f);
    emit_json(full, c.out + ".json");
  }
  return 0;
}

// ---------------------------------------------------------------- tails
int cmd_tails(const Common& c, const std::string& model_arg, const std::string& kappa_arg, std::size_t count,
              std::size_t k, std::size_t path_length) {
  const auto model = parse_model(model_arg);
  const auto cr = solve_kappa(model);
  const double kappa = resolve_kappa(model, kappa_arg);
  Run run("tails", c,
          {{"model", model_arg}, {"kappa", kappa_arg}, {"count", std::to_string(count)}, {"k", std::to_string(k)},
           {"path_length", std::to_string(path_length)}},
          model_fingerprint(model));
  const auto batch = sample_stationary(model, recommended_burnin(model, cr.kappa), count,
                                       derive_seed(c.seed, StreamKind::kStationaryChain, 0), c.workers);
  const auto values = stats::to_double(batch.values);
  if (k == 0) k = std::max<std::size_t>(10, count / 100);

  json body;
  body["kappa"] = kappa;
  body["sample_size"] = count;
  body["nonarithmetic_hint"] = cr.nonarithmetic_hint;
  if (!cr.nonarithmetic_hint) {
    body["note"] = "lattice environment: the tail oscillates with period " + ftos(std::exp(cr.lattice_span)) +
                   " and C is reported as a period-averaged plateau";
  }
  const auto hill = hill_estimator(values, k);
  body["hill"] = {{"kappa_hat", hill.kappa_hat}, {"std_err", hill.std_err}, {"k", hill.k}, {"threshold", hill.threshold}};
  const auto g = goldie_C_formula(model, kappa, batch.values, derive_seed(c.seed, StreamKind::kGoldie, 0), c.workers);
  body["goldie"] = {{"C", g.C}, {"C_std_err", g.C_std_err}, {"numerator", g.numerator},
                    {"numerator_std_err", g.numerator_std_err}, {"lambda_prime", g.lambda_prime}};
  PlateauOptions po;
  po.lattice_factor = cr.lattice_span > 0 ? std::exp(cr.lattice_span) : 0.0;
  const double n = static_cast<double>(values.size());
  const double x_low = std::max(1.0, stats::quantile(values, 0.99));
  const double x_high = stats::quantile(values, 1 - 200 / n);
  try {
    const auto p = tail_plateau(values, kappa, x_low, x_high, po);
    body["plateau"] = {{"C", p.plateau_C}, {"x_low", p.x_low}, {"x_high", p.x_high}, {"grid_points", p.grid_points},
                       {"exceedances_at_high", p.exceedances_at_high}};
  } catch (const InsufficientExceedances& e) {
    body["plateau"] = {{"error", e.what()}};
  }

  if (path_length > 0) {
    ChainConfig cfg{model, 0, recommended_burnin(model, cr.kappa), derive_seed(c.seed, StreamKind::kTrajectory, 0)};
    std::vector<std::vector<std::uint64_t>> paths{simulate_forward(cfg, path_length).values};
    json spectral = json::array();
    for (int lag : {1, -1}) {
      try {
        const auto s = spectral_ratio_test(model, kappa, lag, paths, 0.999);
        spectral.push_back({{"lag", s.lag}, {"threshold_quantile", s.threshold_quantile}, {"threshold", s.threshold},
                            {"empirical", law_json(s.empirical)}, {"reference", law_json(s.reference)},
                            {"ks_distance", s.ks_distance}, {"exceedances", s.exceedances},
                            {"matched_fraction", s.matched_fraction}});
      } catch (const TooFewExceedances& e) {
        spectral.push_back({{"lag", lag}, {"error", e.what()}});
      }
    }
    body["spectral"] = spectral;
    const std::size_t ks[] = {1, 5, 20};
    try {
      const auto a = anticlustering_diagnostic(pooled_quantile(paths, 0.9999), ks, 100, paths);
      body["anticlustering"] = {{"threshold", a.threshold}, {"r", a.r}, {"k", a.k_list}, {"probability", a.probability},
                                {"std_err", a.std_err}, {"conditioning_events", a.conditioning_events}};
    } catch (const Error& e) {
      body["anticlustering"] = {{"error", e.what()}};
    }
  }
  emit_json(run.finish(body), c.out);
  return 0;
}

// ------------------------------------------------------------- extremes
int cmd_extremes(const Common& c, const std::string& model_arg, const std::string& method, std::uint64_t n,
                 std::size_t reps, std::uint64_t horizon, std::size_t path_length, double q) {
  const auto model = parse_model(model_arg);
  const double kappa = solve_kappa(model).kappa;
  if (method != "all" && method != "exact" && method != "direct" && method != "blocks" && method != "frechet") {
    throw UsageError("--method must be one of all, exact, direct, blocks, frechet");
  }
  Run run("extremes", c,
          {{"model", model_arg}, {"method", method}, {"n", std::to_string(n)}, {"reps", std::to_string(reps)},
           {"horizon", std::to_string(horizon)}, {"path_length", std::to_string(path_length)}, {"q", flag_num(q)}},
          model_fingerprint(model));
  json body;
  body["kappa"] = kappa;
  std::optional<double> theta;
  auto want = [&](const char* m) { return method == "all" || method == m; };
  if (want("exact") || want("frechet")) {
    try {
      const auto t = theta_lattice_exact(model, kappa);
      body["exact"] = theta_json(t);
      theta = t.value;
    } catch (const NotTwoPointLattice& e) {
      body["exact"] = {{"error", e.what()}};
    }
  }
  if (want("direct") || (want("frechet") && !theta)) {
    const std::uint64_t h = horizon ? horizon : default_theta_horizon(model, kappa, derive_seed(c.seed, StreamKind::kPilot, 0));
    const auto t = theta_direct(model, kappa, h, reps, c.seed, c.workers);
    body["direct"] = theta_json(t);
    if (!theta) theta = t.value;
  }
  if (want("blocks")) {
    ChainConfig cfg{model, 0, recommended_burnin(model, kappa), derive_seed(c.seed, StreamKind::kTrajectory, 0)};
    std::vector<std::vector<std::uint64_t>> paths{simulate_forward(cfg, path_length).values};
    const auto block = static_cast<std::size_t>(std::llround(0.1 / (1 - q)));
    body["blocks"] = theta_json(theta_blocks(paths, block, q));
    body["blocks"]["block_length"] = block;
  }
  if (want("frechet")) {
    const auto batch = sample_stationary(model, recommended_burnin(model, kappa), std::max<std::size_t>(reps, 100000),
                                         derive_seed(c.seed, StreamKind::kStationaryChain, 0), c.workers);
    const auto g = goldie_C_formula(model, kappa, batch.values, derive_seed(c.seed, StreamKind::kGoldie, 0), c.workers);
    body["frechet"] = frechet_json(frechet_gof(model, kappa, g.C, n, reps, *theta, c.seed, c.workers));
    body["frechet"]["C"] = g.C;
  }
  emit_json(run.finish(body), c.out);
  return 0;
}

// ----------------------------------------------------------------- sums
int cmd_sums(const Common& c, const std::string& model_arg, std::uint64_t n, std::size_t reps,
             std::optional<double> C_arg, std::size_t batch_size) {
  const auto model = parse_model(model_arg);
  const double kappa = solve_kappa(model).kappa;
  const KappaRegime regime = classify_regime(kappa);
  Run run("sums", c,
          {{"model", model_arg}, {"n", std::to_string(n)}, {"reps", std::to_string(reps)},
           {"C", C_arg ? flag_num(*C_arg) : "auto"}, {"batch", std::to_string(batch_size)}},
          model_fingerprint(model));
  json body;
  body["kappa"] = kappa;
  body["regime"] = std::string(to_string(regime));
  std::optional<StationaryBatch> batch;
  double C = C_arg.value_or(1.0);
  if (regime != KappaRegime::kSub1 || !C_arg) {
    batch = sample_stationary(model, recommended_burnin(model, kappa), batch_size,
                              derive_seed(c.seed, StreamKind::kStationaryChain, 0), c.workers);
  }
  if (!C_arg && regime != KappaRegime::kAbove2) {
    const auto g = goldie_C_formula(model, kappa, batch->values, derive_seed(c.seed, StreamKind::kGoldie, 0), c.workers);
    C = g.C;
    body["C_std_err"] = g.C_std_err;
  }
  body["C"] = C;
  const auto ex = partial_sum_experiment(model, kappa, C, n, reps, c.seed, batch ? &*batch : nullptr, c.workers);
  body["n"] = ex.n;
  body["reps"] = ex.reps;
  body["a_n"] = ex.a_n;
  body["b_n"] = ex.b_n;
  body["b_n_std_err"] = ex.b_n_std_err;
  if (regime == KappaRegime::kAbove2) {
    body["sigma"] = ex.sigma;
    body["stationary_mean"] = ex.stationary_mean;
    body["batch_variance"] = ex.batch_variance;
    body["variance_ratio"] = ex.raw_scaled_variance / ex.batch_variance;
    body["ks_vs_normal"] = stats::ks_one_sample(ex.normalized_sums, [](double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); });
  } else {
    try {
      const auto fit = stable_index_fit(ex.normalized_sums);
      body["fit"] = {{"alpha_hat", fit.alpha_hat}, {"scale_hat", fit.scale_hat}, {"d_hat", fit.d_hat},
                     {"skew_hat", fit.skew_hat}, {"location_hat", fit.location_hat}, {"grid_points", fit.grid_points},
                     {"t_low", fit.t_low}, {"t_high", fit.t_high}, {"method", std::string(fit.method)}};
    } catch (const IllConditionedFit& e) {
      body["fit"] = {{"error", e.what()}};
    }
    if (regime == KappaRegime::kSub1) {
      try {
        const auto th = theta_lattice_exact(model, kappa);
        const auto cm = cluster_moment(model, kappa, default_theta_horizon(model, kappa, derive_seed(c.seed, StreamKind::kPilot, 0)) * 2,
                                       200000, derive_seed(c.seed, StreamKind::kClusterProposal, 0), c.workers);
        body["theoretical"] = {{"theta", th.value}, {"cluster_moment", cm.value}, {"cluster_moment_std_err", cm.std_err},
                               {"d", stable_scale_d(kappa, th.value, cm.value)},
                               {"d_fit", body["fit"].contains("d_hat") ? body["fit"]["d_hat"].get<double>() : 0.0}};
      } catch (const Error& e) {
        body["theoretical"] = {{"error", e.what()}};
      }
    }
  }
  std::vector<double> sums = ex.normalized_sums;
  const std::string csv = csv_path_for(c.out, "_sums.csv");
  if (!csv.empty()) {
    std::ofstream f(csv);
    f << "# manifest " << run.manifest.hash() << "\nreplicate,value\n";
    for (std::size_t i = 0; i < sums.size(); ++i) f << i << ',' << ftos(sums[i]) << '\n';
    body["csv"] = csv;
  }
  emit_json(run.finish(body), c.out);
  return 0;
}

// ----------------------------------------------------------------- rwre
int cmd_rwre(const Common& c, const std::string& sites_arg, const std::string& mode, std::uint64_t n, std::size_t reps,
             bool crossing_engine, std::uint64_t position_time, std::size_t position_reps, std::optional<double> C_arg) {
  const auto sites = parse_sites(sites_arg);
  const auto ratio = derive_ratio_model(sites);
  const double kappa = solve_kappa(ratio).kappa;
  Run run("rwre", c,
          {{"sites", sites_arg}, {"mode", mode}, {"n", std::to_string(n)}, {"reps", std::to_string(reps)},
           {"engine", crossing_engine ? "crossings" : "stepwise"}, {"position_time", std::to_string(position_time)},
           {"position_reps", std::to_string(position_reps)}, {"C", C_arg ? flag_num(*C_arg) : "auto"}},
          model_fingerprint(sites));
  WalkOptions wo;
  wo.engine = crossing_engine ? WalkEngine::kCrossingCounts : WalkEngine::kStepwise;
  json body;
  body["kappa"] = kappa;
  body["drift_exponent"] = sites.drift_exponent();

  const std::string csv = csv_path_for(c.out, "_replicates.csv");
  if (mode == "equivalence") {
    const auto rep = hitting_time_equivalence(sites.reflected(), n, reps, c.seed, c.workers, wo);
    body["equivalence"] = {{"ks_distance", rep.ks_distance}, {"critical_value_1pct", rep.critical_value_1pct},
                           {"pass", rep.pass}, {"mean_walk", rep.mean_walk}, {"mean_chain", rep.mean_chain},
                           {"reps", rep.reps}};
  } else if (mode == "limits") {
    LimitsOptions lo;
    lo.walk = wo;
    lo.workers = c.workers;
    lo.position_time = kappa < 1 ? position_time : 0;
    lo.position_reps = position_reps;
    const std::uint64_t grid[] = {n / 2, n};
    const auto rep = hitting_time_limits(sites, kappa, 1.0, grid, reps, c.seed, lo);
    json samples = json::array();
    for (const auto& s : rep.samples) samples.push_back({{"n", s.n}, {"censored", s.censored}, {"median", stats::quantile(s.scaled, 0.5)}});
    json checks = json::array();
    for (const auto& q : rep.position_checks) {
      checks.push_back({{"p", q.p}, {"position_quantile", q.position_quantile},
                        {"transformed_quantile", q.transformed_quantile}, {"relative_error", q.relative_error}});
    }
    body["limits"] = {{"centering_e_l", rep.centering_e_l}, {"samples", samples}, {"consecutive_ks", rep.consecutive_ks},
                      {"censored_fraction", rep.censored_fraction}, {"position_time", rep.position_time},
                      {"position_checks", checks}};
  } else if (mode == "maxedge") {
    double theta = 0;
    try {
      theta = theta_lattice_exact(ratio, kappa).value;
    } catch (const NotTwoPointLattice&) {
      theta = theta_direct(ratio, kappa, default_theta_horizon(ratio, kappa, c.seed), 1000000, c.seed, c.workers).value;
    }
    double C = 0;
    if (C_arg) {
      C = *C_arg;
    } else {
      const auto batch = sample_stationary(ratio, recommended_burnin(ratio, kappa), 1000000,
                                           derive_seed(c.seed, StreamKind::kStationaryChain, 0), c.workers);
      C = goldie_C_formula(ratio, kappa, batch.values, derive_seed(c.seed, StreamKind::kGoldie, 0), c.workers).C;
    }
    body["maxedge"] = frechet_json(most_visited_edge(sites, n, reps, theta, kappa, C, c.seed, c.workers, wo));
    body["maxedge"]["C"] = C;
  } else {
    throw UsageError("--mode must be equivalence, limits or maxedge");
  }

  if (!csv.empty()) {
    // Per-replicate hitting times and edge maxima, walks seeded as in the experiments above.
    std::vector<RwreRun> runs(reps);
    const auto& walk_sites = mode == "equivalence" ? sites.reflected() : sites;
    parallel_for(reps, c.workers, [&](std::size_t r) {
      runs[r] = simulate_walk(walk_sites, n, derive_seed(c.seed, StreamKind::kWalk, r), wo);
    });
    std::ofstream f(csv);
    f << "# manifest " << run.manifest.hash() << "\nreplicate,hitting_time,max_crossings\n";
    for (std::size_t r = 0; r < reps; ++r) f << r << ',' << runs[r].hitting_time << ',' << runs[r].max_crossings << '\n';
    body["csv"] = csv;
  }
  emit_json(run.finish(body), c.out);
  return 0;
}

// --------------------------------------------------------------- report
json result_json(const CheckResult& r) {
  json rows = json::array();
  for (const auto& row : r.rows) {
    rows.push_back({{"label", row.label}, {"measured", row.measured}, {"target", row.target}, {"pass", row.pass}});
  }
  char digest[20];
  std::snprintf(digest, sizeof digest, "%016llx", static_cast<unsigned long long>(r.digest));
  return {{"id", r.id}, {"title", r.title}, {"pass", r.pass}, {"seconds", r.seconds}, {"digest", digest}, {"rows", rows}};
}

json read_json_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error("cannot read " + path);
  try {
    return json::parse(f);
  } catch (const json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
}

int cmd_compare(const std::string& a_path, const std::string& b_path) {
  const json a = read_json_file(a_path), b = read_json_file(b_path);
  const auto fp = [](const json& j) { return j.at("manifest").at("model_fingerprint").get<std::string>(); };
  if (fp(a) != fp(b)) {
    throw ValidationError("refusing to compare: model fingerprints differ (" + fp(a) + " vs " + fp(b) + ")");
  }
  int differing = 0;
  const auto& ra = a.at("results");
  const auto& rb = b.at("results");
  for (std::size_t i = 0; i < std::min(ra.size(), rb.size()); ++i) {
    const bool same = ra[i].at("digest") == rb[i].at("digest");
    differing += !same;
    std::printf("%-9s [%2d] %s\n", same ? "identical" : "differs", ra[i].at("id").get<int>(),
                ra[i].at("title").get<std::string>().c_str());
  }
  if (ra.size() != rb.size()) {
    std::printf("result counts differ: %zu vs %zu\n", ra.size(), rb.size());
    ++differing;
  }
  return differing == 0 ? 0 : kExitAcceptance;
}

int cmd_report(const Common& c, const std::string& preset, const std::string& budget, bool acceptance,
               const std::vector<int>& only) {
  if (budget != "quick" && budget != "full") throw UsageError("--budget must be quick or full");
  VerifyOptions opt;
  opt.seed = c.seed;
  opt.workers = c.workers;
  opt.budget = budget == "full" ? Budget::kFull : Budget::kQuick;
  std::string fingerprint;
  if (!acceptance) {
    if (!is_preset_name(preset)) throw ValidationError("report needs an environment preset, got '" + preset + "'");
    fingerprint = model_fingerprint(preset_model(preset));
  } else {
    // The acceptance suite spans every preset; fingerprint the whole set.
    std::string all;
    for (const auto& name : preset_names()) all += model_fingerprint(preset_model(name));
    for (const char* s : {"RW-K2", "RW-K1", "RW-KHALF"}) all += model_fingerprint(preset_sites(s));
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(all)));
    fingerprint = buf;
  }
  std::map<std::string, std::string> flags{{"budget", budget}, {"mode", acceptance ? "acceptance" : "preset"}};
  if (!acceptance) flags["preset"] = preset;
  if (!only.empty()) {
    std::string ids;
    for (int id : only) ids += (ids.empty() ? "" : ",") + std::to_string(id);
    flags["only"] = ids;
  }
  Run run("report", c, flags, fingerprint);
  json results = json::array();
  bool pass = true;
  auto print = [&](const CheckResult& r) {
    std::fputs(format_result(r).c_str(), stderr);
    results.push_back(result_json(r));
    pass = pass && r.pass;
  };
  if (acceptance) {
    run_acceptance(opt, only, print);
  } else {
    print(run_preset_report(preset, opt));
  }
  json body{{"results", results}, {"pass", pass}};
  emit_json(run.finish(body), c.out);
  return pass ? 0 : kExitAcceptance;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Branching processes in random environment: simulation and verification toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolVersion));
  Common c;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--seed", c.seed, "master seed (BPIRE_SEED overrides)");
    sub->add_option("--workers", c.workers, "worker threads, 0 = all cores");
    sub->add_option("--out", c.out, "output file ('-' or empty = stdout)");
  };

  std::string model_arg, sites_arg, kappa_arg = "auto", method = "all", mode = "equivalence", preset = "ENV-B",
                                    budget = "quick", engine = "stepwise";
  double tol = 1e-12, q = 0.999;
  std::size_t count = 100000, reps = 10000, k = 0, path_length = 0, batch_size = 1000000, position_reps = 4000;
  std::uint64_t n = 10000, horizon = 0, t_position = 1000000;
  std::optional<std::uint64_t> burnin;
  std::optional<double> C_arg;
  bool trajectory = false, acceptance = false;
  std::vector<int> only;
  std::vector<std::string> compare;

  auto* kappa = app.add_subcommand("kappa", "Cramer exponent and tilted law");
  kappa->add_option("--model", model_arg, "model file, preset name or '-'")->required();
  kappa->add_option("--tol", tol, "root tolerance");
  add_common(kappa);

  auto* simulate = app.add_subcommand("simulate", "stationary batch or trajectory as CSV");
  simulate->add_option("--model", model_arg)->required();
  simulate->add_option("--count", count, "number of values");
  simulate->add_option("--burnin", burnin, "burn-in steps (default: bias bound 1e-6)");
  simulate->add_flag("--trajectory", trajectory, "one long path instead of independent chains");
  add_common(simulate);

  auto* tails = app.add_subcommand("tails", "Hill, Goldie and plateau estimates; spectral and anticlustering checks");
  tails->add_option("--model", model_arg)->required();
  tails->add_option("--kappa", kappa_arg, "'auto' or a value");
  tails->add_option("--count", count, "stationary sample size");
  tails->add_option("--k", k, "Hill order statistics (default count/100)");
  tails->add_option("--path-length", path_length, "trajectory length for the tail-process checks (0 = skip)");
  add_common(tails);

  auto* extremes = app.add_subcommand("extremes", "extremal index and Frechet maxima");
  extremes->add_option("--model", model_arg)->required();
  extremes->add_option("--method", method, "all | exact | direct | blocks | frechet");
  extremes->add_option("--n", n, "block length for maxima");
  extremes->add_option("--reps", reps, "replicates");
  extremes->add_option("--horizon", horizon, "walk horizon for the direct estimator (0 = pilot)");
  extremes->add_option("--path-length", path_length, "path length for the blocks estimator");
  extremes->add_option("--q", q, "threshold quantile for the blocks estimator");
  add_common(extremes);

  auto* sums = app.add_subcommand("sums", "partial-sum limit experiments");
  sums->add_option("--model", model_arg)->required();
  sums->add_option("--n", n);
  sums->add_option("--reps", reps);
  sums->add_option("--C", C_arg, "tail constant (default: Goldie formula estimate)");
  sums->add_option("--batch", batch_size, "stationary batch for centering and C");
  add_common(sums);

  auto* rwre = app.add_subcommand("rwre", "random walk in random environment");
  rwre->add_option("--sites", sites_arg, "site file or preset (RW-K2, RW-K1, RW-KHALF)")->required();
  rwre->add_option("--mode", mode, "equivalence | limits | maxedge");
  rwre->add_option("--n", n);
  rwre->add_option("--reps", reps);
  rwre->add_option("--engine", engine, "stepwise | crossings")->check(CLI::IsMember({"stepwise", "crossings"}));
  rwre->add_option("--position-time", t_position, "t for the W_t check (limits, kappa < 1)");
  rwre->add_option("--position-reps", position_reps);
  rwre->add_option("--C", C_arg, "tail constant of the ratio model (maxedge; default: Goldie formula estimate)");
  add_common(rwre);

  auto* report = app.add_subcommand("report", "pass/fail table for a preset, the acceptance suite, or a comparison");
  report->add_option("--preset", preset, "environment preset");
  report->add_option("--budget", budget, "quick | full");
  report->add_flag("--acceptance", acceptance, "run the full acceptance suite");
  report->add_option("--only", only, "acceptance criteria to run");
  report->add_option("--compare", compare, "two report files to compare")->expected(2);
  add_common(report);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }
  if (const char* env = std::getenv("BPIRE_SEED")) {
    try {
      c.seed = std::stoull(env);
    } catch (const std::exception&) {
      std::cerr << "error: BPIRE_SEED is not an unsigned integer\n";
      return kExitUsage;
    }
  }

  try {
    if (*kappa) return cmd_kappa(c, model_arg, tol);
    if (*simulate) return cmd_simulate(c, model_arg, count, burnin, trajectory);
    if (*tails) return cmd_tails(c, model_arg, kappa_arg, count, k, path_length);
    if (*extremes) {
      if (path_length == 0) path_length = 10'000'000;
      return cmd_extremes(c, model_arg, method, n, reps, horizon, path_length, q);
    }
    if (*sums) return cmd_sums(c, model_arg, n, reps, C_arg, batch_size);
    if (*rwre) return cmd_rwre(c, sites_arg, mode, n, reps, engine == "crossings", t_position, position_reps, C_arg);
    if (*report) {
      if (!compare.empty()) return cmd_compare(compare[0], compare[1]);
      return cmd_report(c, preset, budget, acceptance, only);
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const RegimeMismatch& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}
