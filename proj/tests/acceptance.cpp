// Acceptance driver: one PASS/FAIL line per criterion, details indented below.
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bpire/verification.hpp"

int main(int argc, char** argv) {
  CLI::App app{"bpire acceptance suite"};
  bpire::VerifyOptions opt;
  bool quick = false;
  std::vector<int> only;
  app.add_option("--seed", opt.seed, "master seed");
  app.add_option("--workers", opt.workers, "worker threads (0 = all cores)");
  app.add_flag("--quick", quick, "reduced sample sizes (smoke run, tolerances still apply)");
  app.add_option("--only", only, "criterion ids to run")->check(CLI::Range(1, bpire::kCriteriaCount));
  CLI11_PARSE(app, argc, argv);
  if (const char* env = std::getenv("BPIRE_SEED")) opt.seed = std::stoull(env);
  opt.budget = quick ? bpire::Budget::kQuick : bpire::Budget::kFull;

  int failed = 0;
  const auto results = bpire::run_acceptance(opt, only, [&](const bpire::CheckResult& r) {
    std::fputs(bpire::format_result(r).c_str(), stdout);
    std::fflush(stdout);
    failed += !r.pass;
  });
  std::printf("%zu criteria, %d failed\n", results.size(), failed);
  return failed == 0 ? 0 : 1;
}
