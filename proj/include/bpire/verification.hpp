#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace bpire {

enum class Budget { kQuick, kFull };

struct VerifyOptions {
  std::uint64_t seed = 20240917;
  unsigned workers = 0;
  Budget budget = Budget::kFull;
};

struct CheckRow {
  std::string label;
  std::string measured;
  std::string target;
  bool pass = false;
};

struct CheckResult {
  int id = 0;
  std::string title;
  std::vector<CheckRow> rows;
  bool pass = false;
  double seconds = 0;
  /// Hash of every number the check computed; equal across worker counts.
  std::uint64_t digest = 0;
};

inline constexpr int kCriteriaCount = 15;

/// Runs the selected criteria (all when `ids` is empty) in ascending order.
/// `on_result` is called as each finishes. Criterion 15 re-runs every other
/// selected criterion with a different worker count and compares digests.
std::vector<CheckResult> run_acceptance(const VerifyOptions& options, std::vector<int> ids = {},
                                        const std::function<void(const CheckResult&)>& on_result = {});

/// Per-preset table (kappa, tilt, tail constant, Hill, theta, sums) for the
/// named ENV preset.
CheckResult run_preset_report(const std::string& preset, const VerifyOptions& options);

/// "PASS [ 4] title :: label measured (target)" lines.
std::string format_result(const CheckResult& result);

}  // namespace bpire
