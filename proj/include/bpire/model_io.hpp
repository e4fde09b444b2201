#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>

#include "bpire/env_model.hpp"
#include "bpire/rwre.hpp"

namespace bpire {

// Model files are line-oriented "key = value" text:
//
//   atoms[0].offspring   = {geometric, 0.6666666666666666}
//   atoms[0].immigration = {deterministic, 1}
//   atoms[0].prob        = 0.8
//   atoms[1].offspring   = {finite, [0.5, 0.25, 0.25]}
//
// Site files for the walk use sites[i].xi, sites[i].prob and reflect.
// A JSON document with the same structure is also accepted, and a preset
// name ("ENV-A", "RW-K2", ...) may be given instead of a path.

std::string to_config_text(const EnvironmentModel& model);
std::string to_config_text(const RwreModel& model);

/// Throws ParseError on malformed input, ValidationError listing every
/// violated invariant otherwise.
EnvironmentModel parse_model_text(std::string_view text);
RwreModel parse_sites_text(std::string_view text);

/// Path, preset name, or "-" for stdin.
EnvironmentModel parse_model(const std::string& path_or_preset);
RwreModel parse_sites(const std::string& path_or_preset);

/// 64-bit FNV-1a over the canonical text.
std::string model_fingerprint(const EnvironmentModel& model);
std::string model_fingerprint(const RwreModel& model);
std::uint64_t fnv1a64(std::string_view bytes);

struct RunManifest {
  std::string tool_version;
  std::uint64_t master_seed = 0;
  std::string model_fingerprint;
  std::string subcommand;
  std::map<std::string, std::string> flags;
  double wall_time_seconds = 0;
  unsigned workers = 0;

  /// Hash over everything except wall time and workers.
  std::string hash() const;
};

inline constexpr std::string_view kToolVersion = "0.3.1";

}  // namespace bpire
