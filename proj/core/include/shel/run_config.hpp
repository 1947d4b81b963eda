#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>

#include "shel/solver.hpp"

namespace shel {

/// A fully resolved run description: the solve configuration plus the
/// ensemble size and the effective settings in serialised form, ready to
/// be embedded into run records.
struct RunConfig {
  SolveConfig solve;
  std::size_t paths = 1;
  std::string name = "run";

  /// Every effective setting (defaults applied) as `key -> value` text.
  std::map<std::string, std::string> resolved;

  /// The resolved settings joined as sorted `key = value` lines; two runs
  /// with equal canonical text behave identically under equal seeds.
  std::string canonical;

  /// FNV-1a hash of `canonical`.
  std::uint64_t config_hash = 0;
};

/// Parses `key = value` text. Values of the form `{ k = v, ... }` flatten
/// to dotted keys (`kappa = { ell = 0.2 }` becomes `kappa.ell`); `#` starts
/// a comment. Unknown keys, malformed values, unresolvable names and
/// invalid settings (dt <= 0, grid < 16, paths < 1, ...) raise ConfigError.
RunConfig parse_run_config(const std::string& text);

/// Reads and parses a config file; missing files raise ConfigError.
RunConfig load_run_config(const std::string& path);

/// Re-derives the serialised form after programmatic changes (seed or path
/// overrides), refreshing `resolved`, `canonical` and `config_hash`.
void refresh_canonical(RunConfig& rc);

std::uint64_t fnv1a64(std::string_view s);

}  // namespace shel
