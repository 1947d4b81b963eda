#pragma once

#include <stdexcept>
#include <string>

namespace shel {

/// Contract violation: invalid configuration, failed hypothesis check,
/// non-convergent quadrature or iteration, NaN in an evolving state.
/// Everything this library throws deliberately derives from here.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what_arg) : std::runtime_error(what_arg) {}
};

/// Malformed or inconsistent run configuration (unknown keys, bad values).
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what_arg) : Error(what_arg) {}
};

/// A check of the standing assumptions failed (incompatible initial and
/// boundary data, coefficients outside what an experiment requires, ...).
class HypothesisError : public Error {
 public:
  explicit HypothesisError(const std::string& what_arg) : Error(what_arg) {}
};

[[noreturn]] inline void fail(const std::string& msg) { throw Error(msg); }

inline void require(bool ok, const std::string& msg) {
  if (!ok) fail(msg);
}

}  // namespace shel
