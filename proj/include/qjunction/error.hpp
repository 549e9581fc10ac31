#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace qjunction {

/// Malformed or inconsistent problem description. `key()` names the offending
/// key or wire so callers can point the user at it.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, const std::string& what)
      : std::runtime_error(what), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

/// Any failure of the numerics: poles hit, singular systems, missing roots.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// λ coincides with a pole of the truncated spectral series.
class PoleError : public NumericalError {
 public:
  PoleError(double pole, const std::string& what) : NumericalError(what), pole_(pole) {}
  double pole() const noexcept { return pole_; }

 private:
  double pole_;
};

/// A linear system that should be solved is (numerically) singular.
/// Carries the approximate null vector when one was computed.
class SingularSystemError : public NumericalError {
 public:
  SingularSystemError(const std::string& what, std::vector<double> null_vector = {},
                      double rcond = 0.0)
      : NumericalError(what), null_vector_(std::move(null_vector)), rcond_(rcond) {}
  const std::vector<double>& null_vector() const noexcept { return null_vector_; }
  double rcond() const noexcept { return rcond_; }

 private:
  std::vector<double> null_vector_;
  double rcond_;
};

}  // namespace qjunction
