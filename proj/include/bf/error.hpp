#pragma once

#include <stdexcept>
#include <string>

namespace bf {

/// Raised when a caller breaks an operation's precondition (mismatched
/// grids, inverse Stokes on a field with a mean, ...).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Non-finite values, root-finder failure, CFL violation.
class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An iterative solver hit its cap; carries the best residual reached.
class NonConvergence : public NumericalFailure {
 public:
  NonConvergence(const std::string& what, double best_residual)
      : NumericalFailure(what), best_residual_(best_residual) {}
  double best_residual() const noexcept { return best_residual_; }

 private:
  double best_residual_;
};

/// Bad or inconsistent configuration. `key()` names the offending key when
/// there is one.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what, std::string key = {})
      : std::runtime_error(what), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

}  // namespace bf
