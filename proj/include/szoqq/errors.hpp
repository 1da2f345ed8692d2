// szoqq — safe zeroth-order optimizer for smooth constrained problems.
#pragma once

#include <stdexcept>
#include <string>

namespace szoqq {

/// Precondition or type-invariant violation in a public API call.
class ContractViolation : public std::invalid_argument {
 public:
  explicit ContractViolation(const std::string& what) : std::invalid_argument(what) {}
};

/// An anchor point required to be strictly feasible has a nonnegative
/// constraint value; the caller is expected to adapt constants and retry.
class StrictFeasibilityLost : public std::runtime_error {
 public:
  StrictFeasibilityLost(const std::string& what, int constraint)
      : std::runtime_error(what), constraint_(constraint) {}
  int constraint() const noexcept { return constraint_; }

 private:
  int constraint_;
};

/// The oracle failed to produce a value (I/O failure, non-finite result, ...).
class OracleQueryError : public std::runtime_error {
 public:
  explicit OracleQueryError(const std::string& what) : std::runtime_error(what) {}
};

/// An iterative subproblem solver hit its iteration budget before reaching
/// the requested tolerance.
class NonConvergence : public std::runtime_error {
 public:
  NonConvergence(const std::string& what, int iterations)
      : std::runtime_error(what), iterations_(iterations) {}
  int iterations() const noexcept { return iterations_; }

 private:
  int iterations_;
};

/// The multiplier passed to the certificate subproblem as warm start does not
/// itself satisfy the certificate; signals the step subproblem was solved too
/// loosely.
class Sp2WarmStartInvalid : public std::runtime_error {
 public:
  explicit Sp2WarmStartInvalid(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed or out-of-range run configuration.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace szoqq
