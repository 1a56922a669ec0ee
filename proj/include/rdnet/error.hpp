#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace rdnet {

/// Invalid model input. Carries every violated invariant, not just the first.
class DomainError : public std::invalid_argument {
 public:
  explicit DomainError(std::vector<std::string> violations);

  const std::vector<std::string>& violations() const noexcept { return violations_; }

 private:
  std::vector<std::string> violations_;
};

enum class SolverFailure {
  SingularSystem,
  NonPositiveEffort,
  NoConvergence,
  ProfitCrossCheckFailed,
};

const char* to_string(SolverFailure kind) noexcept;

class SolverError : public std::runtime_error {
 public:
  SolverError(SolverFailure kind, const std::string& detail);

  SolverFailure kind() const noexcept { return kind_; }

 private:
  SolverFailure kind_;
};

/// Exhaustive enumeration refused because the edge space is too large.
class TooLarge : public std::length_error {
 public:
  using std::length_error::length_error;
};

/// Pair does not occupy a symmetric position in the network.
class NotSymmetric : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Root bracket has no sign change.
class BracketFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace rdnet
