#pragma once

#include <stdexcept>
#include <string>

namespace prodtest {

// A precondition of an operation was violated by its caller (bad shapes,
// invalid parameters, malformed distributions).
class ContractViolation : public std::invalid_argument {
 public:
  explicit ContractViolation(const std::string& what) : std::invalid_argument(what) {}
};

// An exhaustive computation over the sample space was refused because the
// space is larger than the configured cap.
class EnumerationCapExceeded : public std::runtime_error {
 public:
  explicit EnumerationCapExceeded(const std::string& what) : std::runtime_error(what) {}
};

// A generator could not construct an instance with the requested parameters.
class InfeasibleInstance : public std::runtime_error {
 public:
  explicit InfeasibleInstance(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace prodtest
