#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace prodtest {

// Outcome of one executable property suite.
struct CheckResult {
  std::string name;
  std::size_t cases = 0;
  std::size_t failures = 0;
  std::string detail;  // first failure, if any

  bool passed() const { return failures == 0; }
};

// Names of the built-in suites, in run order:
//   factorization  product H^2, chi^2, KL against enumeration
//   chain          H^2 <= dTV <= sqrt(2) H <= sqrt(KL) <= sqrt(chi^2)
//   smoothing      H^2(P, P^delta) <= 2 n delta
//   fdelta         the three F_delta certificate inequalities
//   paninski       enumerated dTV of the mixture pair >= eps/4 (n <= 8)
//   estimator      Hellinger^2 and dTV estimators against exact values
std::vector<std::string_view> check_suite_names();

// Runs one suite with `cases` random instances drawn from `seed`. Throws
// ContractViolation on an unknown name.
CheckResult run_check(std::string_view name, std::uint64_t seed, std::size_t cases);

}  // namespace prodtest
