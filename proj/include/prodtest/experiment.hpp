#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "prodtest/instances.hpp"
#include "prodtest/serialization.hpp"
#include "prodtest/testers.hpp"

namespace prodtest {

enum class TesterId {
  identity,            // identity_chisq_vs_hellinger
  hellinger_tolerant,  // closeness_hellinger_tolerant
  tv_tolerant,         // closeness_tv_tolerant
  exact_hellinger,     // closeness_exact_vs_hellinger
  exact_tv,            // closeness_exact_vs_tv
  bayesnet,            // bayesnet_hellinger_tolerant
};

std::string_view to_string(TesterId id);
// Accepts the short ids above and the full tester function names.
std::optional<TesterId> parse_tester(std::string_view name);
// Default sample constant of a tester.
double default_constant(TesterId id);

// Throws ContractViolation when `id` cannot run on `instance` (the
// product testers need product members).
void require_compatible(TesterId id, const Instance& instance);

// One tester invocation on fresh sample sources for the members of
// `instance`, seeded from cfg.seed. Q is passed as a known distribution to
// the identity tester. The Bayes net tester uses the members' own DAGs (the
// empty DAG for products) and d = max in-degree.
TestVerdict run_tester(TesterId id, const Instance& instance, const TesterConfig& cfg);

struct TrialRecord {
  std::uint64_t seed = 0;
  Decision decision = Decision::inconclusive;
  double statistic = 0.0;
  double threshold = 0.0;
  std::uint64_t samples_used = 0;
  double wall_ms = 0.0;
};

struct InstanceSpec {
  Family family = Family::identical;
  InstanceParams params;
};

struct ExperimentPlan {
  std::vector<TesterId> testers;
  std::vector<InstanceSpec> instances;
  std::size_t trials = 1;
  // Empty means each tester's default constant.
  std::vector<double> constants;
  std::uint64_t master_seed = 0;
  // Tester epsilon; the instance epsilon when unset.
  std::optional<double> epsilon;
  bool learning_with_log = true;
  double tv_heavy_divisor = defaults::kTvHeavyDivisor;
  // Record wall time per trial. Off by default so that output is
  // byte-reproducible.
  bool timing = false;

  void validate() const;
};

// Plan document:
//   {"testers":["identity",...], "instances":[{"family":"identical","params":{...}}],
//    "trials":200, "constants":[16,32], "master_seed":1, "eps":0.4,
//    "learning_budget":"with_log"|"plain", "tv_heavy_divisor":160, "timing":false}
// A single "family" + "params" pair may stand in for "instances".
ExperimentPlan plan_from_json(const Json& doc);
Json to_json(const ExperimentPlan& plan);

struct WilsonInterval {
  double lo = 0.0;
  double hi = 1.0;
};

// 95% Wilson score interval for `successes` out of `trials`.
WilsonInterval wilson_interval(std::size_t successes, std::size_t trials, double z = 1.959963984540054);

struct ResultRow {
  TesterId tester = TesterId::identity;
  InstanceSpec instance;
  double epsilon = 0.0;
  double constant = 0.0;
  std::size_t trials = 0;
  std::size_t yes = 0;
  std::size_t no = 0;
  std::size_t inconclusive = 0;
  WilsonInterval yes_interval;
  double mean_samples = 0.0;
  std::optional<double> mean_ms;
  std::vector<TrialRecord> records;  // sorted by seed

  double yes_rate() const { return trials == 0 ? 0.0 : static_cast<double>(yes) / static_cast<double>(trials); }
};

// Number of worker threads: PRODTEST_THREADS when set (>= 1), otherwise the
// hardware concurrency.
std::size_t worker_count();

// Trial k of every configuration uses seed derive_seed(master_seed, k), so
// configurations share seeds and rows are comparable. Instances are generated
// once per spec. Output order: instances, then testers, then constants.
std::vector<ResultRow> run_plan(const ExperimentPlan& plan, std::size_t threads = worker_count());

inline constexpr std::string_view kCsvHeader =
    "tester,family,n,l,eps,constant,trials,yes_rate,wilson_lo,wilson_hi,mean_samples,mean_ms";

std::string to_csv(const std::vector<ResultRow>& rows);
Json to_json(const std::vector<ResultRow>& rows, bool with_records);

}  // namespace prodtest
