#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "prodtest/distances.hpp"
#include "prodtest/distributions.hpp"
#include "prodtest/sample_source.hpp"

namespace prodtest {

enum class Decision { yes, no, inconclusive };

std::string_view to_string(Decision d);

// Default sample constants c multiplying each tester's theoretical sample
// complexity.
namespace defaults {
inline constexpr double kIdentityConstant = 16.0;
inline constexpr double kLearningConstant = 8.0;
// Both Poissonized closeness testers; see README for the calibration runs.
inline constexpr double kExactHellingerConstant = 100.0;
inline constexpr double kExactTvConstant = 300.0;
inline constexpr double kTvHeavyDivisor = 160.0;
inline constexpr int kMaxRetries = 3;
}  // namespace defaults

struct TesterConfig {
  double epsilon = 0.4;
  // Unset means the tester's own default from `defaults`.
  std::optional<double> sample_constant;
  std::uint64_t seed = 0;
  std::size_t enumeration_cap = kDefaultEnumerationCap;
  // Retries of the identity tester after a Poisson budget overrun.
  int max_retries = defaults::kMaxRetries;
  // Heavy-part threshold of the exact-vs-dTV tester is m eps^2 / divisor.
  double tv_heavy_divisor = defaults::kTvHeavyDivisor;
  // Learning budget c n (l + ln n) / eps^2 when true, c n l / eps^2 otherwise.
  bool learning_with_log = true;

  void validate() const;
  double constant_or(double fallback) const { return sample_constant.value_or(fallback); }
};

// decision == yes iff statistic <= threshold for every tester here (ties
// accept). Multi-stage testers report the stage that decided.
struct TestVerdict {
  Decision decision = Decision::inconclusive;
  double statistic = 0.0;
  double threshold = 0.0;
  std::uint64_t samples_used = 0;
  std::string detail;
};

// --- thresholds and sample sizes (pure arithmetic) ---------------------------

double identity_threshold(std::uint64_t m, double epsilon);                 // 0.15 m eps^2
std::uint64_t identity_samples(std::size_t n, std::size_t l, double epsilon, double c);
double exact_hellinger_heavy_threshold(std::uint64_t m, double epsilon);    // m eps^2 / 120
double exact_hellinger_light_threshold(std::uint64_t m, double epsilon, std::size_t n,
                                       std::size_t l);                      // m^2 eps^4 / (1000 n l)
std::uint64_t exact_hellinger_samples(std::size_t n, std::size_t l, double epsilon, double c);
double exact_tv_heavy_threshold(std::uint64_t m, double epsilon, double divisor);
double exact_tv_light_threshold(std::uint64_t m, double epsilon, std::size_t n,
                                std::size_t l);                             // m^2 eps^2 / (40 n l)
std::uint64_t exact_tv_samples(std::size_t n, std::size_t l, double epsilon, double c);
double hellinger_tolerant_threshold(double epsilon);                        // 2 eps / 3 on sqrt(2) H
double tv_tolerant_threshold(double epsilon);                               // 2 eps / 3
double bayesnet_threshold(double epsilon);                                  // 41 eps^2 / 72
std::uint64_t bayesnet_estimate_draws(double epsilon);                      // 3 / (eps^2/9)^2

// --- testers -----------------------------------------------------------------

// chi^2(P,Q) <= eps^2/9 (yes) versus sqrt(2) H(P,Q) > eps (no), for unknown P
// and known Q. Smooths both sides at delta = eps^2/(50n), Poissonizes at
// m = ceil(c sqrt(nl)/eps^2) and accepts iff T <= 0.15 m eps^2.
TestVerdict identity_chisq_vs_hellinger(SampleSource& p, const ProductDist& q,
                                        const TesterConfig& cfg);

// sqrt(2) H(P,Q) <= eps/3 (yes) versus sqrt(2) H(P,Q) > eps (no). Learns
// both empirical products and accepts iff sqrt(2) H(P^,Q^) <= 2 eps / 3.
TestVerdict closeness_hellinger_tolerant(SampleSource& p, SampleSource& q,
                                         const TesterConfig& cfg);

// dTV(P,Q) <= eps/3 (yes) versus dTV(P,Q) > eps (no). Learns both products,
// estimates dTV(P^,Q^) to additive eps/9 and accepts iff it is <= 2 eps / 3.
TestVerdict closeness_tv_tolerant(SampleSource& p, SampleSource& q, const TesterConfig& cfg);

// P = Q (yes) versus H(P,Q) >= eps (no): heavy/light Poissonized tester.
TestVerdict closeness_exact_vs_hellinger(SampleSource& p, SampleSource& q,
                                         const TesterConfig& cfg);

// P = Q (yes) versus dTV(P,Q) >= eps (no).
TestVerdict closeness_exact_vs_tv(SampleSource& p, SampleSource& q, const TesterConfig& cfg);

// H(P,Q) <= eps/2 (yes) versus H(P,Q) > eps (no) for Bayes nets on known
// DAGs of in-degree at most d.
TestVerdict bayesnet_hellinger_tolerant(SampleSource& p, SampleSource& q, const Dag& dag_p,
                                        const Dag& dag_q, std::size_t d, const TesterConfig& cfg);

}  // namespace prodtest
