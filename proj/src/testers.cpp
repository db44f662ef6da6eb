#include "prodtest/testers.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "prodtest/errors.hpp"
#include "prodtest/learning.hpp"
#include "prodtest/reductions.hpp"
#include "prodtest/rng.hpp"
#include "prodtest/statistics.hpp"

namespace prodtest {

std::string_view to_string(Decision d) {
  switch (d) {
    case Decision::yes:
      return "yes";
    case Decision::no:
      return "no";
    case Decision::inconclusive:
      return "inconclusive";
  }
  return "inconclusive";
}

void TesterConfig::validate() const {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw ContractViolation("epsilon must lie in (0,1)");
  if (sample_constant && !(*sample_constant > 0.0 && std::isfinite(*sample_constant))) {
    throw ContractViolation("sample_constant must be positive");
  }
  if (max_retries < 0) throw ContractViolation("max_retries must be non-negative");
  if (!(tv_heavy_divisor > 0.0)) throw ContractViolation("tv_heavy_divisor must be positive");
  if (enumeration_cap == 0) throw ContractViolation("enumeration_cap must be positive");
}

namespace {

void check_eps(double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw ContractViolation("epsilon must lie in (0,1)");
}

void check_shape(std::size_t n, std::size_t l) {
  if (n == 0) throw ContractViolation("dimension must be positive");
  if (l < 2) throw ContractViolation("alphabet size must be at least 2");
}

std::uint64_t ceil_count(double value) {
  if (!std::isfinite(value) || value > 1e15) throw ContractViolation("sample count overflow");
  return std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::ceil(value - 1e-9)));
}

double nl(std::size_t n, std::size_t l) { return static_cast<double>(n) * static_cast<double>(l); }

void require_pair(const SampleSource& p, const SampleSource& q) {
  if (p.dimension() != q.dimension() || p.alphabet_size() != q.alphabet_size()) {
    throw ContractViolation("sample sources live on different spaces");
  }
  check_shape(p.dimension(), p.alphabet_size());
}

// Seed streams used inside one tester invocation.
enum Stream : std::uint64_t {
  kSmoothP = 1,
  kSmoothQ = 2,
  kPoissonP = 3,
  kPoissonQ = 4,
  kEstimate = 5,
  kRetryBase = 100,
};

void draw_counts(SampleSource& source, std::uint64_t m, CountTable& counts) {
  Sample x(source.dimension());
  for (std::uint64_t k = 0; k < m; ++k) {
    source.draw_into(x);
    counts.add(x);
  }
}

std::vector<Sample> draw_samples(SampleSource& source, std::uint64_t m) {
  std::vector<Sample> out;
  out.reserve(m);
  for (std::uint64_t k = 0; k < m; ++k) out.push_back(source.next());
  return out;
}

TestVerdict threshold_verdict(double statistic, double threshold) {
  TestVerdict v;
  v.statistic = statistic;
  v.threshold = threshold;
  v.decision = statistic <= threshold ? Decision::yes : Decision::no;
  return v;
}

struct HeavyLightParams {
  double delta;
  std::uint64_t m;
  double heavy_threshold;
  double light_threshold;
};

// Shared body of the two Poissonized closeness testers.
TestVerdict heavy_light_test(SampleSource& p, SampleSource& q, const HeavyLightParams& params,
                             std::uint64_t seed) {
  const std::size_t n = p.dimension();
  const std::size_t l = p.alphabet_size();
  const std::uint64_t start_p = p.drawn();
  const std::uint64_t start_q = q.drawn();
  SampleSource sp = smoothed_source(p, params.delta, derive_seed(seed, kSmoothP));
  SampleSource sq = smoothed_source(q, params.delta, derive_seed(seed, kSmoothQ));
  auto used = [&] { return (p.drawn() - start_p) + (q.drawn() - start_q); };

  PartitionLabels labels(n, l);
  Sample x(n);
  for (SampleSource* s : {&sp, &sq}) {
    for (std::uint64_t k = 0; k < params.m; ++k) {
      s->draw_into(x);
      labels.mark(x);
    }
  }

  Rng rng_p(derive_seed(seed, kPoissonP));
  Rng rng_q(derive_seed(seed, kPoissonQ));
  PoissonizeResult rp = poissonize(sp, params.m, rng_p);
  PoissonizeResult rq = poissonize(sq, params.m, rng_q);
  const auto* cp = std::get_if<PoissonCounts>(&rp);
  const auto* cq = std::get_if<PoissonCounts>(&rq);
  if (cp == nullptr || cq == nullptr) {
    std::uint64_t max_budget = 0;
    for (const auto* r : {&rp, &rq}) {
      if (const auto* b = std::get_if<BudgetExceeded>(r)) max_budget = std::max(max_budget, b->max_budget);
      if (const auto* c = std::get_if<PoissonCounts>(r)) {
        for (auto m : c->budgets) max_budget = std::max(max_budget, m);
      }
    }
    TestVerdict v;
    v.decision = Decision::no;
    v.statistic = static_cast<double>(max_budget);
    v.threshold = static_cast<double>(2 * params.m - 1);
    v.samples_used = used();
    v.detail = fmt::format("stage=budget m={} max_budget={}", params.m, max_budget);
    return v;
  }

  const double heavy = w_heavy(cp->counts, cq->counts, labels);
  const double light = w_light(cp->counts, cq->counts, labels);
  TestVerdict v;
  if (heavy > params.heavy_threshold) {
    v = threshold_verdict(heavy, params.heavy_threshold);
    v.detail = "stage=heavy ";
  } else if (light > params.light_threshold) {
    v = threshold_verdict(light, params.light_threshold);
    v.detail = "stage=light ";
  } else {
    // Both parts pass; report the light part, which is the final check.
    v = threshold_verdict(light, params.light_threshold);
    v.detail = "stage=accept ";
  }
  v.samples_used = used();
  v.detail += fmt::format("m={} heavy_cells={} w_heavy={:.6g} heavy_threshold={:.6g} w_light={:.6g} "
                          "light_threshold={:.6g}",
                          params.m, labels.heavy_count(), heavy, params.heavy_threshold, light,
                          params.light_threshold);
  return v;
}

}  // namespace

double identity_threshold(std::uint64_t m, double epsilon) {
  return 0.15 * static_cast<double>(m) * epsilon * epsilon;
}

std::uint64_t identity_samples(std::size_t n, std::size_t l, double epsilon, double c) {
  check_eps(epsilon);
  check_shape(n, l);
  if (!(c > 0.0)) throw ContractViolation("sample constant must be positive");
  return ceil_count(c * std::sqrt(nl(n, l)) / (epsilon * epsilon));
}

double exact_hellinger_heavy_threshold(std::uint64_t m, double epsilon) {
  return static_cast<double>(m) * epsilon * epsilon / 120.0;
}

double exact_hellinger_light_threshold(std::uint64_t m, double epsilon, std::size_t n,
                                       std::size_t l) {
  const double md = static_cast<double>(m);
  const double e2 = epsilon * epsilon;
  return md * md * e2 * e2 / (1000.0 * nl(n, l));
}

std::uint64_t exact_hellinger_samples(std::size_t n, std::size_t l, double epsilon, double c) {
  check_eps(epsilon);
  check_shape(n, l);
  if (!(c > 0.0)) throw ContractViolation("sample constant must be positive");
  return ceil_count(c * std::pow(nl(n, l), 0.75) / (epsilon * epsilon));
}

double exact_tv_heavy_threshold(std::uint64_t m, double epsilon, double divisor) {
  if (!(divisor > 0.0)) throw ContractViolation("heavy divisor must be positive");
  return static_cast<double>(m) * epsilon * epsilon / divisor;
}

double exact_tv_light_threshold(std::uint64_t m, double epsilon, std::size_t n, std::size_t l) {
  const double md = static_cast<double>(m);
  return md * md * epsilon * epsilon / (40.0 * nl(n, l));
}

std::uint64_t exact_tv_samples(std::size_t n, std::size_t l, double epsilon, double c) {
  check_eps(epsilon);
  check_shape(n, l);
  if (!(c > 0.0)) throw ContractViolation("sample constant must be positive");
  const double k = nl(n, l);
  return ceil_count(c * std::max(std::sqrt(k) / (epsilon * epsilon), std::pow(k, 0.75) / epsilon));
}

double hellinger_tolerant_threshold(double epsilon) { return 2.0 * epsilon / 3.0; }

double tv_tolerant_threshold(double epsilon) { return 2.0 * epsilon / 3.0; }

double bayesnet_threshold(double epsilon) { return 41.0 * epsilon * epsilon / 72.0; }

std::uint64_t bayesnet_estimate_draws(double epsilon) {
  check_eps(epsilon);
  const double accuracy = epsilon * epsilon / 9.0;
  return ceil_count(3.0 / (accuracy * accuracy));
}

TestVerdict identity_chisq_vs_hellinger(SampleSource& p, const ProductDist& q,
                                        const TesterConfig& cfg) {
  cfg.validate();
  const std::size_t n = q.dimension();
  const std::size_t l = q.alphabet_size();
  if (p.dimension() != n || p.alphabet_size() != l) {
    throw ContractViolation("identity tester: sample source and Q live on different spaces");
  }
  const double eps = cfg.epsilon;
  const double delta = SmoothingParams::for_hellinger(eps, n).delta();
  const ProductDist s = smooth(q, delta);
  std::vector<double> reference;
  reference.reserve(n * l);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < l; ++j) reference.push_back(s.component(i)[j]);
  }
  const std::uint64_t m = identity_samples(n, l, eps, cfg.constant_or(defaults::kIdentityConstant));
  const double threshold = identity_threshold(m, eps);

  const std::uint64_t start = p.drawn();
  SampleSource smoothed = smoothed_source(p, delta, derive_seed(cfg.seed, kSmoothP));
  for (int attempt = 0; attempt <= cfg.max_retries; ++attempt) {
    Rng rng(derive_seed(cfg.seed, kRetryBase + static_cast<std::uint64_t>(attempt)));
    PoissonizeResult result = poissonize(smoothed, m, rng);
    if (const auto* counts = std::get_if<PoissonCounts>(&result)) {
      const auto cells = counts->counts.cells();
      AdkInput input(std::vector<std::uint64_t>(cells.begin(), cells.end()), reference, m, eps);
      TestVerdict v = threshold_verdict(adk_statistic(input), threshold);
      v.samples_used = p.drawn() - start;
      v.detail = fmt::format("m={} delta={:.6g} retries={}", m, delta, attempt);
      return v;
    }
  }
  TestVerdict v;
  v.decision = Decision::inconclusive;
  v.statistic = std::numeric_limits<double>::quiet_NaN();
  v.threshold = threshold;
  v.samples_used = p.drawn() - start;
  v.detail = fmt::format("m={} delta={:.6g} budget exceeded on all {} attempts", m, delta,
                         cfg.max_retries + 1);
  return v;
}

TestVerdict closeness_hellinger_tolerant(SampleSource& p, SampleSource& q,
                                         const TesterConfig& cfg) {
  cfg.validate();
  require_pair(p, q);
  const std::size_t n = p.dimension();
  const std::size_t l = p.alphabet_size();
  const std::uint64_t m = product_learning_samples(
      n, l, cfg.epsilon, cfg.constant_or(defaults::kLearningConstant), cfg.learning_with_log);
  CountTable cp(n, l);
  CountTable cq(n, l);
  const std::uint64_t start = p.drawn() + q.drawn();
  draw_counts(p, m, cp);
  draw_counts(q, m, cq);
  const ProductDist hat_p = learn_product_from_counts(cp);
  const ProductDist hat_q = learn_product_from_counts(cq);
  const double h = std::sqrt(std::max(0.0, hellinger_sq(hat_p, hat_q)));
  TestVerdict v = threshold_verdict(std::sqrt(2.0) * h, hellinger_tolerant_threshold(cfg.epsilon));
  v.samples_used = p.drawn() + q.drawn() - start;
  v.detail = fmt::format("m={} hellinger_hat={:.6g}", m, h);
  return v;
}

TestVerdict closeness_tv_tolerant(SampleSource& p, SampleSource& q, const TesterConfig& cfg) {
  cfg.validate();
  require_pair(p, q);
  const std::size_t n = p.dimension();
  const std::size_t l = p.alphabet_size();
  const std::uint64_t m = product_learning_samples(
      n, l, cfg.epsilon, cfg.constant_or(defaults::kLearningConstant), cfg.learning_with_log);
  CountTable cp(n, l);
  CountTable cq(n, l);
  const std::uint64_t start = p.drawn() + q.drawn();
  draw_counts(p, m, cp);
  draw_counts(q, m, cq);
  const ProductDist hat_p = learn_product_from_counts(cp);
  const ProductDist hat_q = learn_product_from_counts(cq);
  const double accuracy = cfg.epsilon / 9.0;
  const double confidence = 1.0 / std::max<double>(3.0, static_cast<double>(n));
  Rng rng(derive_seed(cfg.seed, kEstimate));
  const TvEstimate est = tv_estimate_known(hat_p, hat_q, accuracy, confidence, rng);
  TestVerdict v = threshold_verdict(est.value, tv_tolerant_threshold(cfg.epsilon));
  v.samples_used = p.drawn() + q.drawn() - start;
  v.detail = fmt::format("m={} estimate_draws={} blocks={}", m, est.draws, est.blocks);
  return v;
}

TestVerdict closeness_exact_vs_hellinger(SampleSource& p, SampleSource& q,
                                         const TesterConfig& cfg) {
  cfg.validate();
  require_pair(p, q);
  const std::size_t n = p.dimension();
  const std::size_t l = p.alphabet_size();
  const double eps = cfg.epsilon;
  HeavyLightParams params{};
  params.delta = SmoothingParams::for_hellinger(eps, n).delta();
  params.m = exact_hellinger_samples(n, l, eps, cfg.constant_or(defaults::kExactHellingerConstant));
  params.heavy_threshold = exact_hellinger_heavy_threshold(params.m, eps);
  params.light_threshold = exact_hellinger_light_threshold(params.m, eps, n, l);
  return heavy_light_test(p, q, params, cfg.seed);
}

TestVerdict closeness_exact_vs_tv(SampleSource& p, SampleSource& q, const TesterConfig& cfg) {
  cfg.validate();
  require_pair(p, q);
  const std::size_t n = p.dimension();
  const std::size_t l = p.alphabet_size();
  const double eps = cfg.epsilon;
  HeavyLightParams params{};
  params.delta = SmoothingParams::for_tv(eps, n).delta();
  params.m = exact_tv_samples(n, l, eps, cfg.constant_or(defaults::kExactTvConstant));
  params.heavy_threshold = exact_tv_heavy_threshold(params.m, eps, cfg.tv_heavy_divisor);
  params.light_threshold = exact_tv_light_threshold(params.m, eps, n, l);
  return heavy_light_test(p, q, params, cfg.seed);
}

TestVerdict bayesnet_hellinger_tolerant(SampleSource& p, SampleSource& q, const Dag& dag_p,
                                        const Dag& dag_q, std::size_t d, const TesterConfig& cfg) {
  cfg.validate();
  require_pair(p, q);
  const std::size_t n = p.dimension();
  const std::size_t l = p.alphabet_size();
  for (const Dag* dag : {&dag_p, &dag_q}) {
    if (dag->size() != n) throw ContractViolation("bayes net tester: DAG size differs from dimension");
    if (dag->max_in_degree() > d) {
      throw ContractViolation(fmt::format("bayes net tester: DAG in-degree {} exceeds d = {}",
                                          dag->max_in_degree(), d));
    }
  }
  const std::uint64_t m =
      bayesnet_learning_samples(n, l, d, cfg.epsilon, cfg.constant_or(defaults::kLearningConstant));
  const std::uint64_t start = p.drawn() + q.drawn();
  const BayesNet hat_p = learn_bayesnet(draw_samples(p, m), dag_p, l);
  const BayesNet hat_q = learn_bayesnet(draw_samples(q, m), dag_q, l);
  const std::uint64_t draws = bayesnet_estimate_draws(cfg.epsilon);
  Rng rng(derive_seed(cfg.seed, kEstimate));
  const double estimate = hellinger_sq_estimate(hat_p, hat_q, draws, rng);
  TestVerdict v = threshold_verdict(estimate, bayesnet_threshold(cfg.epsilon));
  v.samples_used = p.drawn() + q.drawn() - start;
  v.detail = fmt::format("m={} estimate_draws={}", m, draws);
  return v;
}

}  // namespace prodtest
