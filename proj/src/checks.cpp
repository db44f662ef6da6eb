#include "prodtest/checks.hpp"

#include <fmt/format.h>

#include <cmath>

#include "prodtest/distances.hpp"
#include "prodtest/errors.hpp"
#include "prodtest/instances.hpp"
#include "prodtest/reductions.hpp"
#include "prodtest/statistics.hpp"

namespace prodtest {

namespace {

constexpr double kTol = 1e-12;

bool close_rel(double a, double b, double tol = kTol) {
  if (std::isinf(a) || std::isinf(b)) return a == b;
  return std::abs(a - b) <= tol * std::max(1.0, std::abs(b));
}

ProductDist random_product(std::size_t n, std::size_t l, Rng& rng, double floor = 0.0) {
  std::vector<Categorical> comps;
  for (std::size_t i = 0; i < n; ++i) {
    auto probs = dirichlet(l, 1.0, rng);
    for (auto& v : probs) v = (1.0 - floor * static_cast<double>(l)) * v + floor;
    comps.emplace_back(std::move(probs));
  }
  return ProductDist(std::move(comps));
}

// Random shape with l^n <= 4096.
std::pair<std::size_t, std::size_t> random_shape(Rng& rng) {
  for (;;) {
    const std::size_t l = 2 + rng.below(3);
    const std::size_t n = 1 + rng.below(6);
    if (std::pow(static_cast<double>(l), static_cast<double>(n)) <= 4096.0) return {n, l};
  }
}

struct Enumerated {
  double h2 = 0.0;
  double chisq = 0.0;
  double kl = 0.0;
  double tv = 0.0;
};

Enumerated enumerate(const ProductDist& p, const ProductDist& q) {
  double bc = 0.0;
  double chi = 0.0;
  double kl_sum = 0.0;
  double l1 = 0.0;
  for_each_point(p.dimension(), p.alphabet_size(), kDefaultEnumerationCap,
                 [&](std::span<const Symbol> x) {
                   const double a = p.pmf(x);
                   const double b = q.pmf(x);
                   bc += std::sqrt(a * b);
                   chi += a * a / b;
                   if (a > 0.0) kl_sum += a * std::log(a / b);
                   l1 += std::abs(a - b);
                 });
  return {1.0 - bc, chi - 1.0, kl_sum, 0.5 * l1};
}

void fail(CheckResult& r, std::string msg) {
  if (r.failures++ == 0) r.detail = std::move(msg);
}

CheckResult check_factorization(std::uint64_t seed, std::size_t cases) {
  CheckResult r{"factorization", 0, 0, {}};
  Rng rng(seed);
  for (std::size_t k = 0; k < cases; ++k) {
    const auto [n, l] = random_shape(rng);
    const ProductDist p = random_product(n, l, rng, 1e-3);
    const ProductDist q = random_product(n, l, rng, 1e-3);
    const Enumerated e = enumerate(p, q);
    ++r.cases;
    // The enumerated sums carry absolute rounding error ~ l^n * 1e-16.
    const double tol = 1e-12;
    if (std::abs(hellinger_sq(p, q) - e.h2) > tol || !close_rel(chisq(p, q), e.chisq, tol) ||
        std::abs(kl(p, q) - e.kl) > tol) {
      fail(r, fmt::format("case {} (n={}, l={}): H2 {} vs {}, chi2 {} vs {}, KL {} vs {}", k, n, l,
                          hellinger_sq(p, q), e.h2, chisq(p, q), e.chisq, kl(p, q), e.kl));
    }
  }
  return r;
}

CheckResult check_chain(std::uint64_t seed, std::size_t cases) {
  CheckResult r{"chain", 0, 0, {}};
  Rng rng(seed);
  for (std::size_t k = 0; k < cases; ++k) {
    const auto [n, l] = random_shape(rng);
    const ProductDist p = random_product(n, l, rng, 1e-3);
    const ProductDist q = random_product(n, l, rng, 1e-3);
    const Enumerated e = enumerate(p, q);
    ++r.cases;
    const double h = std::sqrt(std::max(0.0, e.h2));
    const double chain[] = {e.h2, e.tv, std::sqrt(2.0) * h, std::sqrt(std::max(0.0, e.kl)),
                            std::sqrt(std::max(0.0, e.chisq))};
    for (std::size_t j = 0; j + 1 < std::size(chain); ++j) {
      if (chain[j] > chain[j + 1] + kTol) {
        fail(r, fmt::format("case {}: link {} broken, {} > {}", k, j, chain[j], chain[j + 1]));
        break;
      }
    }
  }
  return r;
}

CheckResult check_smoothing(std::uint64_t seed, std::size_t cases) {
  CheckResult r{"smoothing", 0, 0, {}};
  Rng rng(seed);
  for (std::size_t k = 0; k < cases; ++k) {
    const std::size_t n = 1 + rng.below(50);
    const std::size_t l = 2 + rng.below(8);
    const double delta = 0.5 * rng.uniform() + 1e-6;
    const ProductDist p = random_product(n, l, rng);
    const double h2 = hellinger_sq(p, smooth(p, delta));
    ++r.cases;
    if (h2 > 2.0 * static_cast<double>(n) * delta + kTol) {
      fail(r, fmt::format("case {}: H2 = {} > 2 n delta = {}", k, h2, 2.0 * static_cast<double>(n) * delta));
    }
  }
  return r;
}

CheckResult check_fdelta(std::uint64_t seed, std::size_t cases) {
  CheckResult r{"fdelta", 0, 0, {}};
  Rng rng(seed);
  const double delta = 1.0 / 3.0;
  for (std::size_t k = 0; k < cases; ++k) {
    const std::size_t items = 2 + rng.below(9);
    const Categorical bp(dirichlet(items, 1.0, rng));
    const Categorical bq(dirichlet(items, 1.0, rng));
    const auto [fp, fq] = gen_f_delta_pair(bp, bq, delta);
    const FDeltaCertificate bounds = f_delta_bounds(bp, bq, delta);
    const Enumerated e = enumerate(fp, fq);
    ++r.cases;
    if (e.tv < bounds.tv_lower_bound - kTol || e.chisq > bounds.chisq_upper_bound + kTol ||
        e.kl > bounds.kl_upper_bound + kTol) {
      fail(r, fmt::format("case {} ({} items): tv {} >= {}, chi2 {} <= {}, KL {} <= {}", k, items,
                          e.tv, bounds.tv_lower_bound, e.chisq, bounds.chisq_upper_bound, e.kl,
                          bounds.kl_upper_bound));
    }
  }
  return r;
}

CheckResult check_paninski(std::uint64_t seed, std::size_t cases) {
  CheckResult r{"paninski", 0, 0, {}};
  Rng rng(seed);
  for (std::size_t k = 0; k < cases; ++k) {
    const std::size_t n = 1 + rng.below(8);
    const std::size_t l = n <= 4 ? 2 * (1 + rng.below(2)) : 2;
    const double eps = 0.1 + 0.8 * rng.uniform();
    if (eps / std::sqrt(static_cast<double>(n)) >= 1.0) continue;
    const auto [p, q] = gen_paninski_mixture(n, l, eps, rng);
    const double d = tv_exhaustive(p, q);
    ++r.cases;
    if (d < eps / 4.0) fail(r, fmt::format("case {} (n={}, l={}, eps={}): dTV {} < eps/4", k, n, l, eps, d));
  }
  return r;
}

CheckResult check_estimator(std::uint64_t seed, std::size_t cases) {
  CheckResult r{"estimator", 0, 0, {}};
  Rng rng(seed);
  const std::uint64_t draws = 10'000;
  const double band = 4.0 / std::sqrt(static_cast<double>(draws));
  std::size_t misses = 0;
  std::string first;
  for (std::size_t k = 0; k < cases; ++k) {
    const std::size_t n = 1 + rng.below(6);
    const std::size_t l = 2 + rng.below(2);
    const ProductDist p = random_product(n, l, rng, 1e-2);
    const ProductDist q = random_product(n, l, rng, 1e-2);
    const double exact = hellinger_sq(p, q);
    const double est = hellinger_sq_estimate(p, q, draws, rng);
    ++r.cases;
    if (std::abs(est - exact) > band) {
      if (misses++ == 0) first = fmt::format("case {}: H2 estimate {} vs exact {}", k, est, exact);
    }
  }
  // A miss is a random event; the suite allows 3 in 50.
  if (misses * 50 > 3 * r.cases) {
    r.failures = misses;
    r.detail = fmt::format("{} of {} estimates outside 4/sqrt(R); {}", misses, r.cases, first);
  }
  return r;
}

}  // namespace

std::vector<std::string_view> check_suite_names() {
  return {"factorization", "chain", "smoothing", "fdelta", "paninski", "estimator"};
}

CheckResult run_check(std::string_view name, std::uint64_t seed, std::size_t cases) {
  if (name == "factorization") return check_factorization(seed, cases);
  if (name == "chain") return check_chain(seed, cases);
  if (name == "smoothing") return check_smoothing(seed, cases);
  if (name == "fdelta") return check_fdelta(seed, cases);
  if (name == "paninski") return check_paninski(seed, cases);
  if (name == "estimator") return check_estimator(seed, cases);
  throw ContractViolation(fmt::format("unknown check suite \"{}\"", name));
}

}  // namespace prodtest
