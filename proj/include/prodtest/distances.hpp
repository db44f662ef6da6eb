#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "prodtest/distributions.hpp"
#include "prodtest/errors.hpp"

namespace prodtest {

// chi-squared and KL are +infinity when Q has a zero where P does not. That
// value is returned (never a finite stand-in) so callers can filter with
// is_divergent() instead of catching.
inline constexpr double kDivergent = std::numeric_limits<double>::infinity();
inline bool is_divergent(double d) { return d == kDivergent; }

// Single-component distances.
//   H^2(P,Q)  = 1 - sum_j sqrt(p_j q_j)
//   chi^2     = sum_j p_j^2 / q_j - 1
//   KL        = sum_j p_j ln(p_j / q_j), with 0 ln(0/q) = 0
//   TV        = 1/2 sum_j |p_j - q_j|
double hellinger_sq(const Categorical& p, const Categorical& q);
double chisq(const Categorical& p, const Categorical& q);
double kl(const Categorical& p, const Categorical& q);
double tv(const Categorical& p, const Categorical& q);

// sum_j (p_j - q_j)^2 / (p_j + q_j), terms with p_j + q_j = 0 dropped.
// Always at least 2 H^2(P,Q).
double triangular_discrimination(const Categorical& p, const Categorical& q);

// Product distances through their factorizations:
//   1 - H^2(P,Q)   = prod_i (1 - H^2(P_i,Q_i))
//   1 + chi^2(P,Q) = prod_i (1 + chi^2(P_i,Q_i))
//   KL(P,Q)        = sum_i KL(P_i,Q_i)
double hellinger_sq(const ProductDist& p, const ProductDist& q);
double chisq(const ProductDist& p, const ProductDist& q);
double kl(const ProductDist& p, const ProductDist& q);

// Cell-wise sums over (i,j) used by the non-tolerant closeness analysis.
double sum_componentwise_hellinger_sq(const ProductDist& p, const ProductDist& q);
double sum_componentwise_chisq(const ProductDist& p, const ProductDist& q);

inline constexpr std::size_t kDefaultEnumerationCap = 1'000'000;

// Number of points in Sigma^n, or EnumerationCapExceeded when above `cap`.
std::size_t sample_space_size(std::size_t n, std::size_t l, std::size_t cap);

// Visits every x in Sigma^n in lexicographic order (last coordinate fastest).
template <class Fn>
void for_each_point(std::size_t n, std::size_t l, std::size_t cap, Fn&& fn) {
  const std::size_t total = sample_space_size(n, l, cap);
  std::vector<Symbol> x(n, 0);
  for (std::size_t k = 0; k < total; ++k) {
    fn(std::span<const Symbol>(x));
    for (std::size_t i = n; i-- > 0;) {
      if (++x[i] < l) break;
      x[i] = 0;
    }
  }
}

template <SampleSpaceDistribution D>
void require_same_space(const D& p, const D& q) {
  if (p.dimension() != q.dimension() || p.alphabet_size() != q.alphabet_size()) {
    throw ContractViolation("distributions live on different sample spaces");
  }
}

// Exact total variation distance by enumerating Sigma^n.
template <SampleSpaceDistribution D>
double tv_exhaustive(const D& p, const D& q, std::size_t cap = kDefaultEnumerationCap) {
  require_same_space(p, q);
  double total = 0.0;
  for_each_point(p.dimension(), p.alphabet_size(), cap,
                 [&](std::span<const Symbol> x) { total += std::abs(p.pmf(x) - q.pmf(x)); });
  return 0.5 * total;
}

// Exact squared Hellinger distance by enumeration; the only exact route for
// Bayes nets, whose H^2 does not factorize.
template <SampleSpaceDistribution D>
double hellinger_sq_exhaustive(const D& p, const D& q, std::size_t cap = kDefaultEnumerationCap) {
  require_same_space(p, q);
  double affinity = 0.0;
  for_each_point(p.dimension(), p.alphabet_size(), cap,
                 [&](std::span<const Symbol> x) { affinity += std::sqrt(p.pmf(x) * q.pmf(x)); });
  return std::max(0.0, 1.0 - affinity);
}

}  // namespace prodtest
