#include "prodtest/distances.hpp"

#include <cmath>
#include <string>

namespace prodtest {

namespace {

void require_same_alphabet(const Categorical& p, const Categorical& q) {
  if (p.size() != q.size()) throw ContractViolation("categoricals over different alphabets");
}

void require_same_shape(const ProductDist& p, const ProductDist& q) {
  if (p.dimension() != q.dimension() || p.alphabet_size() != q.alphabet_size()) {
    throw ContractViolation("product distributions of different shapes");
  }
}

}  // namespace

double hellinger_sq(const Categorical& p, const Categorical& q) {
  require_same_alphabet(p, q);
  // 1/2 sum (sqrt p - sqrt q)^2 equals 1 - sum sqrt(pq) but has no
  // cancellation near P = Q.
  double total = 0.0;
  for (Symbol j = 0; j < p.size(); ++j) {
    const double d = std::sqrt(p[j]) - std::sqrt(q[j]);
    total += d * d;
  }
  return std::min(1.0, 0.5 * total);
}

double chisq(const Categorical& p, const Categorical& q) {
  require_same_alphabet(p, q);
  // sum (p-q)^2/q rather than sum p^2/q - 1: no cancellation near P = Q.
  double total = 0.0;
  for (Symbol j = 0; j < p.size(); ++j) {
    if (q[j] == 0.0) {
      if (p[j] > 0.0) return kDivergent;
      continue;
    }
    const double d = p[j] - q[j];
    total += d * d / q[j];
  }
  return total;
}

double kl(const Categorical& p, const Categorical& q) {
  require_same_alphabet(p, q);
  double total = 0.0;
  for (Symbol j = 0; j < p.size(); ++j) {
    if (p[j] == 0.0) continue;
    if (q[j] == 0.0) return kDivergent;
    total += p[j] * std::log(p[j] / q[j]);
  }
  return std::max(0.0, total);
}

double tv(const Categorical& p, const Categorical& q) {
  require_same_alphabet(p, q);
  double total = 0.0;
  for (Symbol j = 0; j < p.size(); ++j) total += std::fabs(p[j] - q[j]);
  return 0.5 * total;
}

double triangular_discrimination(const Categorical& p, const Categorical& q) {
  require_same_alphabet(p, q);
  double total = 0.0;
  for (Symbol j = 0; j < p.size(); ++j) {
    const double s = p[j] + q[j];
    if (s == 0.0) continue;
    const double d = p[j] - q[j];
    total += d * d / s;
  }
  return total;
}

double hellinger_sq(const ProductDist& p, const ProductDist& q) {
  require_same_shape(p, q);
  // 1 - prod(1 - h_i) computed as -expm1(sum log1p(-h_i)) to keep precision
  // when every h_i is tiny.
  double log_affinity = 0.0;
  for (std::size_t i = 0; i < p.dimension(); ++i) {
    const double h = hellinger_sq(p.component(i), q.component(i));
    if (h >= 1.0) return 1.0;
    log_affinity += std::log1p(-h);
  }
  return std::min(1.0, std::max(0.0, -std::expm1(log_affinity)));
}

double chisq(const ProductDist& p, const ProductDist& q) {
  require_same_shape(p, q);
  double log_growth = 0.0;
  for (std::size_t i = 0; i < p.dimension(); ++i) {
    const double c = chisq(p.component(i), q.component(i));
    if (is_divergent(c)) return kDivergent;
    log_growth += std::log1p(c);
  }
  const double value = std::expm1(log_growth);
  return std::isfinite(value) ? value : kDivergent;
}

double kl(const ProductDist& p, const ProductDist& q) {
  require_same_shape(p, q);
  double total = 0.0;
  for (std::size_t i = 0; i < p.dimension(); ++i) {
    const double k = kl(p.component(i), q.component(i));
    if (is_divergent(k)) return kDivergent;
    total += k;
  }
  return total;
}

double sum_componentwise_hellinger_sq(const ProductDist& p, const ProductDist& q) {
  require_same_shape(p, q);
  double total = 0.0;
  for (std::size_t i = 0; i < p.dimension(); ++i) total += hellinger_sq(p.component(i), q.component(i));
  return total;
}

double sum_componentwise_chisq(const ProductDist& p, const ProductDist& q) {
  require_same_shape(p, q);
  double total = 0.0;
  for (std::size_t i = 0; i < p.dimension(); ++i) {
    const double c = chisq(p.component(i), q.component(i));
    if (is_divergent(c)) return kDivergent;
    total += c;
  }
  return total;
}

std::size_t sample_space_size(std::size_t n, std::size_t l, std::size_t cap) {
  std::size_t total = 1;
  for (std::size_t i = 0; i < n; ++i) {
    if (total > cap / l) {
      throw EnumerationCapExceeded("sample space " + std::to_string(l) + "^" + std::to_string(n) +
                                   " exceeds enumeration cap " + std::to_string(cap));
    }
    total *= l;
  }
  if (total > cap) {
    throw EnumerationCapExceeded("sample space exceeds enumeration cap " + std::to_string(cap));
  }
  return total;
}

}  // namespace prodtest
