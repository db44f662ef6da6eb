#pragma once

#include <cstdint>
#include <span>

#include "prodtest/distributions.hpp"
#include "prodtest/reductions.hpp"

namespace prodtest {

// Sample budget of a learning step.
struct LearnBudget {
  std::uint64_t m = 1;
  double target_hellinger = 0.1;
  double confidence = 0.1;

  void validate() const;
};

// Componentwise empirical product: p_ij = count(j at coordinate i) / m. No
// smoothing, so unseen symbols get probability 0.
ProductDist learn_product_empirical(std::span<const Sample> samples, std::size_t n, std::size_t l);

// Same estimator from the n x l count matrix, which is a sufficient
// statistic for it. Every row must have the same positive total.
ProductDist learn_product_from_counts(const CountTable& counts);

// c * n * l / eps^2 (plain) or c * n * (l + ln n) / eps^2 (with_log).
std::uint64_t product_learning_samples(std::size_t n, std::size_t l, double epsilon,
                                       double constant, bool with_log);

// c * l^{d+1} * n * ln(l^{d+1} n) / eps^2.
std::uint64_t bayesnet_learning_samples(std::size_t n, std::size_t l, std::size_t d,
                                        double epsilon, double constant);

// Fixed-structure CPT learning with add-one smoothing per row,
// (count + 1) / (row total + l); rows of unseen parent configurations come
// out uniform. The result is strictly positive everywhere.
BayesNet learn_bayesnet(std::span<const Sample> samples, const Dag& dag, std::size_t l);

}  // namespace prodtest
