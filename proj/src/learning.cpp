#include "prodtest/learning.hpp"

#include <cmath>
#include <vector>

#include "prodtest/errors.hpp"

namespace prodtest {

void LearnBudget::validate() const {
  if (m < 1) throw ContractViolation("LearnBudget: m must be at least 1");
  if (!(target_hellinger > 0.0 && target_hellinger < 1.0)) {
    throw ContractViolation("LearnBudget: target Hellinger distance must lie in (0,1)");
  }
  if (!(confidence > 0.0 && confidence < 1.0)) {
    throw ContractViolation("LearnBudget: confidence must lie in (0,1)");
  }
}

ProductDist learn_product_empirical(std::span<const Sample> samples, std::size_t n, std::size_t l) {
  if (samples.empty()) throw ContractViolation("learn_product_empirical: no samples");
  CountTable counts(n, l);
  for (const auto& x : samples) {
    if (x.size() != n) throw ContractViolation("learn_product_empirical: dimension mismatch");
    for (Symbol s : x) {
      if (s >= l) throw ContractViolation("learn_product_empirical: symbol out of range");
    }
    counts.add(x);
  }
  return learn_product_from_counts(counts);
}

ProductDist learn_product_from_counts(const CountTable& counts) {
  const std::size_t n = counts.dimension();
  const std::size_t l = counts.alphabet_size();
  if (n == 0) throw ContractViolation("learn_product_from_counts: empty table");
  const std::uint64_t total = counts.row_total(0);
  if (total == 0) throw ContractViolation("learn_product_from_counts: no samples");
  std::vector<Categorical> components;
  components.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (counts.row_total(i) != total) {
      throw ContractViolation("learn_product_from_counts: rows have different totals");
    }
    std::vector<double> probs(l);
    for (std::size_t j = 0; j < l; ++j) {
      probs[j] = static_cast<double>(counts.at(i, j)) / static_cast<double>(total);
    }
    components.emplace_back(std::move(probs));
  }
  return ProductDist(std::move(components));
}

namespace {

std::uint64_t ceil_budget(double value) {
  if (!std::isfinite(value) || value > 1e15) {
    throw ContractViolation("sample budget overflow");
  }
  return std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::ceil(value - 1e-9)));
}

void check_epsilon_constant(double epsilon, double constant) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw ContractViolation("epsilon must lie in (0,1)");
  if (!(constant > 0.0)) throw ContractViolation("sample constant must be positive");
}

}  // namespace

std::uint64_t product_learning_samples(std::size_t n, std::size_t l, double epsilon,
                                       double constant, bool with_log) {
  check_epsilon_constant(epsilon, constant);
  const double nd = static_cast<double>(n);
  const double width = static_cast<double>(l) + (with_log ? std::log(nd) : 0.0);
  return ceil_budget(constant * nd * width / (epsilon * epsilon));
}

std::uint64_t bayesnet_learning_samples(std::size_t n, std::size_t l, std::size_t d,
                                        double epsilon, double constant) {
  check_epsilon_constant(epsilon, constant);
  const double rows = std::pow(static_cast<double>(l), static_cast<double>(d + 1));
  const double params = rows * static_cast<double>(n);
  return ceil_budget(constant * params * std::log(std::max(params, 2.0)) / (epsilon * epsilon));
}

BayesNet learn_bayesnet(std::span<const Sample> samples, const Dag& dag, std::size_t l) {
  if (samples.empty()) throw ContractViolation("learn_bayesnet: no samples");
  if (l < 2) throw ContractViolation("learn_bayesnet: alphabet size must be at least 2");
  const std::size_t n = dag.size();
  std::vector<std::vector<std::vector<std::uint64_t>>> counts(n);
  for (std::size_t v = 0; v < n; ++v) {
    counts[v].assign(checked_power(l, dag.parents(v).size()), std::vector<std::uint64_t>(l, 0));
  }
  for (const auto& x : samples) {
    if (x.size() != n) throw ContractViolation("learn_bayesnet: dimension mismatch");
    for (Symbol s : x) {
      if (s >= l) throw ContractViolation("learn_bayesnet: symbol out of range");
    }
    for (std::size_t v = 0; v < n; ++v) {
      std::size_t row = 0;
      for (std::size_t u : dag.parents(v)) row = row * l + x[u];
      ++counts[v][row][x[v]];
    }
  }
  std::vector<std::vector<Categorical>> cpts(n);
  for (std::size_t v = 0; v < n; ++v) {
    cpts[v].reserve(counts[v].size());
    for (const auto& row : counts[v]) {
      std::uint64_t total = 0;
      for (auto c : row) total += c;
      std::vector<double> probs(l);
      for (std::size_t j = 0; j < l; ++j) {
        probs[j] = (static_cast<double>(row[j]) + 1.0) / (static_cast<double>(total) + static_cast<double>(l));
      }
      cpts[v].emplace_back(std::move(probs));
    }
  }
  return BayesNet(dag, l, std::move(cpts));
}

}  // namespace prodtest
