#pragma once

#include <concepts>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "prodtest/rng.hpp"

namespace prodtest {

// Symbols are dense indices 0..l-1; string alphabets are mapped at I/O.
using Symbol = std::uint32_t;

// One draw x in Sigma^n.
using Sample = std::vector<Symbol>;

// Probability vector over an alphabet of size l >= 2.
//
// Construction validates nonnegativity and normalization: a vector whose sum
// is within kNormalizationTolerance of 1 is renormalized exactly, anything
// further away is rejected.
class Categorical {
 public:
  static constexpr double kNormalizationTolerance = 1e-9;

  explicit Categorical(std::vector<double> probs);

  static Categorical uniform(std::size_t size);
  static Categorical point_mass(std::size_t size, Symbol symbol);
  // Two-symbol distribution with P[1] = p.
  static Categorical bernoulli(double p);

  std::size_t size() const { return probs_.size(); }
  double operator[](Symbol j) const { return probs_[j]; }
  std::span<const double> probs() const { return probs_; }
  double min_prob() const;

  Symbol sample(Rng& rng) const;

  friend bool operator==(const Categorical& a, const Categorical& b) {
    return a.probs_ == b.probs_;
  }

 private:
  std::vector<double> probs_;
  std::vector<double> cdf_;
};

// Common surface of ProductDist and BayesNet: pmf evaluation and sampling
// over Sigma^n.
template <class D>
concept SampleSpaceDistribution = requires(const D& d, std::span<const Symbol> x, Rng& rng,
                                           std::span<Symbol> out) {
  { d.dimension() } -> std::convertible_to<std::size_t>;
  { d.alphabet_size() } -> std::convertible_to<std::size_t>;
  { d.pmf(x) } -> std::convertible_to<double>;
  d.draw_into(rng, out);
};

// P = prod_i P_i with every P_i over the same alphabet.
class ProductDist {
 public:
  explicit ProductDist(std::vector<Categorical> components);

  static ProductDist uniform(std::size_t n, std::size_t l);

  std::size_t dimension() const { return components_.size(); }
  std::size_t alphabet_size() const { return components_.front().size(); }
  const Categorical& component(std::size_t i) const { return components_[i]; }
  std::span<const Categorical> components() const { return components_; }

  // prod_i p_i(x_i). Throws ContractViolation on a dimension mismatch or an
  // out-of-range symbol.
  double pmf(std::span<const Symbol> x) const;

  void draw_into(Rng& rng, std::span<Symbol> out) const;
  std::vector<Sample> draw(Rng& rng, std::size_t count) const;

  // Smallest p_ij over all cells.
  double min_prob() const;

  friend bool operator==(const ProductDist& a, const ProductDist& b) {
    return a.components_ == b.components_;
  }

 private:
  std::vector<Categorical> components_;
};

// Directed acyclic graph given by the parent list of every node. Parent order
// is significant: it fixes how CPT rows are indexed.
class Dag {
 public:
  explicit Dag(std::vector<std::vector<std::size_t>> parents);

  static Dag empty(std::size_t n);
  // 0 -> 1 -> ... -> n-1
  static Dag chain(std::size_t n);

  std::size_t size() const { return parents_.size(); }
  std::span<const std::size_t> parents(std::size_t node) const { return parents_[node]; }
  std::size_t max_in_degree() const;
  std::span<const std::size_t> topological_order() const { return order_; }

  friend bool operator==(const Dag& a, const Dag& b) { return a.parents_ == b.parents_; }

 private:
  std::vector<std::vector<std::size_t>> parents_;
  std::vector<std::size_t> order_;
};

// Bayes net on a known DAG:
//   P(x) = prod_i CPT_i(x_i | x_parents(i)).
// Row r of CPT_i belongs to the parent configuration whose mixed-radix value
// (first parent most significant) equals r.
class BayesNet {
 public:
  BayesNet(Dag dag, std::size_t alphabet_size, std::vector<std::vector<Categorical>> cpts);

  // The same distribution as a Bayes net on the empty graph.
  static BayesNet from_product(const ProductDist& product);

  std::size_t dimension() const { return dag_.size(); }
  std::size_t alphabet_size() const { return alphabet_size_; }
  const Dag& dag() const { return dag_; }
  std::size_t rows(std::size_t node) const { return cpts_[node].size(); }
  const Categorical& cpt(std::size_t node, std::size_t row) const { return cpts_[node][row]; }
  const std::vector<std::vector<Categorical>>& cpts() const { return cpts_; }

  // Row of CPT_node selected by the parent values in x.
  std::size_t row_index(std::size_t node, std::span<const Symbol> x) const;

  double pmf(std::span<const Symbol> x) const;

  // Ancestral sampling in topological order.
  void draw_into(Rng& rng, std::span<Symbol> out) const;
  std::vector<Sample> draw(Rng& rng, std::size_t count) const;

  friend bool operator==(const BayesNet& a, const BayesNet& b) {
    return a.alphabet_size_ == b.alphabet_size_ && a.dag_ == b.dag_ && a.cpts_ == b.cpts_;
  }

 private:
  Dag dag_;
  std::size_t alphabet_size_;
  std::vector<std::vector<Categorical>> cpts_;
};

static_assert(SampleSpaceDistribution<ProductDist>);
static_assert(SampleSpaceDistribution<BayesNet>);

// Integer power l^k, throwing ContractViolation on overflow past `limit`.
std::size_t checked_power(std::size_t base, std::size_t exponent,
                          std::size_t limit = SIZE_MAX);

}  // namespace prodtest
