#include "prodtest/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <string>

#include "prodtest/errors.hpp"

namespace prodtest {

// --- Categorical -----------------------------------------------------------

Categorical::Categorical(std::vector<double> probs) : probs_(std::move(probs)) {
  if (probs_.size() < 2) {
    throw ContractViolation("Categorical: alphabet size must be at least 2");
  }
  double total = 0.0;
  for (double p : probs_) {
    if (!(p >= 0.0) || !std::isfinite(p)) {
      throw ContractViolation("Categorical: probabilities must be finite and nonnegative");
    }
    total += p;
  }
  if (std::fabs(total - 1.0) > kNormalizationTolerance) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "Categorical: probabilities sum to " << total << ", not 1";
    throw ContractViolation(msg.str());
  }
  if (total != 1.0) {
    for (double& p : probs_) p /= total;
  }
  cdf_.resize(probs_.size());
  std::partial_sum(probs_.begin(), probs_.end(), cdf_.begin());
}

Categorical Categorical::uniform(std::size_t size) {
  return Categorical(std::vector<double>(size, 1.0 / static_cast<double>(size)));
}

Categorical Categorical::point_mass(std::size_t size, Symbol symbol) {
  if (symbol >= size) throw ContractViolation("Categorical::point_mass: symbol out of range");
  std::vector<double> probs(size, 0.0);
  probs[symbol] = 1.0;
  return Categorical(std::move(probs));
}

Categorical Categorical::bernoulli(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw ContractViolation("Categorical::bernoulli: p outside [0,1]");
  return Categorical({1.0 - p, p});
}

double Categorical::min_prob() const { return *std::min_element(probs_.begin(), probs_.end()); }

Symbol Categorical::sample(Rng& rng) const {
  const double u = rng.uniform() * cdf_.back();
  if (probs_.size() <= 8) {
    for (std::size_t j = 0; j + 1 < cdf_.size(); ++j) {
      if (u < cdf_[j]) return static_cast<Symbol>(j);
    }
  } else {
    const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    if (it != cdf_.end()) return static_cast<Symbol>(it - cdf_.begin());
  }
  // Rounding can leave u past the last interior boundary; the last symbol with
  // positive mass owns the remainder.
  std::size_t j = probs_.size() - 1;
  while (j > 0 && probs_[j] == 0.0) --j;
  return static_cast<Symbol>(j);
}

// --- ProductDist -----------------------------------------------------------

ProductDist::ProductDist(std::vector<Categorical> components)
    : components_(std::move(components)) {
  if (components_.empty()) throw ContractViolation("ProductDist: need at least one component");
  const std::size_t l = components_.front().size();
  for (const auto& c : components_) {
    if (c.size() != l) {
      throw ContractViolation("ProductDist: components must share one alphabet size");
    }
  }
}

ProductDist ProductDist::uniform(std::size_t n, std::size_t l) {
  return ProductDist(std::vector<Categorical>(n, Categorical::uniform(l)));
}

double ProductDist::pmf(std::span<const Symbol> x) const {
  if (x.size() != dimension()) throw ContractViolation("ProductDist::pmf: dimension mismatch");
  double p = 1.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] >= alphabet_size()) throw ContractViolation("ProductDist::pmf: symbol out of range");
    p *= components_[i][x[i]];
  }
  return p;
}

void ProductDist::draw_into(Rng& rng, std::span<Symbol> out) const {
  if (out.size() != dimension()) {
    throw ContractViolation("ProductDist::draw_into: dimension mismatch");
  }
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = components_[i].sample(rng);
}

std::vector<Sample> ProductDist::draw(Rng& rng, std::size_t count) const {
  std::vector<Sample> samples(count, Sample(dimension()));
  for (auto& s : samples) draw_into(rng, s);
  return samples;
}

double ProductDist::min_prob() const {
  double m = 1.0;
  for (const auto& c : components_) m = std::min(m, c.min_prob());
  return m;
}

// --- Dag -------------------------------------------------------------------

Dag::Dag(std::vector<std::vector<std::size_t>> parents) : parents_(std::move(parents)) {
  const std::size_t n = parents_.size();
  if (n == 0) throw ContractViolation("Dag: need at least one node");
  std::vector<std::size_t> indegree(n, 0);
  std::vector<std::vector<std::size_t>> children(n);
  for (std::size_t v = 0; v < n; ++v) {
    auto sorted = parents_[v];
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      throw ContractViolation("Dag: duplicate parent of node " + std::to_string(v));
    }
    for (std::size_t u : parents_[v]) {
      if (u >= n) throw ContractViolation("Dag: parent index out of range");
      if (u == v) throw ContractViolation("Dag: self loop at node " + std::to_string(v));
      children[u].push_back(v);
    }
    indegree[v] = parents_[v].size();
  }
  // Kahn's algorithm, smallest ready index first so the order is canonical.
  std::vector<std::size_t> ready;
  for (std::size_t v = 0; v < n; ++v) {
    if (indegree[v] == 0) ready.push_back(v);
  }
  std::make_heap(ready.begin(), ready.end(), std::greater<>());
  while (!ready.empty()) {
    std::pop_heap(ready.begin(), ready.end(), std::greater<>());
    const std::size_t u = ready.back();
    ready.pop_back();
    order_.push_back(u);
    for (std::size_t v : children[u]) {
      if (--indegree[v] == 0) {
        ready.push_back(v);
        std::push_heap(ready.begin(), ready.end(), std::greater<>());
      }
    }
  }
  if (order_.size() != n) throw ContractViolation("Dag: graph contains a cycle");
}

Dag Dag::empty(std::size_t n) { return Dag(std::vector<std::vector<std::size_t>>(n)); }

Dag Dag::chain(std::size_t n) {
  std::vector<std::vector<std::size_t>> parents(n);
  for (std::size_t v = 1; v < n; ++v) parents[v] = {v - 1};
  return Dag(std::move(parents));
}

std::size_t Dag::max_in_degree() const {
  std::size_t d = 0;
  for (const auto& p : parents_) d = std::max(d, p.size());
  return d;
}

// --- BayesNet --------------------------------------------------------------

std::size_t checked_power(std::size_t base, std::size_t exponent, std::size_t limit) {
  std::size_t result = 1;
  for (std::size_t k = 0; k < exponent; ++k) {
    if (base != 0 && result > limit / base) {
      throw ContractViolation("checked_power: " + std::to_string(base) + "^" +
                              std::to_string(exponent) + " exceeds limit");
    }
    result *= base;
  }
  return result;
}

BayesNet::BayesNet(Dag dag, std::size_t alphabet_size, std::vector<std::vector<Categorical>> cpts)
    : dag_(std::move(dag)), alphabet_size_(alphabet_size), cpts_(std::move(cpts)) {
  if (alphabet_size_ < 2) throw ContractViolation("BayesNet: alphabet size must be at least 2");
  if (cpts_.size() != dag_.size()) throw ContractViolation("BayesNet: one CPT per node required");
  for (std::size_t v = 0; v < dag_.size(); ++v) {
    const std::size_t expected = checked_power(alphabet_size_, dag_.parents(v).size());
    if (cpts_[v].size() != expected) {
      throw ContractViolation("BayesNet: node " + std::to_string(v) + " needs " +
                              std::to_string(expected) + " CPT rows, got " +
                              std::to_string(cpts_[v].size()));
    }
    for (const auto& row : cpts_[v]) {
      if (row.size() != alphabet_size_) {
        throw ContractViolation("BayesNet: CPT row over the wrong alphabet at node " +
                                std::to_string(v));
      }
    }
  }
}

BayesNet BayesNet::from_product(const ProductDist& product) {
  std::vector<std::vector<Categorical>> cpts;
  cpts.reserve(product.dimension());
  for (const auto& c : product.components()) cpts.push_back({c});
  return BayesNet(Dag::empty(product.dimension()), product.alphabet_size(), std::move(cpts));
}

std::size_t BayesNet::row_index(std::size_t node, std::span<const Symbol> x) const {
  std::size_t row = 0;
  for (std::size_t u : dag_.parents(node)) row = row * alphabet_size_ + x[u];
  return row;
}

double BayesNet::pmf(std::span<const Symbol> x) const {
  if (x.size() != dimension()) throw ContractViolation("BayesNet::pmf: dimension mismatch");
  for (Symbol s : x) {
    if (s >= alphabet_size_) throw ContractViolation("BayesNet::pmf: symbol out of range");
  }
  double p = 1.0;
  for (std::size_t v = 0; v < x.size(); ++v) p *= cpts_[v][row_index(v, x)][x[v]];
  return p;
}

void BayesNet::draw_into(Rng& rng, std::span<Symbol> out) const {
  if (out.size() != dimension()) throw ContractViolation("BayesNet::draw_into: dimension mismatch");
  for (std::size_t v : dag_.topological_order()) {
    out[v] = cpts_[v][row_index(v, out)].sample(rng);
  }
}

std::vector<Sample> BayesNet::draw(Rng& rng, std::size_t count) const {
  std::vector<Sample> samples(count, Sample(dimension()));
  for (auto& s : samples) draw_into(rng, s);
  return samples;
}

}  // namespace prodtest
