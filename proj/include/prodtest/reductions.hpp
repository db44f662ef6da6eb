#pragma once

#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "prodtest/distributions.hpp"
#include "prodtest/rng.hpp"
#include "prodtest/sample_source.hpp"

namespace prodtest {

// Mixing rate of the smoothing reduction; 0 < delta < 1.
class SmoothingParams {
 public:
  explicit SmoothingParams(double delta);
  double delta() const { return delta_; }

  // delta = eps^2 / (50 n): floor eps^2/(50 n l) for the chi^2 identity tester
  // and the Hellinger closeness tester.
  static SmoothingParams for_hellinger(double epsilon, std::size_t n);
  // delta = eps / (50 n): floor eps/(50 n l) for the dTV closeness tester.
  static SmoothingParams for_tv(double epsilon, std::size_t n);

 private:
  double delta_;
};

// Entry-wise (1 - delta) p + delta / l. Every entry of the result is at least
// delta / l.
Categorical smooth(const Categorical& p, double delta);
ProductDist smooth(const ProductDist& p, double delta);

// One draw of P^delta from one draw of P: each coordinate is independently
// replaced by a uniform symbol with probability delta. delta may be 0 or 1.
void smooth_sample_in_place(std::span<Symbol> x, std::size_t alphabet_size, double delta,
                            Rng& rng);
Sample smooth_sample(Sample x, std::size_t alphabet_size, double delta, Rng& rng);

// Source that yields smoothed draws of `inner`. `inner` must outlive it; the
// samples consumed are those counted by `inner`.
SampleSource smoothed_source(SampleSource& inner, double delta, std::uint64_t seed);

// n x l table of occurrence counts.
class CountTable {
 public:
  CountTable(std::size_t n, std::size_t l) : n_(n), l_(l), cells_(n * l, 0) {}

  std::size_t dimension() const { return n_; }
  std::size_t alphabet_size() const { return l_; }
  std::uint64_t& at(std::size_t i, std::size_t j) { return cells_[i * l_ + j]; }
  std::uint64_t at(std::size_t i, std::size_t j) const { return cells_[i * l_ + j]; }
  std::uint64_t row_total(std::size_t i) const;
  // Row-major flattening, index i * l + j.
  std::span<const std::uint64_t> cells() const { return cells_; }

  // Adds one sample to every coordinate.
  void add(std::span<const Symbol> x);

  friend bool operator==(const CountTable&, const CountTable&) = default;

 private:
  std::size_t n_;
  std::size_t l_;
  std::vector<std::uint64_t> cells_;
};

// Poissonized per-coordinate histograms: coordinate i uses only the first
// budgets[i] ~ Poi(m) draws, so that counts.at(i, j) ~ Poi(m p_ij)
// independently across all cells.
struct PoissonCounts {
  std::vector<std::uint64_t> budgets;
  CountTable counts;
  std::uint64_t samples_drawn = 0;
};

// max_i M_i reached the 2m cap; no samples were drawn.
struct BudgetExceeded {
  std::uint64_t max_budget = 0;
  std::uint64_t cap = 0;
};

using PoissonizeResult = std::variant<PoissonCounts, BudgetExceeded>;

// Draws M_i ~ Poi(m) from `rng`, then max_i M_i samples from `source`.
// Returns BudgetExceeded when max_i M_i >= 2m (m > 0).
PoissonizeResult poissonize(SampleSource& source, std::uint64_t m, Rng& rng);

// F_delta(P) for P over n items: the product of Bern(1 - exp(-delta p_i)),
// symbol 1 meaning "item i appeared among Poi(delta) draws of P".
ProductDist f_delta(const Categorical& p, double delta);

// One draw of F_delta(P) by simulating the Poi(delta) draws directly.
Sample f_delta_sample(const Categorical& p, double delta, Rng& rng);

}  // namespace prodtest
