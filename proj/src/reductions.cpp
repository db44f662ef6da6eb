#include "prodtest/reductions.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>

#include "prodtest/errors.hpp"

namespace prodtest {

SmoothingParams::SmoothingParams(double delta) : delta_(delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw ContractViolation("smoothing delta must lie in (0,1)");
}

SmoothingParams SmoothingParams::for_hellinger(double epsilon, std::size_t n) {
  return SmoothingParams(epsilon * epsilon / (50.0 * static_cast<double>(n)));
}

SmoothingParams SmoothingParams::for_tv(double epsilon, std::size_t n) {
  return SmoothingParams(epsilon / (50.0 * static_cast<double>(n)));
}

Categorical smooth(const Categorical& p, double delta) {
  const double floor = SmoothingParams(delta).delta() / static_cast<double>(p.size());
  std::vector<double> out(p.probs().begin(), p.probs().end());
  for (double& v : out) v = (1.0 - delta) * v + floor;
  return Categorical(std::move(out));
}

ProductDist smooth(const ProductDist& p, double delta) {
  std::vector<Categorical> components;
  components.reserve(p.dimension());
  for (const auto& c : p.components()) components.push_back(smooth(c, delta));
  return ProductDist(std::move(components));
}

void smooth_sample_in_place(std::span<Symbol> x, std::size_t alphabet_size, double delta,
                            Rng& rng) {
  if (!(delta >= 0.0 && delta <= 1.0)) throw ContractViolation("smooth_sample: delta outside [0,1]");
  if (delta == 0.0) return;
  for (Symbol& s : x) {
    if (rng.bernoulli(delta)) s = static_cast<Symbol>(rng.below(alphabet_size));
  }
}

Sample smooth_sample(Sample x, std::size_t alphabet_size, double delta, Rng& rng) {
  for (Symbol s : x) {
    if (s >= alphabet_size) throw ContractViolation("smooth_sample: symbol out of range");
  }
  smooth_sample_in_place(x, alphabet_size, delta, rng);
  return x;
}

SampleSource smoothed_source(SampleSource& inner, double delta, std::uint64_t seed) {
  auto rng = std::make_shared<Rng>(seed);
  const std::size_t l = inner.alphabet_size();
  return SampleSource(inner.dimension(), l, [&inner, rng, l, delta](std::span<Symbol> out) {
    inner.draw_into(out);
    smooth_sample_in_place(out, l, delta, *rng);
  });
}

std::uint64_t CountTable::row_total(std::size_t i) const {
  const auto row = cells().subspan(i * l_, l_);
  return std::accumulate(row.begin(), row.end(), std::uint64_t{0});
}

void CountTable::add(std::span<const Symbol> x) {
  for (std::size_t i = 0; i < n_; ++i) ++at(i, x[i]);
}

PoissonizeResult poissonize(SampleSource& source, std::uint64_t m, Rng& rng) {
  const std::size_t n = source.dimension();
  const std::size_t l = source.alphabet_size();
  PoissonCounts result{std::vector<std::uint64_t>(n), CountTable(n, l), 0};
  if (m == 0) return result;

  std::uint64_t max_budget = 0;
  for (auto& b : result.budgets) {
    b = rng.poisson(static_cast<double>(m));
    max_budget = std::max(max_budget, b);
  }
  if (max_budget >= 2 * m) return BudgetExceeded{max_budget, 2 * m};

  Sample x(n);
  for (std::uint64_t t = 0; t < max_budget; ++t) {
    source.draw_into(x);
    for (std::size_t i = 0; i < n; ++i) {
      if (t < result.budgets[i]) ++result.counts.at(i, x[i]);
    }
  }
  result.samples_drawn = max_budget;
  return result;
}

ProductDist f_delta(const Categorical& p, double delta) {
  if (!(delta > 0.0 && delta <= 1.0)) throw ContractViolation("f_delta: delta outside (0,1]");
  std::vector<Categorical> components;
  components.reserve(p.size());
  for (double pi : p.probs()) components.push_back(Categorical::bernoulli(-std::expm1(-delta * pi)));
  return ProductDist(std::move(components));
}

Sample f_delta_sample(const Categorical& p, double delta, Rng& rng) {
  if (!(delta > 0.0 && delta <= 1.0)) throw ContractViolation("f_delta_sample: delta outside (0,1]");
  Sample bits(p.size(), 0);
  const std::uint64_t draws = rng.poisson(delta);
  for (std::uint64_t k = 0; k < draws; ++k) bits[p.sample(rng)] = 1;
  return bits;
}

}  // namespace prodtest
