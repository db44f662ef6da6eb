#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <utility>

#include "prodtest/distributions.hpp"
#include "prodtest/rng.hpp"

namespace prodtest {

// Sample access to an (unknown) distribution over Sigma^n. Testers only see
// this interface; it counts every draw so verdicts can report their sample
// usage.
class SampleSource {
 public:
  using DrawFn = std::function<void(std::span<Symbol>)>;

  SampleSource(std::size_t dimension, std::size_t alphabet_size, DrawFn draw)
      : dimension_(dimension), alphabet_size_(alphabet_size), draw_(std::move(draw)) {}

  // Owns a copy of `dist` and a random stream seeded with `seed`.
  template <SampleSpaceDistribution D>
  static SampleSource from(D dist, std::uint64_t seed) {
    auto state = std::make_shared<std::pair<D, Rng>>(std::move(dist), Rng(seed));
    const std::size_t n = state->first.dimension();
    const std::size_t l = state->first.alphabet_size();
    return SampleSource(n, l, [state](std::span<Symbol> out) {
      state->first.draw_into(state->second, out);
    });
  }

  std::size_t dimension() const { return dimension_; }
  std::size_t alphabet_size() const { return alphabet_size_; }
  std::uint64_t drawn() const { return drawn_; }

  void draw_into(std::span<Symbol> out) {
    draw_(out);
    ++drawn_;
  }

  Sample next() {
    Sample x(dimension_);
    draw_into(x);
    return x;
  }

 private:
  std::size_t dimension_;
  std::size_t alphabet_size_;
  DrawFn draw_;
  std::uint64_t drawn_ = 0;
};

}  // namespace prodtest
