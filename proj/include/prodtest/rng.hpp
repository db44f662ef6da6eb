#pragma once

#include <cstdint>
#include <random>

namespace prodtest {

// Mixes a 64-bit value (splitmix64 finalizer). Used to derive independent
// per-trial seeds from a master seed.
std::uint64_t mix_seed(std::uint64_t x);

// Deterministic child seed for stream `index` of `master`.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

// Seeded random source. Every draw is a pure function of the seed and the
// number of prior draws, on every platform: only the engine's raw 64-bit
// output is used, and all variates are derived here rather than through the
// implementation-defined std:: distributions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(mix_seed(seed)) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Uniform integer in [0, bound).
  std::uint64_t below(std::uint64_t bound);

  bool bernoulli(double p) { return uniform() < p; }

  // Exact Poisson variate: inversion for mean <= 30, PTRS rejection above.
  std::uint64_t poisson(double mean);

  // Standard gamma variate (Marsaglia-Tsang), used for Dirichlet draws.
  double gamma(double shape);

  double normal();

  Rng split() { return Rng(engine_()); }

 private:
  std::mt19937_64 engine_;
};

// log(k!) accurate to double precision; thread-safe, unlike std::lgamma.
double log_factorial(std::uint64_t k);

}  // namespace prodtest
