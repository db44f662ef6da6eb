#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <type_traits>
#include <vector>

#include "prodtest/distances.hpp"
#include "prodtest/distributions.hpp"
#include "prodtest/errors.hpp"
#include "prodtest/reductions.hpp"
#include "prodtest/rng.hpp"
#include "prodtest/sample_source.hpp"

namespace prodtest {

// Inputs of the chi^2-type identity statistic over K cells: Poissonized
// counts N_i, the known reference probabilities s_i, and the rate m.
//
// When `epsilon` is given, the floor s_i >= eps^2 / (50 K) that the variance
// bound relies on is enforced (up to a relative rounding slack of 1e-12).
class AdkInput {
 public:
  AdkInput(std::vector<std::uint64_t> counts, std::vector<double> reference, std::uint64_t m,
           std::optional<double> epsilon = std::nullopt);

  std::size_t cells() const { return counts_.size(); }
  std::span<const std::uint64_t> counts() const { return counts_; }
  std::span<const double> reference() const { return reference_; }
  std::uint64_t rate() const { return m_; }

 private:
  std::vector<std::uint64_t> counts_;
  std::vector<double> reference_;
  std::uint64_t m_;
};

// T = sum_i ((N_i - m s_i)^2 - N_i) / (m s_i).
double adk_statistic(const AdkInput& input);

// E[T] = m sum_i (r_i - s_i)^2 / s_i when N_i ~ Poi(m r_i).
double adk_mean(std::span<const double> r, std::span<const double> s, double m);

// 2K + 7 sqrt(K) E + 4 K^{1/4} E^{3/2}.
double adk_variance_bound(std::size_t cells, double mean);

// Heavy cells U' (hit at least once by the pilot samples of P or Q) and the
// light complement V'.
class PartitionLabels {
 public:
  PartitionLabels(std::size_t n, std::size_t l) : n_(n), l_(l), heavy_(n * l, false) {}

  std::size_t dimension() const { return n_; }
  std::size_t alphabet_size() const { return l_; }
  bool heavy(std::size_t i, std::size_t j) const { return heavy_[i * l_ + j]; }
  bool light(std::size_t i, std::size_t j) const { return !heavy(i, j); }
  void set_heavy(std::size_t i, std::size_t j, bool value = true) { heavy_[i * l_ + j] = value; }
  void mark(std::span<const Symbol> x);
  std::size_t heavy_count() const;

 private:
  std::size_t n_;
  std::size_t l_;
  std::vector<bool> heavy_;
};

PartitionLabels split_heavy_light(std::span<const Sample> pilot_p, std::span<const Sample> pilot_q,
                                  std::size_t n, std::size_t l);

// sum over heavy cells of ((W - V)^2 - (W + V)) / (W + V); cells with
// W + V = 0 contribute 0.
double w_heavy(const CountTable& w, const CountTable& v, const PartitionLabels& labels);

// sum over light cells of (W - V)^2 - (W + V).
double w_light(const CountTable& w, const CountTable& v, const PartitionLabels& labels);

using PmfFn = std::function<double(std::span<const Symbol>)>;

// Mean of 1 - sqrt(Q(x)/P(x)) over `draws` samples x ~ P. Unbiased for
// H^2(P,Q) with variance at most 1/draws.
double hellinger_sq_estimate(SampleSource& sampler_p, const PmfFn& pmf_p, const PmfFn& pmf_q,
                             std::uint64_t draws);

template <SampleSpaceDistribution D>
double hellinger_sq_estimate(const D& p, const D& q, std::uint64_t draws, Rng& rng) {
  SampleSource source(p.dimension(), p.alphabet_size(),
                      [&](std::span<Symbol> out) { p.draw_into(rng, out); });
  return hellinger_sq_estimate(
      source, [&](std::span<const Symbol> x) { return p.pmf(x); },
      [&](std::span<const Symbol> x) { return q.pmf(x); }, draws);
}

// Number of draws 3 / eps^2 for additive error eps with probability 2/3.
std::uint64_t hellinger_estimate_draws(double epsilon);

struct TvEstimate {
  double value = 0.0;
  std::uint64_t draws = 0;
  std::uint64_t blocks = 0;
  std::uint64_t block_size = 0;
};

// Median-of-means layout: ceil(8 ln(2/delta)) blocks of ceil(4/eps^2) draws.
TvEstimate tv_estimate_layout(double epsilon, double delta);

namespace detail {

inline double likelihood_ratio(const ProductDist& q, const ProductDist& p,
                               std::span<const Symbol> x) {
  double r = 1.0;
  for (std::size_t i = 0; i < x.size(); ++i) r *= q.component(i)[x[i]] / p.component(i)[x[i]];
  return r;
}

template <SampleSpaceDistribution D>
double likelihood_ratio(const D& q, const D& p, std::span<const Symbol> x) {
  return q.pmf(x) / p.pmf(x);
}

double median_in_place(std::vector<double>& values);

}  // namespace detail

// Estimates dTV(P,Q) = E_{x~P}[max(0, 1 - Q(x)/P(x))] for fully known P and
// Q; within eps of the truth with probability at least 1 - delta.
template <SampleSpaceDistribution D>
TvEstimate tv_estimate_known(const D& p, const D& q, double epsilon, double delta, Rng& rng) {
  require_same_space(p, q);
  TvEstimate est = tv_estimate_layout(epsilon, delta);
  std::vector<double> means(est.blocks);
  Sample x(p.dimension());
  for (auto& mean : means) {
    double sum = 0.0;
    for (std::uint64_t k = 0; k < est.block_size; ++k) {
      p.draw_into(rng, x);
      sum += std::max(0.0, 1.0 - detail::likelihood_ratio(q, p, x));
    }
    mean = sum / static_cast<double>(est.block_size);
  }
  est.value = detail::median_in_place(means);
  est.draws = est.blocks * est.block_size;
  return est;
}

}  // namespace prodtest
