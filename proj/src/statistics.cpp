#include "prodtest/statistics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace prodtest {

AdkInput::AdkInput(std::vector<std::uint64_t> counts, std::vector<double> reference,
                   std::uint64_t m, std::optional<double> epsilon)
    : counts_(std::move(counts)), reference_(std::move(reference)), m_(m) {
  if (counts_.size() != reference_.size()) {
    throw ContractViolation("AdkInput: counts and reference differ in length");
  }
  if (counts_.empty()) throw ContractViolation("AdkInput: need at least one cell");
  if (m_ == 0) throw ContractViolation("AdkInput: sampling rate m must be positive");
  for (double s : reference_) {
    if (!(s > 0.0)) throw ContractViolation("AdkInput: reference probabilities must be positive");
  }
  if (epsilon) {
    const double floor =
        (*epsilon) * (*epsilon) / (50.0 * static_cast<double>(reference_.size()));
    const double smallest = *std::min_element(reference_.begin(), reference_.end());
    if (smallest < floor * (1.0 - 1e-12)) {
      throw ContractViolation("AdkInput: reference entry " + std::to_string(smallest) +
                              " is below the floor eps^2/(50K) = " + std::to_string(floor));
    }
  }
}

double adk_statistic(const AdkInput& input) {
  const double m = static_cast<double>(input.rate());
  double t = 0.0;
  for (std::size_t i = 0; i < input.cells(); ++i) {
    const double n = static_cast<double>(input.counts()[i]);
    const double expected = m * input.reference()[i];
    const double d = n - expected;
    t += (d * d - n) / expected;
  }
  return t;
}

double adk_mean(std::span<const double> r, std::span<const double> s, double m) {
  if (r.size() != s.size()) throw ContractViolation("adk_mean: length mismatch");
  double total = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    const double d = r[i] - s[i];
    total += d * d / s[i];
  }
  return m * total;
}

double adk_variance_bound(std::size_t cells, double mean) {
  const double k = static_cast<double>(cells);
  return 2.0 * k + 7.0 * std::sqrt(k) * mean + 4.0 * std::pow(k, 0.25) * std::pow(mean, 1.5);
}

void PartitionLabels::mark(std::span<const Symbol> x) {
  for (std::size_t i = 0; i < n_; ++i) heavy_[i * l_ + x[i]] = true;
}

std::size_t PartitionLabels::heavy_count() const {
  return static_cast<std::size_t>(std::count(heavy_.begin(), heavy_.end(), true));
}

PartitionLabels split_heavy_light(std::span<const Sample> pilot_p, std::span<const Sample> pilot_q,
                                  std::size_t n, std::size_t l) {
  PartitionLabels labels(n, l);
  for (const auto* pilot : {&pilot_p, &pilot_q}) {
    for (const auto& x : *pilot) {
      if (x.size() != n) throw ContractViolation("split_heavy_light: sample dimension mismatch");
      for (Symbol s : x) {
        if (s >= l) throw ContractViolation("split_heavy_light: symbol out of range");
      }
      labels.mark(x);
    }
  }
  return labels;
}

namespace {

void require_compatible(const CountTable& w, const CountTable& v, const PartitionLabels& labels) {
  if (w.dimension() != v.dimension() || w.alphabet_size() != v.alphabet_size() ||
      w.dimension() != labels.dimension() || w.alphabet_size() != labels.alphabet_size()) {
    throw ContractViolation("count tables and partition labels differ in shape");
  }
}

}  // namespace

double w_heavy(const CountTable& w, const CountTable& v, const PartitionLabels& labels) {
  require_compatible(w, v, labels);
  double total = 0.0;
  for (std::size_t i = 0; i < w.dimension(); ++i) {
    for (std::size_t j = 0; j < w.alphabet_size(); ++j) {
      if (!labels.heavy(i, j)) continue;
      const double a = static_cast<double>(w.at(i, j));
      const double b = static_cast<double>(v.at(i, j));
      const double s = a + b;
      if (s == 0.0) continue;
      total += ((a - b) * (a - b) - s) / s;
    }
  }
  return total;
}

double w_light(const CountTable& w, const CountTable& v, const PartitionLabels& labels) {
  require_compatible(w, v, labels);
  double total = 0.0;
  for (std::size_t i = 0; i < w.dimension(); ++i) {
    for (std::size_t j = 0; j < w.alphabet_size(); ++j) {
      if (!labels.light(i, j)) continue;
      const double a = static_cast<double>(w.at(i, j));
      const double b = static_cast<double>(v.at(i, j));
      total += (a - b) * (a - b) - (a + b);
    }
  }
  return total;
}

double hellinger_sq_estimate(SampleSource& sampler_p, const PmfFn& pmf_p, const PmfFn& pmf_q,
                             std::uint64_t draws) {
  if (draws == 0) throw ContractViolation("hellinger_sq_estimate: need at least one draw");
  Sample x(sampler_p.dimension());
  double total = 0.0;
  for (std::uint64_t k = 0; k < draws; ++k) {
    sampler_p.draw_into(x);
    const double p = pmf_p(x);
    if (!(p > 0.0)) {
      throw ContractViolation("hellinger_sq_estimate: P assigns zero mass to its own draw");
    }
    total += 1.0 - std::sqrt(pmf_q(x) / p);
  }
  return total / static_cast<double>(draws);
}

std::uint64_t hellinger_estimate_draws(double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw ContractViolation("epsilon must lie in (0,1)");
  return static_cast<std::uint64_t>(std::ceil(3.0 / (epsilon * epsilon) - 1e-9));
}

TvEstimate tv_estimate_layout(double epsilon, double delta) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw ContractViolation("tv estimate: epsilon in (0,1)");
  if (!(delta > 0.0 && delta < 1.0)) throw ContractViolation("tv estimate: delta in (0,1)");
  TvEstimate est;
  est.blocks = static_cast<std::uint64_t>(std::ceil(8.0 * std::log(2.0 / delta)));
  est.block_size = static_cast<std::uint64_t>(std::ceil(4.0 / (epsilon * epsilon)));
  return est;
}

namespace detail {

double median_in_place(std::vector<double>& values) {
  if (values.empty()) throw ContractViolation("median of an empty set");
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
  const double upper = values[mid];
  if (values.size() % 2 == 1) return upper;
  const double lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

}  // namespace detail

}  // namespace prodtest
