#include "prodtest/statistics.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "support/oracle.hpp"

namespace prodtest {
namespace {

ProductDist to_library(const oracle::Product& raw) {
  std::vector<Categorical> comps;
  for (const auto& v : raw) comps.emplace_back(v);
  return ProductDist(std::move(comps));
}

// Poisson counts for test inputs come from the standard library, not the
// library's own sampler.
std::uint64_t poisson(std::mt19937_64& engine, double mean) {
  if (mean <= 0.0) return 0;
  return std::poisson_distribution<std::uint64_t>(mean)(engine);
}

struct Moments {
  double mean = 0.0;
  double var = 0.0;
};

template <class Fn>
Moments monte_carlo(int reps, Fn&& fn) {
  double s = 0.0;
  double s2 = 0.0;
  for (int k = 0; k < reps; ++k) {
    const double v = fn();
    s += v;
    s2 += v * v;
  }
  Moments m;
  m.mean = s / reps;
  m.var = (s2 - reps * m.mean * m.mean) / (reps - 1);
  return m;
}

// Var T for independent N_i ~ Poi(m r_i), computed from Poisson moments.
double adk_exact_variance(const std::vector<double>& r, const std::vector<double>& s, double m) {
  double v = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    v += 2 * r[i] * r[i] / (s[i] * s[i]) + 4 * m * r[i] * (r[i] - s[i]) * (r[i] - s[i]) / (s[i] * s[i]);
  }
  return v;
}

TEST(AdkTest, CountsAtExpectationGiveMinusK) {
  const std::vector<double> s{0.1, 0.2, 0.3, 0.4};
  const AdkInput in({100, 200, 300, 400}, s, 1000);
  EXPECT_NEAR(adk_statistic(in), -4.0, 1e-12);
}

TEST(AdkTest, ZeroCountsGiveM) {
  const AdkInput in({0, 0, 0, 0}, {0.1, 0.2, 0.3, 0.4}, 1000);
  EXPECT_NEAR(adk_statistic(in), 1000.0, 1e-9);
}

TEST(AdkTest, PreconditionsAreEnforced) {
  EXPECT_THROW(AdkInput({1, 2}, {0.5}, 10), ContractViolation);
  EXPECT_THROW(AdkInput({1, 2}, {0.5, 0.5}, 0), ContractViolation);
  EXPECT_THROW(AdkInput({1, 2}, {1.0, 0.0}, 10), ContractViolation);
  // Floor eps^2 / (50 K) = 0.01 / 100 = 1e-4.
  EXPECT_THROW(AdkInput({1, 2}, {0.99995, 0.00005}, 10, 0.1), ContractViolation);
  EXPECT_NO_THROW(AdkInput({1, 2}, {0.9999, 0.0001}, 10, 0.1));
}

TEST(AdkTest, NullMeanAndVarianceBound) {
  const std::vector<double> s{0.1, 0.2, 0.3, 0.4};
  const std::uint64_t m = 5000;
  std::mt19937_64 engine(1);
  const auto mc = monte_carlo(2000, [&] {
    std::vector<std::uint64_t> counts(4);
    for (std::size_t i = 0; i < 4; ++i) counts[i] = poisson(engine, m * s[i]);
    return adk_statistic(AdkInput(counts, s, m));
  });
  const double var = adk_exact_variance(s, s, m);
  EXPECT_NEAR(var, 8.0, 1e-12);
  EXPECT_NEAR(mc.mean, 0.0, 4 * std::sqrt(var / 2000));
  EXPECT_LE(mc.var, 1.2 * adk_variance_bound(4, 0.0));
  EXPECT_EQ(adk_mean(s, s, m), 0.0);
}

TEST(AdkTest, RandomConfigurationsMatchMeanAndVariance) {
  oracle::Gen gen(2);
  std::mt19937_64 engine(3);
  for (int cfg = 0; cfg < 12; ++cfg) {
    const std::size_t k = 2 + gen.index(8);
    const double eps = 0.3 + 0.4 * gen.uniform();
    const auto s = gen.simplex(k, eps * eps / (50.0 * k) + 0.01);
    auto r = s;
    if (cfg % 2 == 1) r = gen.simplex(k, 0.01);
    const std::uint64_t m = static_cast<std::uint64_t>(std::ceil(4 * std::sqrt(k) / (eps * eps)));
    const int reps = 4000;
    const auto mc = monte_carlo(reps, [&] {
      std::vector<std::uint64_t> counts(k);
      for (std::size_t i = 0; i < k; ++i) counts[i] = poisson(engine, m * r[i]);
      return adk_statistic(AdkInput(counts, s, m, eps));
    });
    double want = 0.0;
    for (std::size_t i = 0; i < k; ++i) want += m * (r[i] - s[i]) * (r[i] - s[i]) / s[i];
    const double var = adk_exact_variance(r, s, m);
    EXPECT_NEAR(adk_mean(r, s, m), want, 1e-9 * std::max(1.0, want));
    EXPECT_NEAR(mc.mean, want, 4 * std::sqrt(var / reps)) << "config " << cfg;
    EXPECT_LE(mc.var, 1.2 * adk_variance_bound(k, want)) << "config " << cfg;
  }
}

TEST(PartitionTest, NoPilotMeansAllLight) {
  const auto labels = split_heavy_light({}, {}, 3, 2);
  EXPECT_EQ(labels.heavy_count(), 0u);
  EXPECT_TRUE(labels.light(2, 1));
}

TEST(PartitionTest, PointMassesMarkSymbolZero) {
  const std::vector<Sample> pilot(5, Sample{0, 0, 0});
  const auto labels = split_heavy_light(pilot, pilot, 3, 2);
  EXPECT_EQ(labels.heavy_count(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_TRUE(labels.heavy(i, 0));
    EXPECT_TRUE(labels.light(i, 1));
  }
}

TEST(PartitionTest, EitherPilotMarksACell) {
  const std::vector<Sample> a{Sample{0, 1}};
  const std::vector<Sample> b{Sample{1, 1}};
  const auto labels = split_heavy_light(a, b, 2, 2);
  EXPECT_TRUE(labels.heavy(0, 0));
  EXPECT_TRUE(labels.heavy(0, 1));
  EXPECT_TRUE(labels.light(1, 0));
  EXPECT_TRUE(labels.heavy(1, 1));
  EXPECT_THROW(split_heavy_light(std::vector<Sample>{Sample{2, 0}}, {}, 2, 2), ContractViolation);
}

TEST(PartitionTest, UniformPilotHitsEveryCell) {
  Rng rng(4);
  const auto u = ProductDist::uniform(1, 2);
  const auto pa = u.draw(rng, 200);
  const auto pb = u.draw(rng, 200);
  EXPECT_EQ(split_heavy_light(pa, pb, 1, 2).heavy_count(), 2u);
}

CountTable table(std::size_t n, std::size_t l, std::initializer_list<std::uint64_t> cells) {
  CountTable t(n, l);
  std::size_t k = 0;
  for (auto c : cells) {
    t.at(k / l, k % l) = c;
    ++k;
  }
  return t;
}

TEST(WStatisticTest, ZeroCountsGiveZero) {
  PartitionLabels labels(2, 2);
  labels.set_heavy(0, 0);
  const CountTable z(2, 2);
  EXPECT_EQ(w_heavy(z, z, labels), 0.0);
  EXPECT_EQ(w_light(z, z, labels), 0.0);
}

TEST(WStatisticTest, EqualCountsInHeavyCellsGiveMinusOneEach) {
  PartitionLabels labels(2, 2);
  labels.set_heavy(0, 0);
  labels.set_heavy(0, 1);
  labels.set_heavy(1, 1);
  const auto w = table(2, 2, {4, 7, 3, 0});
  // Heavy cells (0,0) and (0,1) have positive totals; (1,1) is empty.
  EXPECT_NEAR(w_heavy(w, w, labels), -2.0, 1e-15);
}

TEST(WStatisticTest, SingleLightCell) {
  PartitionLabels labels(1, 2);
  labels.set_heavy(0, 1);
  const auto w = table(1, 2, {3, 9});
  const auto v = table(1, 2, {1, 2});
  EXPECT_EQ(w_light(w, v, labels), 0.0);
  EXPECT_NEAR(w_heavy(w, v, labels), (49.0 - 11.0) / 11.0, 1e-15);
}

TEST(WStatisticTest, ShapeMismatch) {
  EXPECT_THROW(w_light(CountTable(2, 2), CountTable(2, 2), PartitionLabels(2, 3)), ContractViolation);
}

TEST(WStatisticTest, HeavyNullMeanIsZero) {
  const std::size_t n = 10;
  const std::size_t l = 2;
  const double m = 500;
  PartitionLabels labels(n, l);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < l; ++j) labels.set_heavy(i, j);
  }
  std::mt19937_64 engine(5);
  const int reps = 2000;
  const auto mc = monte_carlo(reps, [&] {
    CountTable w(n, l);
    CountTable v(n, l);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < l; ++j) {
        w.at(i, j) = poisson(engine, m / l);
        v.at(i, j) = poisson(engine, m / l);
      }
    }
    return w_heavy(w, v, labels);
  });
  EXPECT_LE(mc.var, 1.2 * 7.0 * n * l);
  EXPECT_NEAR(mc.mean, 0.0, 4 * std::sqrt(7.0 * n * l / reps));
}

TEST(WStatisticTest, LightMeanMatchesFormula) {
  oracle::Gen gen(6);
  const std::size_t n = 10;
  const std::size_t l = 2;
  const double m = 300;
  const PartitionLabels labels(n, l);
  for (bool equal : {true, false}) {
    const auto p = gen.product(n, l);
    const auto q = equal ? p : gen.product(n, l);
    double want = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < l; ++j) want += m * m * (p[i][j] - q[i][j]) * (p[i][j] - q[i][j]);
    }
    std::mt19937_64 engine(7);
    const int reps = 2000;
    const auto mc = monte_carlo(reps, [&] {
      CountTable w(n, l);
      CountTable v(n, l);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < l; ++j) {
          w.at(i, j) = poisson(engine, m * p[i][j]);
          v.at(i, j) = poisson(engine, m * q[i][j]);
        }
      }
      return w_light(w, v, labels);
    });
    EXPECT_NEAR(mc.mean, want, 4 * std::sqrt(mc.var / reps)) << (equal ? "equal" : "different");
  }
}

TEST(HellingerEstimateTest, IdenticalGivesExactZero) {
  oracle::Gen gen(8);
  const auto p = to_library(gen.product(4, 3));
  Rng rng(1);
  EXPECT_EQ(hellinger_sq_estimate(p, p, 1000, rng), 0.0);
}

TEST(HellingerEstimateTest, DrawCount) {
  EXPECT_EQ(hellinger_estimate_draws(0.1), 300u);
  EXPECT_EQ(hellinger_estimate_draws(0.5), 12u);
}

TEST(HellingerEstimateTest, WithinFourSigmaMostOfTheTime) {
  oracle::Gen gen(9);
  const auto rp = gen.product(4, 2, 0.02);
  const auto rq = gen.product(4, 2, 0.02);
  const double exact = oracle::brute_force(rp, rq).h2;
  const auto p = to_library(rp);
  const auto q = to_library(rq);
  const std::uint64_t draws = 10000;
  int good = 0;
  for (int rep = 0; rep < 50; ++rep) {
    Rng rng(derive_seed(10, rep));
    good += std::abs(hellinger_sq_estimate(p, q, draws, rng) - exact) <= 4.0 / std::sqrt(draws);
  }
  EXPECT_GE(good, 47);
}

TEST(HellingerEstimateTest, PooledMeanIsUnbiased) {
  oracle::Gen gen(11);
  const auto rp = gen.product(3, 3, 0.02);
  const auto rq = gen.product(3, 3, 0.02);
  const double exact = oracle::brute_force(rp, rq).h2;
  const auto p = to_library(rp);
  const auto q = to_library(rq);
  double pooled = 0.0;
  for (int rep = 0; rep < 10; ++rep) {
    Rng rng(derive_seed(12, rep));
    pooled += hellinger_sq_estimate(p, q, 10000, rng);
  }
  EXPECT_NEAR(pooled / 10, exact, 4 * std::sqrt(1e-5));
}

TEST(TvEstimateTest, Layout) {
  const auto est = tv_estimate_layout(0.05, 0.01);
  EXPECT_EQ(est.block_size, 1600u);
  EXPECT_EQ(est.blocks, static_cast<std::uint64_t>(std::ceil(8 * std::log(200.0))));
}

TEST(TvEstimateTest, KnownOneDimensionalPair) {
  const ProductDist p({Categorical({0.9, 0.1})});
  const ProductDist q({Categorical::uniform(2)});
  Rng rng(13);
  EXPECT_NEAR(tv_estimate_known(p, q, 0.05, 0.01, rng).value, 0.4, 0.05);
}

TEST(TvEstimateTest, IdenticalIsBelowEpsilon) {
  const auto p = ProductDist::uniform(3, 2);
  Rng rng(14);
  EXPECT_LE(tv_estimate_known(p, p, 0.05, 0.01, rng).value, 0.05);
}

TEST(TvEstimateTest, AccurateInAlmostEveryRun) {
  oracle::Gen gen(15);
  const auto rp = gen.product(2, 2, 0.02);
  const auto rq = gen.product(2, 2, 0.02);
  const double exact = oracle::brute_force(rp, rq).tv;
  const auto p = to_library(rp);
  const auto q = to_library(rq);
  int good = 0;
  for (int rep = 0; rep < 100; ++rep) {
    Rng rng(derive_seed(16, rep));
    good += std::abs(tv_estimate_known(p, q, 0.05, 0.01, rng).value - exact) <= 0.05;
  }
  EXPECT_GE(good, 99);
}

TEST(TriangularTest, DominatesTwiceHellinger) {
  oracle::Gen gen(17);
  for (int t = 0; t < 500; ++t) {
    const auto p = gen.simplex(4);
    const auto q = gen.simplex(4);
    double tri = 0.0;
    for (std::size_t j = 0; j < 4; ++j) tri += (p[j] - q[j]) * (p[j] - q[j]) / (p[j] + q[j]);
    EXPECT_NEAR(triangular_discrimination(Categorical(p), Categorical(q)), tri, 1e-12);
    EXPECT_GE(tri, 2 * oracle::h2(p, q) - 1e-12);
  }
}

TEST(MedianTest, OddAndEven) {
  std::vector<double> odd{3, 1, 2};
  EXPECT_EQ(detail::median_in_place(odd), 2.0);
  std::vector<double> even{4, 1, 3, 2};
  EXPECT_EQ(detail::median_in_place(even), 2.5);
}

}  // namespace
}  // namespace prodtest
