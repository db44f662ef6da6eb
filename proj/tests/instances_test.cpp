#include "prodtest/instances.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "prodtest/errors.hpp"
#include "support/oracle.hpp"

namespace prodtest {
namespace {

oracle::Product to_oracle(const ProductDist& p) {
  oracle::Product out;
  for (const auto& c : p.components()) out.emplace_back(c.probs().begin(), c.probs().end());
  return out;
}

oracle::Distances enumerate_pair(const AnyDist& a, const AnyDist& b) {
  const std::size_t n = std::visit([](const auto& d) { return d.dimension(); }, a);
  const std::size_t l = std::visit([](const auto& d) { return d.alphabet_size(); }, a);
  auto pmf = [](const AnyDist& d) {
    return [&d](const oracle::Point& x) {
      return std::visit([&](const auto& v) { return v.pmf(Sample(x.begin(), x.end())); }, d);
    };
  };
  return oracle::brute_force(n, l, pmf(a), pmf(b));
}

TEST(PaninskiTest, ZeroEpsilonIsUniform) {
  Rng rng(1);
  const auto [p, q] = gen_paninski_mixture(3, 4, 0.0, rng);
  EXPECT_EQ(p, q);
}

TEST(PaninskiTest, OneCoordinateTwoSymbols) {
  Rng rng(2);
  const auto [p, q] = gen_paninski_mixture(1, 2, 0.5, rng);
  const double a = q.component(0)[0];
  EXPECT_TRUE(std::abs(a - 0.75) < 1e-15 || std::abs(a - 0.25) < 1e-15) << a;
  EXPECT_NEAR(q.component(0)[0] + q.component(0)[1], 1.0, 1e-15);
  EXPECT_EQ(p, ProductDist::uniform(1, 2));
}

TEST(PaninskiTest, FarByEnumeration) {
  for (std::size_t n = 1; n <= 8; ++n) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      Rng rng(seed);
      const double eps = 0.4;
      const auto [p, q] = gen_paninski_mixture(n, 2, eps, rng);
      EXPECT_GE(oracle::brute_force(to_oracle(p), to_oracle(q)).tv, eps / 4) << n;
    }
  }
}

TEST(PaninskiTest, ComponentsArePermutations) {
  Rng rng(3);
  const auto [p1, q1] = gen_paninski_mixture(6, 4, 0.3, rng);
  const auto [p2, q2] = gen_paninski_mixture(6, 4, 0.3, rng);
  for (std::size_t i = 0; i < 6; ++i) {
    auto a = to_oracle(q1)[i];
    auto b = to_oracle(q2)[i];
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    for (std::size_t j = 0; j < 4; ++j) EXPECT_NEAR(a[j], b[j], 1e-15);
  }
}

TEST(PaninskiTest, Infeasible) {
  Rng rng(4);
  EXPECT_THROW(gen_paninski_mixture(2, 3, 0.3, rng), InfeasibleInstance);
  EXPECT_THROW(gen_paninski_mixture(1, 2, 1.0, rng), ContractViolation);
}

TEST(PlantedHeavyTest, OneCoordinateAlgebra) {
  Rng rng(5);
  const double eps = 0.3;
  const auto [p, q] = gen_planted_heavy(1, 2, eps, 1.0, rng);
  const auto a = p.component(0);
  EXPECT_NEAR(std::max(a[0], a[1]), 0.5 + eps / 2, 1e-15);
  EXPECT_NEAR(std::min(a[0], a[1]), 0.5 - eps / 2, 1e-15);
  const auto op = to_oracle(p);
  const auto oq = to_oracle(q);
  double tri = 0.0;
  for (std::size_t j = 0; j < 2; ++j) tri += (op[0][j] - oq[0][j]) * (op[0][j] - oq[0][j]) / (op[0][j] + oq[0][j]);
  EXPECT_NEAR(tri, 2 * eps * eps, 1e-15);
  EXPECT_NEAR(heavy_sum(p, q, 0), tri, 1e-15);
}

TEST(PlantedHeavyTest, SumIsTwiceStrengthSquaredEpsSquared) {
  for (std::size_t l : {2, 3, 4, 5}) {
    Rng rng(6);
    const auto [p, q] = gen_planted_heavy(10, l, 0.4, 1.5, rng);
    EXPECT_NEAR(heavy_sum(p, q, 0), 2 * 1.5 * 1.5 * 0.16, 1e-12) << l;
  }
}

TEST(PlantedHeavyTest, ZeroEpsilonOrStrengthIsIdentical) {
  Rng rng(7);
  const auto [p, q] = gen_planted_heavy(4, 3, 0.0, 1.0, rng);
  EXPECT_EQ(p, q);
  const auto [p2, q2] = gen_planted_heavy(4, 3, 0.4, 0.0, rng);
  EXPECT_EQ(p2, q2);
  EXPECT_THROW(gen_planted_heavy(1, 2, 0.9, 2.0, rng), InfeasibleInstance);
}

TEST(PlantedLightTest, CellsAreLightAndCarryTheTarget) {
  Rng rng(8);
  const std::uint64_t m = 100;
  for (std::size_t l : {2, 4}) {
    const double target = light_target_hellinger(0.4, 100, l);
    const auto [p, q] = gen_planted_light(100, l, target, 1.0, m, rng);
    const auto op = to_oracle(p);
    const auto oq = to_oracle(q);
    double sum = 0.0;
    for (std::size_t i = 0; i < 100; ++i) {
      for (std::size_t j = 1; j < l; ++j) {
        EXPECT_LT(std::max(op[i][j], oq[i][j]), 1.0 / m);
        sum += (op[i][j] - oq[i][j]) * (op[i][j] - oq[i][j]);
      }
    }
    EXPECT_GE(sum, target * (1 - 1e-9));
    EXPECT_NEAR(light_sum(p, q, m), sum, 1e-15);
  }
}

TEST(PlantedLightTest, InfeasibleAtLargeRate) {
  Rng rng(9);
  EXPECT_THROW(gen_planted_light(10, 2, light_target_tv(0.4, 10, 2), 1.0, 100000, rng), InfeasibleInstance);
  EXPECT_THROW(gen_planted_light(10, 2, 0.1, 1.0, 0, rng), ContractViolation);
}

TEST(PlantedLightTest, Targets) {
  EXPECT_NEAR(light_target_hellinger(0.5, 10, 2), 0.0625 / 500, 1e-18);
  EXPECT_NEAR(light_target_tv(0.5, 10, 2), 0.25 / 20, 1e-18);
}

TEST(FDeltaPairTest, IdenticalBasesCollapse) {
  const Categorical b({0.2, 0.3, 0.5});
  const auto [p, q] = gen_f_delta_pair(b, b, 1.0 / 3);
  EXPECT_EQ(p, q);
  const auto c = f_delta_bounds(b, b, 1.0 / 3);
  EXPECT_EQ(c.tv_lower_bound, 0.0);
  EXPECT_EQ(c.chisq_upper_bound, 0.0);
}

TEST(FDeltaPairTest, ClosedFormTvBound) {
  const Categorical a({1.0, 0.0});
  const Categorical b({0.5, 0.5});
  EXPECT_NEAR(f_delta_bounds(a, b, 1.0 / 3).tv_lower_bound, std::exp(-1.0 / 3) / 6, 1e-15);
  EXPECT_NEAR(f_delta_bounds(a, b, 1.0 / 3).tv_lower_bound, 0.1194, 1e-4);
}

TEST(FDeltaPairTest, BoundsHoldByEnumeration) {
  oracle::Gen gen(10);
  const double delta = 1.0 / 3;
  for (int t = 0; t < 100; ++t) {
    const auto bp = gen.simplex(8, 0.005);
    const auto bq = gen.simplex(8, 0.005);
    const auto [p, q] = gen_f_delta_pair(Categorical(bp), Categorical(bq), delta);
    const auto d = oracle::brute_force(to_oracle(p), to_oracle(q));
    double norm2 = 0.0;
    for (double v : bp) norm2 += v * v;
    EXPECT_GE(d.tv, delta * std::exp(-delta) * oracle::tv(bp, bq) - 1e-12);
    EXPECT_LE(d.chisq, std::exp(4 * delta * oracle::chisq(bp, bq)) - 1 + 1e-12);
    EXPECT_LE(d.kl, (delta + delta * delta / 2) * oracle::kl(bp, bq) + 1.5 * delta * delta * norm2 + 1e-12);
    const auto c = f_delta_bounds(Categorical(bp), Categorical(bq), delta);
    EXPECT_NEAR(c.tv_lower_bound, delta * std::exp(-delta) * oracle::tv(bp, bq), 1e-12);
  }
}

TEST(BayesNetPairTest, ZeroStrengthCloseIsIdentical) {
  Rng rng(11);
  const auto [p, q] = gen_random_bayesnet_pair(5, 2, 1, Gap::close, 0.4, 0.0, rng);
  EXPECT_EQ(p, q);
}

TEST(BayesNetPairTest, FarPairCertifiedByEnumeration) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(seed);
    const auto [p, q] = gen_random_bayesnet_pair(5, 2, 1, Gap::far, 0.4, 1.0, rng);
    EXPECT_LE(p.dag().max_in_degree(), 1u);
    EXPECT_EQ(p.dag(), q.dag());
    const double h = std::sqrt(enumerate_pair(p, q).h2);
    EXPECT_GT(h, 0.4) << seed;
    EXPECT_LE(h, 0.6) << seed;
  }
}

TEST(BayesNetPairTest, ClosePairCertifiedByEnumeration) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(seed);
    const auto [p, q] = gen_random_bayesnet_pair(5, 2, 2, Gap::close, 0.4, 1.0, rng);
    EXPECT_LE(p.dag().max_in_degree(), 2u);
    EXPECT_LE(std::sqrt(enumerate_pair(p, q).h2), 0.2) << seed;
  }
}

TEST(BayesNetPairTest, InDegreeZeroGivesProducts) {
  Rng rng(12);
  const auto [p, q] = gen_random_bayesnet_pair(5, 2, 0, Gap::far, 0.4, 1.0, rng);
  EXPECT_EQ(p.dag().max_in_degree(), 0u);
  oracle::Product op;
  oracle::Product oq;
  for (std::size_t v = 0; v < 5; ++v) {
    op.emplace_back(p.cpt(v, 0).probs().begin(), p.cpt(v, 0).probs().end());
    oq.emplace_back(q.cpt(v, 0).probs().begin(), q.cpt(v, 0).probs().end());
  }
  const double factorized = 1.0 - [&] {
    double bc = 1.0;
    for (std::size_t v = 0; v < 5; ++v) bc *= 1.0 - oracle::h2(op[v], oq[v]);
    return bc;
  }();
  EXPECT_NEAR(enumerate_pair(p, q).h2, factorized, 1e-12);
}

TEST(GenerateTest, CertificateMatchesOracle) {
  InstanceParams params;
  params.n = 6;
  params.l = 3;
  params.seed = 13;
  params.strength = 0.8;
  const Instance inst = generate(Family::planted_heavy, params);
  const auto d = enumerate_pair(inst.p, inst.q);
  EXPECT_NEAR(inst.certificate.at("hellinger_sq"), d.h2, 1e-12);
  EXPECT_NEAR(inst.certificate.at("hellinger"), std::sqrt(d.h2), 1e-12);
  EXPECT_NEAR(inst.certificate.at("chisq"), d.chisq, 1e-12);
  EXPECT_NEAR(inst.certificate.at("kl"), d.kl, 1e-12);
  EXPECT_NEAR(inst.certificate.at("tv"), d.tv, 1e-12);
  EXPECT_LE(inst.certificate.at("tv_lower"), d.tv + 1e-12);
  EXPECT_GE(inst.certificate.at("tv_upper"), d.tv - 1e-12);
  EXPECT_EQ(certify(inst), inst.certificate);
}

TEST(GenerateTest, SameSeedSameInstance) {
  InstanceParams params;
  params.seed = 14;
  for (Family f : {Family::identical, Family::paninski_mixture, Family::planted_heavy, Family::f_delta_pair,
                   Family::random_bayesnet_pair}) {
    params.n = f == Family::random_bayesnet_pair ? 5 : 8;
    const Instance a = generate(f, params);
    const Instance b = generate(f, params);
    EXPECT_EQ(a.p, b.p) << to_string(f);
    EXPECT_EQ(a.q, b.q) << to_string(f);
    EXPECT_EQ(a.certificate, b.certificate) << to_string(f);
  }
}

TEST(GenerateTest, IdenticalFamily) {
  InstanceParams params;
  params.uniform = true;
  const Instance inst = generate(Family::identical, params);
  EXPECT_EQ(std::get<ProductDist>(inst.p), ProductDist::uniform(params.n, params.l));
  EXPECT_EQ(inst.certificate.at("hellinger_sq"), 0.0);
}

TEST(GenerateTest, FDeltaCertificateKeys) {
  InstanceParams params;
  params.n = 6;
  params.seed = 15;
  const Instance inst = generate(Family::f_delta_pair, params);
  ASSERT_TRUE(inst.base.has_value());
  EXPECT_GE(inst.certificate.at("tv"), inst.certificate.at("tv_lower_bound") - 1e-12);
  EXPECT_LE(inst.certificate.at("chisq"), inst.certificate.at("chisq_upper_bound") + 1e-12);
  EXPECT_LE(inst.certificate.at("kl"), inst.certificate.at("kl_upper_bound") + 1e-12);
}

TEST(GenerateTest, ParseNames) {
  EXPECT_EQ(parse_family("paninski"), Family::paninski_mixture);
  EXPECT_EQ(parse_family("planted_heavy"), Family::planted_heavy);
  EXPECT_EQ(parse_family("bayesnet"), Family::random_bayesnet_pair);
  EXPECT_FALSE(parse_family("nope").has_value());
  EXPECT_EQ(parse_gap("close"), Gap::close);
  EXPECT_FALSE(parse_gap("near").has_value());
}

TEST(DirichletTest, SumsToOneAndIsPositive) {
  Rng rng(16);
  for (int t = 0; t < 100; ++t) {
    const auto v = dirichlet(5, 0.5, rng);
    double total = 0.0;
    for (double x : v) {
      EXPECT_GE(x, 0.0);
      total += x;
    }
    EXPECT_NEAR(total, 1.0, 1e-12);
  }
}

}  // namespace
}  // namespace prodtest
