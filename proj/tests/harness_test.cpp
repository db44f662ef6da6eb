#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "prodtest/checks.hpp"
#include "prodtest/errors.hpp"
#include "prodtest/experiment.hpp"
#include "prodtest/serialization.hpp"

namespace prodtest {
namespace {

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  return lines;
}

std::size_t count_fields(const std::string& line) {
  return static_cast<std::size_t>(std::count(line.begin(), line.end(), ',')) + 1;
}

TEST(SerializationTest, ProductRoundTrip) {
  const ProductDist p({Categorical({0.1, 0.2, 0.7}), Categorical({1.0 / 3, 1.0 / 3, 1.0 / 3})});
  const Json doc = to_json(p);
  EXPECT_EQ(doc.at("kind"), "product");
  EXPECT_EQ(doc.at("n"), 2);
  EXPECT_EQ(doc.at("l"), 3);
  const AnyDist back = dist_from_json(Json::parse(doc.dump()));
  EXPECT_EQ(std::get<ProductDist>(back), p);
}

TEST(SerializationTest, BayesNetRoundTrip) {
  InstanceParams params;
  params.n = 4;
  params.l = 3;
  params.d = 2;
  params.seed = 3;
  const Instance inst = generate(Family::random_bayesnet_pair, params);
  const auto& p = std::get<BayesNet>(inst.p);
  const Json doc = to_json(p);
  EXPECT_EQ(doc.at("kind"), "bayesnet");
  EXPECT_EQ(std::get<BayesNet>(dist_from_json(Json::parse(doc.dump()))), p);
}

TEST(SerializationTest, ParserRenormalizesOrRejects) {
  Json doc = Json::parse(R"({"kind":"product","n":1,"l":2,"components":[[0.5000000001,0.5]]})");
  const auto p = std::get<ProductDist>(dist_from_json(doc));
  EXPECT_NEAR(p.component(0)[0] + p.component(0)[1], 1.0, 1e-15);
  doc = Json::parse(R"({"kind":"product","n":1,"l":2,"components":[[0.6,0.5]]})");
  EXPECT_THROW(dist_from_json(doc), ContractViolation);
  doc = Json::parse(R"({"kind":"product","n":2,"l":2,"components":[[0.5,0.5]]})");
  EXPECT_THROW(dist_from_json(doc), ContractViolation);
  doc = Json::parse(R"({"kind":"mystery"})");
  EXPECT_THROW(dist_from_json(doc), ContractViolation);
}

TEST(SerializationTest, InstanceRoundTripForEveryFamily) {
  InstanceParams params;
  params.seed = 4;
  for (Family f : {Family::identical, Family::paninski_mixture, Family::planted_heavy, Family::f_delta_pair,
                   Family::random_bayesnet_pair}) {
    params.n = f == Family::random_bayesnet_pair ? 5 : 6;
    const Instance inst = generate(f, params);
    const std::string text = to_json(inst).dump(2);
    const Instance back = instance_from_json(Json::parse(text));
    EXPECT_EQ(back.family, inst.family);
    EXPECT_EQ(back.params, inst.params);
    EXPECT_EQ(back.p, inst.p) << to_string(f);
    EXPECT_EQ(back.q, inst.q) << to_string(f);
    EXPECT_EQ(back.certificate, inst.certificate) << to_string(f);
    EXPECT_EQ(to_json(back).dump(2), text) << to_string(f);
  }
}

TEST(SerializationTest, DivergentCertificateValues) {
  const Certificate c{{"chisq", kDivergent}, {"hellinger", 0.5}};
  const Json doc = to_json(c);
  EXPECT_EQ(doc.at("chisq"), "inf");
  EXPECT_EQ(doc.at("hellinger"), 0.5);
}

TEST(SerializationTest, ParamsDefaults) {
  InstanceParams defaults;
  defaults.n = 7;
  const auto p = params_from_json(Json::parse(R"({"l":3,"eps":0.2,"gap":"close"})"), defaults);
  EXPECT_EQ(p.n, 7u);
  EXPECT_EQ(p.l, 3u);
  EXPECT_DOUBLE_EQ(p.epsilon, 0.2);
  EXPECT_EQ(p.gap, Gap::close);
}

TEST(WilsonTest, MatchesClosedForm) {
  const double z = 1.959963984540054;
  for (auto [s, n] : {std::pair<std::size_t, std::size_t>{0, 10}, {5, 10}, {10, 10}, {134, 200}, {190, 200}}) {
    const double ph = static_cast<double>(s) / n;
    const double denom = 1 + z * z / n;
    const double centre = (ph + z * z / (2.0 * n)) / denom;
    const double half = z * std::sqrt(ph * (1 - ph) / n + z * z / (4.0 * n * n)) / denom;
    const auto w = wilson_interval(s, n);
    EXPECT_NEAR(w.lo, std::max(0.0, centre - half), 1e-12);
    EXPECT_NEAR(w.hi, std::min(1.0, centre + half), 1e-12);
  }
  EXPECT_EQ(wilson_interval(0, 0).lo, 0.0);
  EXPECT_EQ(wilson_interval(0, 0).hi, 1.0);
}

TEST(WilsonTest, TwoThirdsAtTwoHundred) {
  // 134/200 = 0.67 has a lower bound above 0.60.
  EXPECT_GT(wilson_interval(134, 200).lo, 0.60);
}

TEST(TesterIdTest, ParseAndDefaults) {
  EXPECT_EQ(parse_tester("identity"), TesterId::identity);
  EXPECT_EQ(parse_tester("closeness_exact_vs_tv"), TesterId::exact_tv);
  EXPECT_FALSE(parse_tester("bogus").has_value());
  EXPECT_EQ(default_constant(TesterId::identity), defaults::kIdentityConstant);
  EXPECT_EQ(default_constant(TesterId::exact_hellinger), defaults::kExactHellingerConstant);
}

ExperimentPlan small_plan() {
  ExperimentPlan plan;
  plan.testers = {TesterId::identity, TesterId::hellinger_tolerant};
  InstanceSpec spec;
  spec.family = Family::identical;
  spec.params.n = 6;
  spec.params.seed = 5;
  plan.instances = {spec};
  spec.family = Family::planted_heavy;
  spec.params.strength = 2.0;
  plan.instances.push_back(spec);
  plan.trials = 12;
  plan.constants = {4.0, 8.0};
  plan.master_seed = 77;
  return plan;
}

TEST(RunPlanTest, OneRowPerConfigurationWithSortedRecords) {
  const auto rows = run_plan(small_plan(), 1);
  ASSERT_EQ(rows.size(), 2u * 2u * 2u);
  for (const auto& row : rows) {
    EXPECT_EQ(row.trials, 12u);
    EXPECT_EQ(row.yes + row.no + row.inconclusive, 12u);
    ASSERT_EQ(row.records.size(), 12u);
    for (std::size_t k = 1; k < row.records.size(); ++k) EXPECT_LT(row.records[k - 1].seed, row.records[k].seed);
    EXPECT_LE(row.yes_interval.lo, row.yes_rate());
    EXPECT_GE(row.yes_interval.hi, row.yes_rate());
    EXPECT_FALSE(row.mean_ms.has_value());
  }
}

TEST(RunPlanTest, ThreadCountDoesNotChangeOutput) {
  const auto plan = small_plan();
  const std::string one = to_csv(run_plan(plan, 1));
  const std::string four = to_csv(run_plan(plan, 4));
  EXPECT_EQ(one, four);
  EXPECT_EQ(to_json(run_plan(plan, 3), true).dump(), to_json(run_plan(plan, 1), true).dump());
}

TEST(RunPlanTest, SingleTrial) {
  auto plan = small_plan();
  plan.trials = 1;
  plan.constants = {};
  for (const auto& row : run_plan(plan, 2)) {
    EXPECT_EQ(row.records.size(), 1u);
    EXPECT_TRUE(row.yes_rate() == 0.0 || row.yes_rate() == 1.0);
  }
}

TEST(RunPlanTest, RecordsReplay) {
  auto plan = small_plan();
  plan.testers = {TesterId::identity};
  plan.constants = {};
  const auto rows = run_plan(plan, 2);
  const Instance inst = generate(rows[0].instance.family, rows[0].instance.params);
  for (const auto& rec : rows[0].records) {
    TesterConfig cfg;
    cfg.epsilon = rows[0].epsilon;
    cfg.seed = rec.seed;
    const TestVerdict v = run_tester(TesterId::identity, inst, cfg);
    EXPECT_EQ(v.decision, rec.decision);
    EXPECT_EQ(v.statistic, rec.statistic);
    EXPECT_EQ(v.samples_used, rec.samples_used);
  }
}

TEST(RunPlanTest, IncompatibleCombinationRefused) {
  ExperimentPlan plan;
  plan.testers = {TesterId::identity};
  InstanceSpec bn{Family::random_bayesnet_pair, {}};
  bn.params.n = 5;
  plan.instances = {bn};
  EXPECT_THROW(run_plan(plan, 1), ContractViolation);
}

TEST(RunPlanTest, BayesNetTesterTakesProducts) {
  ExperimentPlan plan;
  plan.testers = {TesterId::bayesnet};
  plan.instances = {InstanceSpec{Family::identical, {}}};
  plan.trials = 3;
  EXPECT_EQ(run_plan(plan, 1).at(0).trials, 3u);
}

TEST(RunPlanTest, TimingIsOptIn) {
  auto plan = small_plan();
  plan.trials = 2;
  plan.timing = true;
  for (const auto& row : run_plan(plan, 1)) EXPECT_TRUE(row.mean_ms.has_value());
}

TEST(CsvTest, HeaderAndShape) {
  const auto rows = run_plan(small_plan(), 2);
  const auto lines = split_lines(to_csv(rows));
  ASSERT_EQ(lines.size(), rows.size() + 1);
  EXPECT_EQ(lines[0], kCsvHeader);
  for (const auto& line : lines) EXPECT_EQ(count_fields(line), 12u) << line;
  EXPECT_EQ(lines[1].substr(lines[1].size() - 3), ",NA");
}

TEST(PlanJsonTest, ParseAndRoundTrip) {
  const Json doc = Json::parse(R"({
    "testers": ["identity", "exact_tv"],
    "instances": [{"family": "identical", "params": {"n": 8}}, {"family": "heavy"}],
    "trials": 5, "constants": [2, 4], "master_seed": 9, "eps": 0.3,
    "learning_budget": "plain"
  })");
  const auto plan = plan_from_json(doc);
  EXPECT_EQ(plan.testers.size(), 2u);
  EXPECT_EQ(plan.instances[0].params.n, 8u);
  EXPECT_EQ(plan.instances[1].family, Family::planted_heavy);
  EXPECT_EQ(plan.trials, 5u);
  EXPECT_FALSE(plan.learning_with_log);
  EXPECT_EQ(to_json(plan_from_json(to_json(plan))).dump(), to_json(plan).dump());
}

TEST(PlanJsonTest, SingleFamilyForm) {
  const auto plan = plan_from_json(Json::parse(R"({"testers":["identity"],"family":"paninski"})"));
  ASSERT_EQ(plan.instances.size(), 1u);
  EXPECT_EQ(plan.instances[0].family, Family::paninski_mixture);
}

TEST(PlanJsonTest, InvalidPlansRejected) {
  EXPECT_THROW(plan_from_json(Json::parse(R"({"testers":[],"family":"identical"})")), ContractViolation);
  EXPECT_THROW(plan_from_json(Json::parse(R"({"testers":["x"],"family":"identical"})")), ContractViolation);
  EXPECT_THROW(plan_from_json(Json::parse(R"({"testers":["identity"],"family":"identical","trials":0})")),
               ContractViolation);
  EXPECT_THROW(plan_from_json(Json::parse(R"({"testers":["identity"]})")), ContractViolation);
  EXPECT_THROW(plan_from_json(Json::parse(R"([1,2])")), ContractViolation);
}

TEST(ChecksTest, EverySuitePasses) {
  for (auto name : check_suite_names()) {
    const CheckResult r = run_check(name, 1, 40);
    EXPECT_TRUE(r.passed()) << r.name << ": " << r.detail;
    EXPECT_GT(r.cases, 0u);
  }
  EXPECT_THROW(run_check("nope", 1, 1), ContractViolation);
}

}  // namespace
}  // namespace prodtest
