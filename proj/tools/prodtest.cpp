#include <fmt/format.h>

#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "prodtest/checks.hpp"
#include "prodtest/distances.hpp"
#include "prodtest/errors.hpp"
#include "prodtest/experiment.hpp"
#include "prodtest/instances.hpp"
#include "prodtest/serialization.hpp"
#include "prodtest/statistics.hpp"
#include "prodtest/testers.hpp"

namespace {

using namespace prodtest;

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

struct GenOptions {
  std::string family;
  InstanceParams params;
  std::string gap = "far";
};

void add_gen_options(CLI::App* cmd, GenOptions& o) {
  cmd->add_option("--n", o.params.n, "Dimension");
  cmd->add_option("--l", o.params.l, "Alphabet size");
  cmd->add_option("--eps", o.params.epsilon, "Gap parameter epsilon");
  cmd->add_option("--seed", o.params.seed, "Generator seed");
  cmd->add_option("--strength", o.params.strength, "Perturbation multiplier (0 = identical pair)");
  cmd->add_option("--m", o.params.m, "Sample rate splitting heavy and light cells");
  cmd->add_option("--delta", o.params.delta, "F_delta rate");
  cmd->add_option("--d", o.params.d, "Bayes net in-degree bound");
  cmd->add_option("--gap", o.gap, "Bayes net gap side")->check(CLI::IsMember({"close", "far"}));
  cmd->add_flag("--uniform", o.params.uniform, "identical family: uniform pair");
}

Instance build_instance(GenOptions o) {
  const auto family = parse_family(o.family);
  if (!family) throw ContractViolation(fmt::format("unknown family \"{}\"", o.family));
  o.params.gap = *parse_gap(o.gap);
  if (*family == Family::planted_light && o.params.m == 0 && o.params.epsilon > 0.0) {
    o.params.m = exact_hellinger_samples(o.params.n, o.params.l, o.params.epsilon,
                                         defaults::kExactHellingerConstant);
  }
  return generate(*family, o.params);
}

void emit(const std::string& text, const std::string& out) {
  if (out.empty()) {
    std::fwrite(text.data(), 1, text.size(), stdout);
  } else {
    write_text_file(out, text);
  }
}

std::string format_value(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return fmt::format("{}", v);
}

// dist: the two members of one instance file, or one distribution per file.
std::pair<AnyDist, AnyDist> load_pair(const std::vector<std::string>& files) {
  if (files.size() == 1) {
    const Instance inst = instance_from_json(read_json_file(files[0]));
    return {inst.p, inst.q};
  }
  auto load = [](const std::string& path) {
    const Json doc = read_json_file(path);
    if (doc.is_object() && doc.value("kind", "") == "instance") {
      throw ContractViolation(fmt::format("{} is an instance; pass it alone", path));
    }
    return dist_from_json(doc);
  };
  return {load(files[0]), load(files[1])};
}

double compute_distance(const std::string& metric, bool exhaustive, const AnyDist& a,
                        const AnyDist& b, std::size_t cap) {
  if (a.index() != b.index()) throw ContractViolation("distributions have different kinds");
  if (const auto* p = std::get_if<ProductDist>(&a)) {
    const auto& q = std::get<ProductDist>(b);
    require_same_space(*p, q);
    if (metric == "tv") {
      if (!exhaustive) {
        throw ContractViolation("dTV between products has no closed form; pass --exhaustive");
      }
      return tv_exhaustive(*p, q, cap);
    }
    if (metric == "hellinger_sq") return exhaustive ? hellinger_sq_exhaustive(*p, q, cap) : hellinger_sq(*p, q);
    if (metric == "hellinger") {
      return std::sqrt(exhaustive ? hellinger_sq_exhaustive(*p, q, cap) : hellinger_sq(*p, q));
    }
    if (metric == "chisq") return chisq(*p, q);
    if (metric == "kl") return kl(*p, q);
  } else {
    Instance tmp{Family::random_bayesnet_pair, {}, a, b, std::nullopt, {}};
    const Certificate c = certify(tmp, cap);
    return c.at(metric);
  }
  throw ContractViolation(fmt::format("unknown metric \"{}\"", metric));
}

int run(int argc, char** argv) {
  CLI::App app{"Testing product distributions and Bayes nets"};
  app.require_subcommand(1);

  // gen
  GenOptions gen;
  std::string gen_out;
  auto* gen_cmd = app.add_subcommand("gen", "Generate an instance and write it as JSON");
  gen_cmd->add_option("family", gen.family, "identical | paninski | heavy | light | fdelta | bayesnet")
      ->required();
  add_gen_options(gen_cmd, gen);
  gen_cmd->add_option("--out", gen_out, "Output path (default stdout)");

  // test
  GenOptions test_gen;
  std::string tester_name;
  std::string instance_file;
  std::optional<double> test_eps;
  std::optional<double> test_constant;
  std::uint64_t test_seed = 0;
  std::size_t test_trials = 1;
  bool plain_budget = false;
  auto* test_cmd = app.add_subcommand("test", "Run one tester on an instance");
  test_cmd->add_option("--tester", tester_name,
                       "identity | hellinger_tolerant | tv_tolerant | exact_hellinger | exact_tv | bayesnet")
      ->required();
  test_cmd->add_option("--instance", instance_file, "Instance JSON file");
  test_cmd->add_option("--family", test_gen.family, "Generate the instance instead of reading it");
  add_gen_options(test_cmd, test_gen);
  test_cmd->add_option("--tester-eps", test_eps, "Tester epsilon (default: instance eps)");
  test_cmd->add_option("--constant", test_constant, "Sample constant c");
  test_cmd->add_option("--tester-seed", test_seed, "Tester master seed");
  test_cmd->add_option("--trials", test_trials, "Number of seeded trials")->check(CLI::PositiveNumber);
  test_cmd->add_flag("--plain-budget", plain_budget, "Learning budget c n l / eps^2");

  // sweep
  std::string plan_file;
  std::string sweep_out;
  bool sweep_json = false;
  bool sweep_timing = false;
  auto* sweep_cmd = app.add_subcommand("sweep", "Run an experiment plan");
  sweep_cmd->add_option("plan", plan_file, "Plan JSON file")->required();
  sweep_cmd->add_option("--out", sweep_out, "Output path (default stdout)");
  sweep_cmd->add_flag("--json", sweep_json, "Emit JSON with per-trial records instead of CSV");
  sweep_cmd->add_flag("--timing", sweep_timing, "Record wall time (output no longer reproducible)");

  // dist
  std::string metric = "hellinger";
  bool exhaustive = false;
  std::size_t cap = kDefaultEnumerationCap;
  std::vector<std::string> dist_files;
  auto* dist_cmd = app.add_subcommand("dist", "Distance between two distributions");
  dist_cmd->add_option("--metric", metric, "hellinger | hellinger_sq | chisq | kl | tv")
      ->check(CLI::IsMember({"hellinger", "hellinger_sq", "chisq", "kl", "tv"}));
  dist_cmd->add_flag("--exhaustive", exhaustive, "Enumerate the sample space");
  dist_cmd->add_option("--cap", cap, "Enumeration cap");
  dist_cmd->add_option("files", dist_files, "One instance file or two distribution files")
      ->required()
      ->expected(1, 2);

  // check
  std::vector<std::string> suites;
  std::uint64_t check_seed = 1;
  std::size_t check_cases = 200;
  auto* check_cmd = app.add_subcommand("check", "Run the property suites");
  check_cmd->add_option("--suite", suites, "Suite name (repeatable; default all)");
  check_cmd->add_option("--seed", check_seed, "Seed");
  check_cmd->add_option("--cases", check_cases, "Random cases per suite")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*gen_cmd) {
      emit(to_json(build_instance(gen)).dump(2) + "\n", gen_out);
      return kExitOk;
    }
    if (*test_cmd) {
      const auto id = parse_tester(tester_name);
      if (!id) throw ContractViolation(fmt::format("unknown tester \"{}\"", tester_name));
      if (instance_file.empty() == test_gen.family.empty()) {
        throw ContractViolation("pass exactly one of --instance and --family");
      }
      if (test_trials > 1 && !instance_file.empty()) {
        throw ContractViolation("--trials > 1 needs a generated instance; use --family");
      }
      const Instance inst = instance_file.empty() ? build_instance(test_gen)
                                                  : instance_from_json(read_json_file(instance_file));
      TesterConfig cfg;
      cfg.epsilon = test_eps.value_or(inst.params.epsilon);
      cfg.sample_constant = test_constant;
      cfg.learning_with_log = !plain_budget;
      if (test_trials == 1) {
        cfg.seed = test_seed;
        const TestVerdict v = run_tester(*id, inst, cfg);
        Json doc;
        doc["tester"] = std::string(to_string(*id));
        doc["decision"] = std::string(to_string(v.decision));
        doc["statistic"] = std::isfinite(v.statistic) ? Json(v.statistic) : Json(nullptr);
        doc["threshold"] = v.threshold;
        doc["samples_used"] = v.samples_used;
        doc["detail"] = v.detail;
        std::cout << doc.dump(2) << "\n";
        return kExitOk;
      }
      ExperimentPlan plan;
      plan.testers = {*id};
      plan.instances = {{inst.family, inst.params}};
      plan.trials = test_trials;
      if (test_constant) plan.constants = {*test_constant};
      plan.master_seed = test_seed;
      plan.epsilon = cfg.epsilon;
      plan.learning_with_log = cfg.learning_with_log;
      std::cout << to_csv(run_plan(plan));
      return kExitOk;
    }
    if (*sweep_cmd) {
      ExperimentPlan plan = plan_from_json(read_json_file(plan_file));
      plan.timing = plan.timing || sweep_timing;
      const auto rows = run_plan(plan);
      emit(sweep_json ? to_json(rows, true).dump(2) + "\n" : to_csv(rows), sweep_out);
      return kExitOk;
    }
    if (*dist_cmd) {
      const auto [a, b] = load_pair(dist_files);
      std::cout << format_value(compute_distance(metric, exhaustive, a, b, cap)) << "\n";
      return kExitOk;
    }
    if (*check_cmd) {
      if (suites.empty()) {
        for (auto name : check_suite_names()) suites.emplace_back(name);
      }
      bool ok = true;
      for (const auto& name : suites) {
        const CheckResult r = run_check(name, check_seed, check_cases);
        ok = ok && r.passed();
        std::cout << fmt::format("{} {} ({} cases, {} failures){}\n", r.passed() ? "PASS" : "FAIL",
                                 r.name, r.cases, r.failures, r.detail.empty() ? "" : ": " + r.detail);
      }
      return ok ? kExitOk : kExitFailure;
    }
  } catch (const ContractViolation& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const InfeasibleInstance& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const EnumerationCapExceeded& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace

int main(int argc, char** argv) { return run(argc, argv); }
