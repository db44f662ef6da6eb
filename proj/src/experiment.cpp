#include "prodtest/experiment.hpp"

#include <fmt/format.h>

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>

#include "prodtest/errors.hpp"

namespace prodtest {

namespace {

struct TesterName {
  TesterId id;
  std::string_view short_name;
  std::string_view long_name;
};

constexpr TesterName kTesterNames[] = {
    {TesterId::identity, "identity", "identity_chisq_vs_hellinger"},
    {TesterId::hellinger_tolerant, "hellinger_tolerant", "closeness_hellinger_tolerant"},
    {TesterId::tv_tolerant, "tv_tolerant", "closeness_tv_tolerant"},
    {TesterId::exact_hellinger, "exact_hellinger", "closeness_exact_vs_hellinger"},
    {TesterId::exact_tv, "exact_tv", "closeness_exact_vs_tv"},
    {TesterId::bayesnet, "bayesnet", "bayesnet_hellinger_tolerant"},
};

enum SourceStream : std::uint64_t { kTesterSeed = 0, kSourceP = 1, kSourceQ = 2 };

BayesNet as_bayesnet(const AnyDist& d) {
  if (const auto* b = std::get_if<BayesNet>(&d)) return *b;
  return BayesNet::from_product(std::get<ProductDist>(d));
}

SampleSource source_for(const AnyDist& d, std::uint64_t seed) {
  return std::visit([&](const auto& dist) { return SampleSource::from(dist, seed); }, d);
}

}  // namespace

std::string_view to_string(TesterId id) {
  for (const auto& t : kTesterNames) {
    if (t.id == id) return t.short_name;
  }
  return "identity";
}

std::optional<TesterId> parse_tester(std::string_view name) {
  for (const auto& t : kTesterNames) {
    if (t.short_name == name || t.long_name == name) return t.id;
  }
  return std::nullopt;
}

double default_constant(TesterId id) {
  switch (id) {
    case TesterId::identity:
      return defaults::kIdentityConstant;
    case TesterId::hellinger_tolerant:
    case TesterId::tv_tolerant:
    case TesterId::bayesnet:
      return defaults::kLearningConstant;
    case TesterId::exact_hellinger:
      return defaults::kExactHellingerConstant;
    case TesterId::exact_tv:
      return defaults::kExactTvConstant;
  }
  return 1.0;
}

void require_compatible(TesterId id, const Instance& instance) {
  const bool products = std::holds_alternative<ProductDist>(instance.p) &&
                        std::holds_alternative<ProductDist>(instance.q);
  if (id != TesterId::bayesnet && !products) {
    throw ContractViolation(fmt::format("tester {} needs a product instance, family {} is not one",
                                        to_string(id), to_string(instance.family)));
  }
}

TestVerdict run_tester(TesterId id, const Instance& instance, const TesterConfig& cfg) {
  require_compatible(id, instance);
  TesterConfig inner = cfg;
  inner.seed = derive_seed(cfg.seed, kTesterSeed);
  SampleSource p = source_for(instance.p, derive_seed(cfg.seed, kSourceP));
  switch (id) {
    case TesterId::identity:
      return identity_chisq_vs_hellinger(p, std::get<ProductDist>(instance.q), inner);
    case TesterId::bayesnet: {
      const BayesNet bp = as_bayesnet(instance.p);
      const BayesNet bq = as_bayesnet(instance.q);
      SampleSource q = SampleSource::from(bq, derive_seed(cfg.seed, kSourceQ));
      const std::size_t d = std::max(bp.dag().max_in_degree(), bq.dag().max_in_degree());
      return bayesnet_hellinger_tolerant(p, q, bp.dag(), bq.dag(), d, inner);
    }
    default:
      break;
  }
  SampleSource q = source_for(instance.q, derive_seed(cfg.seed, kSourceQ));
  switch (id) {
    case TesterId::hellinger_tolerant:
      return closeness_hellinger_tolerant(p, q, inner);
    case TesterId::tv_tolerant:
      return closeness_tv_tolerant(p, q, inner);
    case TesterId::exact_hellinger:
      return closeness_exact_vs_hellinger(p, q, inner);
    case TesterId::exact_tv:
      return closeness_exact_vs_tv(p, q, inner);
    default:
      break;
  }
  throw ContractViolation("unknown tester");
}

void ExperimentPlan::validate() const {
  if (testers.empty()) throw ContractViolation("plan needs at least one tester");
  if (instances.empty()) throw ContractViolation("plan needs at least one instance");
  if (trials < 1) throw ContractViolation("plan needs at least one trial");
  for (double c : constants) {
    if (!(c > 0.0)) throw ContractViolation("sample constants must be positive");
  }
  if (epsilon && !(*epsilon > 0.0 && *epsilon < 1.0)) {
    throw ContractViolation("plan eps must lie in (0,1)");
  }
  if (!(tv_heavy_divisor > 0.0)) throw ContractViolation("tv_heavy_divisor must be positive");
}

ExperimentPlan plan_from_json(const Json& doc) {
  if (!doc.is_object()) throw ContractViolation("plan must be a JSON object");
  ExperimentPlan plan;
  try {
    for (const auto& t : doc.at("testers")) {
      const auto id = parse_tester(t.get<std::string>());
      if (!id) throw ContractViolation(fmt::format("unknown tester {}", t.dump()));
      plan.testers.push_back(*id);
    }
    auto add_instance = [&](const Json& spec) {
      const auto family = parse_family(spec.at("family").get<std::string>());
      if (!family) throw ContractViolation(fmt::format("unknown family {}", spec.at("family").dump()));
      InstanceSpec s;
      s.family = *family;
      if (spec.contains("params")) s.params = params_from_json(spec.at("params"));
      plan.instances.push_back(s);
    };
    if (doc.contains("instances")) {
      for (const auto& spec : doc.at("instances")) add_instance(spec);
    } else {
      add_instance(doc);
    }
    if (doc.contains("trials")) plan.trials = doc.at("trials").get<std::size_t>();
    if (doc.contains("constants")) plan.constants = doc.at("constants").get<std::vector<double>>();
    if (doc.contains("master_seed")) plan.master_seed = doc.at("master_seed").get<std::uint64_t>();
    if (doc.contains("eps")) plan.epsilon = doc.at("eps").get<double>();
    if (doc.contains("learning_budget")) {
      const auto mode = doc.at("learning_budget").get<std::string>();
      if (mode != "with_log" && mode != "plain") {
        throw ContractViolation("learning_budget must be \"with_log\" or \"plain\"");
      }
      plan.learning_with_log = mode == "with_log";
    }
    if (doc.contains("tv_heavy_divisor")) plan.tv_heavy_divisor = doc.at("tv_heavy_divisor").get<double>();
    if (doc.contains("timing")) plan.timing = doc.at("timing").get<bool>();
  } catch (const nlohmann::json::exception& e) {
    throw ContractViolation(fmt::format("invalid plan: {}", e.what()));
  }
  plan.validate();
  return plan;
}

Json to_json(const ExperimentPlan& plan) {
  Json doc;
  Json testers = Json::array();
  for (auto t : plan.testers) testers.push_back(std::string(to_string(t)));
  doc["testers"] = std::move(testers);
  Json instances = Json::array();
  for (const auto& s : plan.instances) {
    instances.push_back({{"family", std::string(to_string(s.family))}, {"params", to_json(s.params)}});
  }
  doc["instances"] = std::move(instances);
  doc["trials"] = plan.trials;
  doc["constants"] = plan.constants;
  doc["master_seed"] = plan.master_seed;
  if (plan.epsilon) doc["eps"] = *plan.epsilon;
  doc["learning_budget"] = plan.learning_with_log ? "with_log" : "plain";
  doc["tv_heavy_divisor"] = plan.tv_heavy_divisor;
  doc["timing"] = plan.timing;
  return doc;
}

WilsonInterval wilson_interval(std::size_t successes, std::size_t trials, double z) {
  if (trials == 0) return {0.0, 1.0};
  if (successes > trials) throw ContractViolation("wilson_interval: successes exceed trials");
  const double nt = static_cast<double>(trials);
  const double phat = static_cast<double>(successes) / nt;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nt;
  const double centre = (phat + z2 / (2.0 * nt)) / denom;
  const double half = z * std::sqrt(phat * (1.0 - phat) / nt + z2 / (4.0 * nt * nt)) / denom;
  const double lo = successes == 0 ? 0.0 : std::max(0.0, centre - half);
  const double hi = successes == trials ? 1.0 : std::min(1.0, centre + half);
  return {lo, hi};
}

std::size_t worker_count() {
  if (const char* env = std::getenv("PRODTEST_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1) return static_cast<std::size_t>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

struct Job {
  std::size_t row;
  std::size_t trial;
};

template <class Fn>
void parallel_for(std::size_t count, std::size_t threads, Fn&& fn) {
  threads = std::max<std::size_t>(1, std::min(threads, count));
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t k = next.fetch_add(1);
      if (k >= count) return;
      try {
        fn(k);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next.store(count);
        return;
      }
    }
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace

std::vector<ResultRow> run_plan(const ExperimentPlan& plan, std::size_t threads) {
  plan.validate();
  std::vector<Instance> instances;
  instances.reserve(plan.instances.size());
  for (const auto& spec : plan.instances) instances.push_back(generate(spec.family, spec.params));

  std::vector<ResultRow> rows;
  std::vector<std::size_t> row_instance;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    for (TesterId id : plan.testers) {
      require_compatible(id, instances[i]);
      std::vector<double> constants = plan.constants;
      if (constants.empty()) constants.push_back(default_constant(id));
      for (double c : constants) {
        ResultRow row;
        row.tester = id;
        row.instance = plan.instances[i];
        row.epsilon = plan.epsilon.value_or(plan.instances[i].params.epsilon);
        if (!(row.epsilon > 0.0 && row.epsilon < 1.0)) {
          throw ContractViolation("tester eps must lie in (0,1); set \"eps\" in the plan");
        }
        row.constant = c;
        row.trials = plan.trials;
        row.records.resize(plan.trials);
        rows.push_back(std::move(row));
        row_instance.push_back(i);
      }
    }
  }

  parallel_for(rows.size() * plan.trials, threads, [&](std::size_t k) {
    ResultRow& row = rows[k / plan.trials];
    const std::size_t trial = k % plan.trials;
    TesterConfig cfg;
    cfg.epsilon = row.epsilon;
    cfg.sample_constant = row.constant;
    cfg.seed = derive_seed(plan.master_seed, trial);
    cfg.learning_with_log = plan.learning_with_log;
    cfg.tv_heavy_divisor = plan.tv_heavy_divisor;
    const auto start = std::chrono::steady_clock::now();
    const TestVerdict v = run_tester(row.tester, instances[row_instance[k / plan.trials]], cfg);
    const auto stop = std::chrono::steady_clock::now();
    TrialRecord& rec = row.records[trial];
    rec.seed = cfg.seed;
    rec.decision = v.decision;
    rec.statistic = v.statistic;
    rec.threshold = v.threshold;
    rec.samples_used = v.samples_used;
    rec.wall_ms = plan.timing ? std::chrono::duration<double, std::milli>(stop - start).count() : 0.0;
  });

  for (auto& row : rows) {
    std::sort(row.records.begin(), row.records.end(),
              [](const TrialRecord& a, const TrialRecord& b) { return a.seed < b.seed; });
    double samples = 0.0;
    double ms = 0.0;
    for (const auto& r : row.records) {
      row.yes += r.decision == Decision::yes;
      row.no += r.decision == Decision::no;
      row.inconclusive += r.decision == Decision::inconclusive;
      samples += static_cast<double>(r.samples_used);
      ms += r.wall_ms;
    }
    const double nt = static_cast<double>(row.trials);
    row.yes_interval = wilson_interval(row.yes, row.trials);
    row.mean_samples = samples / nt;
    if (plan.timing) row.mean_ms = ms / nt;
  }
  return rows;
}

std::string to_csv(const std::vector<ResultRow>& rows) {
  std::string out(kCsvHeader);
  out += '\n';
  for (const auto& r : rows) {
    out += fmt::format("{},{},{},{},{},{},{},{:.4f},{:.4f},{:.4f},{:.1f},{}\n", to_string(r.tester),
                       to_string(r.instance.family), r.instance.params.n, r.instance.params.l,
                       r.epsilon, r.constant, r.trials, r.yes_rate(), r.yes_interval.lo,
                       r.yes_interval.hi, r.mean_samples,
                       r.mean_ms ? fmt::format("{:.3f}", *r.mean_ms) : std::string("NA"));
  }
  return out;
}

Json to_json(const std::vector<ResultRow>& rows, bool with_records) {
  Json doc = Json::array();
  for (const auto& r : rows) {
    Json row;
    row["tester"] = std::string(to_string(r.tester));
    row["family"] = std::string(to_string(r.instance.family));
    row["params"] = to_json(r.instance.params);
    row["eps"] = r.epsilon;
    row["constant"] = r.constant;
    row["trials"] = r.trials;
    row["yes"] = r.yes;
    row["no"] = r.no;
    row["inconclusive"] = r.inconclusive;
    row["yes_rate"] = r.yes_rate();
    row["wilson_lo"] = r.yes_interval.lo;
    row["wilson_hi"] = r.yes_interval.hi;
    row["mean_samples"] = r.mean_samples;
    row["mean_ms"] = r.mean_ms ? Json(*r.mean_ms) : Json(nullptr);
    if (with_records) {
      Json recs = Json::array();
      for (const auto& t : r.records) {
        recs.push_back({{"seed", t.seed},
                        {"decision", std::string(to_string(t.decision))},
                        {"statistic", std::isfinite(t.statistic) ? Json(t.statistic) : Json(nullptr)},
                        {"threshold", t.threshold},
                        {"samples_used", t.samples_used},
                        {"wall_ms", t.wall_ms}});
      }
      row["records"] = std::move(recs);
    }
    doc.push_back(std::move(row));
  }
  return doc;
}

}  // namespace prodtest
