#include "prodtest/instances.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "prodtest/errors.hpp"
#include "prodtest/reductions.hpp"

namespace prodtest {

std::string_view to_string(Family f) {
  switch (f) {
    case Family::identical:
      return "identical";
    case Family::paninski_mixture:
      return "paninski_mixture";
    case Family::planted_heavy:
      return "planted_heavy";
    case Family::planted_light:
      return "planted_light";
    case Family::f_delta_pair:
      return "f_delta_pair";
    case Family::random_bayesnet_pair:
      return "random_bayesnet_pair";
  }
  return "identical";
}

std::optional<Family> parse_family(std::string_view name) {
  static constexpr std::pair<std::string_view, Family> kNames[] = {
      {"identical", Family::identical},
      {"paninski_mixture", Family::paninski_mixture},
      {"paninski", Family::paninski_mixture},
      {"planted_heavy", Family::planted_heavy},
      {"heavy", Family::planted_heavy},
      {"planted_light", Family::planted_light},
      {"light", Family::planted_light},
      {"f_delta_pair", Family::f_delta_pair},
      {"fdelta", Family::f_delta_pair},
      {"random_bayesnet_pair", Family::random_bayesnet_pair},
      {"bayesnet", Family::random_bayesnet_pair},
  };
  for (const auto& [key, family] : kNames) {
    if (key == name) return family;
  }
  return std::nullopt;
}

std::string_view to_string(Gap g) { return g == Gap::close ? "close" : "far"; }

std::optional<Gap> parse_gap(std::string_view name) {
  if (name == "close") return Gap::close;
  if (name == "far") return Gap::far;
  return std::nullopt;
}

std::vector<double> dirichlet(std::size_t k, double alpha, Rng& rng) {
  if (k == 0) throw ContractViolation("dirichlet: need at least one coordinate");
  if (!(alpha > 0.0)) throw ContractViolation("dirichlet: alpha must be positive");
  std::vector<double> out(k);
  double total = 0.0;
  for (auto& v : out) {
    v = rng.gamma(alpha);
    total += v;
  }
  if (!(total > 0.0)) {
    std::fill(out.begin(), out.end(), 1.0 / static_cast<double>(k));
    return out;
  }
  for (auto& v : out) v /= total;
  return out;
}

namespace {

void check_shape(std::size_t n, std::size_t l) {
  if (n == 0) throw ContractViolation("dimension n must be positive");
  if (l < 2) throw ContractViolation("alphabet size l must be at least 2");
}

void check_gen_epsilon(double epsilon) {
  if (!(epsilon >= 0.0 && epsilon < 1.0)) throw ContractViolation("epsilon must lie in [0,1)");
}

void check_strength(double strength) {
  if (!(strength >= 0.0) || !std::isfinite(strength)) {
    throw ContractViolation("strength must be a non-negative number");
  }
}

// Sign +1 or -1 for every symbol, opposite within each consecutive pair
// (2t, 2t+1) in random order; a trailing unpaired symbol gets 0.
std::vector<double> paired_signs(std::size_t count, Rng& rng) {
  std::vector<double> s(count, 0.0);
  for (std::size_t t = 0; t + 1 < count; t += 2) {
    const double first = rng.bernoulli(0.5) ? 1.0 : -1.0;
    s[t] = first;
    s[t + 1] = -first;
  }
  return s;
}

}  // namespace

std::pair<ProductDist, ProductDist> gen_paninski_mixture(std::size_t n, std::size_t l,
                                                         double epsilon, Rng& rng) {
  check_shape(n, l);
  check_gen_epsilon(epsilon);
  if (l % 2 != 0) throw InfeasibleInstance("paninski mixture needs an even alphabet size");
  const double a = epsilon / std::sqrt(static_cast<double>(n));
  if (!(a < 1.0)) throw InfeasibleInstance("paninski mixture needs eps / sqrt(n) < 1");
  const double ld = static_cast<double>(l);
  std::vector<Categorical> components;
  components.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> probs(l);
    for (std::size_t t = 0; t < l; t += 2) {
      const bool bit = rng.bernoulli(0.5);
      probs[t] = (1.0 + (bit ? -a : a)) / ld;
      probs[t + 1] = (1.0 + (bit ? a : -a)) / ld;
    }
    components.emplace_back(std::move(probs));
  }
  return {ProductDist::uniform(n, l), ProductDist(std::move(components))};
}

std::pair<ProductDist, ProductDist> gen_planted_heavy(std::size_t n, std::size_t l, double epsilon,
                                                      double strength, Rng& rng) {
  check_shape(n, l);
  check_gen_epsilon(epsilon);
  check_strength(strength);
  const std::size_t paired = l - l % 2;
  const double ld = static_cast<double>(l);
  const double a =
      strength * epsilon * std::sqrt(ld / (static_cast<double>(n) * static_cast<double>(paired)));
  if (!(a < 1.0)) {
    throw InfeasibleInstance(fmt::format(
        "planted heavy pair needs perturbation a = {:.6g} < 1; lower eps or strength, or raise n", a));
  }
  std::vector<Categorical> pc;
  std::vector<Categorical> qc;
  for (std::size_t i = 0; i < n; ++i) {
    const std::vector<double> s = paired_signs(l, rng);
    std::vector<double> p(l);
    std::vector<double> q(l);
    for (std::size_t j = 0; j < l; ++j) {
      p[j] = (1.0 + s[j] * a) / ld;
      q[j] = (1.0 - s[j] * a) / ld;
    }
    pc.emplace_back(std::move(p));
    qc.emplace_back(std::move(q));
  }
  return {ProductDist(std::move(pc)), ProductDist(std::move(qc))};
}

double light_target_hellinger(double epsilon, std::size_t n, std::size_t l) {
  const double e2 = epsilon * epsilon;
  return e2 * e2 / (25.0 * static_cast<double>(n) * static_cast<double>(l));
}

double light_target_tv(double epsilon, std::size_t n, std::size_t l) {
  return epsilon * epsilon / (static_cast<double>(n) * static_cast<double>(l));
}

std::pair<ProductDist, ProductDist> gen_planted_light(std::size_t n, std::size_t l, double target,
                                                      double strength, std::uint64_t m, Rng& rng) {
  check_shape(n, l);
  check_strength(strength);
  if (!(target >= 0.0)) throw ContractViolation("planted light pair: target must be non-negative");
  if (m == 0) throw ContractViolation("planted light pair needs the sample rate m");
  // Light cells keep max(p,q) = b (1 + beta) = kMargin / m.
  constexpr double kMargin = 0.9;
  const std::size_t k = l - 1;
  const double md = static_cast<double>(m);
  if (static_cast<double>(k) * kMargin / md >= 1.0) {
    throw InfeasibleInstance("planted light pair: m too small to leave room for light cells");
  }
  const double total = strength * strength * target;
  // Per-cell gap g = |p - q| = 2 b beta, with n k g^2 = total.
  const double g = std::sqrt(total / (static_cast<double>(n) * static_cast<double>(k)));
  const double g_max = kMargin / md;
  if (!(g < g_max)) {
    throw InfeasibleInstance(fmt::format(
        "planted light pair infeasible: light cells of mass < 1/m = {:.6g} can carry at most "
        "{:.6g} of sum (p-q)^2 over n={} l={}, target is {:.6g}; lower m or the target, or raise "
        "n or l",
        1.0 / md, static_cast<double>(n * k) * g_max * g_max, n, l, total));
  }
  const double r = g * md / (2.0 * kMargin);
  const double beta = r / (1.0 - r);
  const double b = kMargin / (md * (1.0 + beta));
  std::vector<Categorical> pc;
  std::vector<Categorical> qc;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> s = paired_signs(k, rng);
    if (k % 2 == 1) s[k - 1] = rng.bernoulli(0.5) ? 1.0 : -1.0;
    std::vector<double> p(l);
    std::vector<double> q(l);
    double rest_p = 1.0;
    double rest_q = 1.0;
    for (std::size_t j = 1; j < l; ++j) {
      p[j] = b * (1.0 + s[j - 1] * beta);
      q[j] = b * (1.0 - s[j - 1] * beta);
      rest_p -= p[j];
      rest_q -= q[j];
    }
    p[0] = rest_p;
    q[0] = rest_q;
    pc.emplace_back(std::move(p));
    qc.emplace_back(std::move(q));
  }
  return {ProductDist(std::move(pc)), ProductDist(std::move(qc))};
}

FDeltaCertificate f_delta_bounds(const Categorical& p, const Categorical& q, double delta) {
  if (!(delta > 0.0 && delta <= 1.0)) throw ContractViolation("f_delta: delta outside (0,1]");
  double l2 = 0.0;
  for (double v : p.probs()) l2 += v * v;
  FDeltaCertificate c;
  c.tv_lower_bound = delta * std::exp(-delta) * tv(p, q);
  c.chisq_upper_bound = std::expm1(4.0 * delta * chisq(p, q));
  c.kl_upper_bound = (delta + delta * delta / 2.0) * kl(p, q) + 1.5 * delta * delta * l2;
  return c;
}

std::pair<ProductDist, ProductDist> gen_f_delta_pair(const Categorical& p, const Categorical& q,
                                                     double delta) {
  if (p.size() != q.size()) throw ContractViolation("f_delta pair: bases differ in size");
  return {f_delta(p, delta), f_delta(q, delta)};
}

namespace {

Dag random_dag(std::size_t n, std::size_t d, Rng& rng) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
  std::vector<std::vector<std::size_t>> parents(n);
  for (std::size_t k = 0; k < n; ++k) {
    std::vector<std::size_t> earlier(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k));
    const std::size_t count = rng.below(std::min(d, k) + 1);
    for (std::size_t c = 0; c < count; ++c) {
      const std::size_t pick = c + rng.below(earlier.size() - c);
      std::swap(earlier[c], earlier[pick]);
    }
    earlier.resize(count);
    std::sort(earlier.begin(), earlier.end());
    parents[order[k]] = std::move(earlier);
  }
  return Dag(std::move(parents));
}

std::vector<std::vector<Categorical>> random_cpts(const Dag& dag, std::size_t l, Rng& rng) {
  std::vector<std::vector<Categorical>> cpts(dag.size());
  for (std::size_t v = 0; v < dag.size(); ++v) {
    const std::size_t rows = checked_power(l, dag.parents(v).size());
    for (std::size_t r = 0; r < rows; ++r) cpts[v].emplace_back(dirichlet(l, 1.0, rng));
  }
  return cpts;
}

BayesNet mix_rows(const BayesNet& p, const std::vector<std::vector<Categorical>>& other,
                  double t) {
  std::vector<std::vector<Categorical>> cpts(p.dimension());
  for (std::size_t v = 0; v < p.dimension(); ++v) {
    for (std::size_t r = 0; r < p.rows(v); ++r) {
      const auto a = p.cpt(v, r).probs();
      const auto b = other[v][r].probs();
      std::vector<double> mixed(a.size());
      for (std::size_t j = 0; j < a.size(); ++j) mixed[j] = (1.0 - t) * a[j] + t * b[j];
      cpts[v].emplace_back(std::move(mixed));
    }
  }
  return BayesNet(p.dag(), p.alphabet_size(), std::move(cpts));
}

}  // namespace

std::pair<BayesNet, BayesNet> gen_random_bayesnet_pair(std::size_t n, std::size_t l, std::size_t d,
                                                       Gap gap, double epsilon, double strength,
                                                       Rng& rng, std::size_t cap) {
  check_shape(n, l);
  check_strength(strength);
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw ContractViolation("epsilon must lie in (0,1)");
  sample_space_size(n, l, cap);
  double lo = 0.0;
  double hi = 0.0;
  double aim = 0.0;
  if (gap == Gap::far) {
    if (strength == 0.0) throw InfeasibleInstance("a far pair needs a nonzero perturbation");
    lo = epsilon;
    hi = 1.5 * epsilon;
    aim = 1.25 * epsilon;
  } else {
    lo = 0.0;
    hi = 0.5 * epsilon;
    aim = 0.25 * epsilon * strength;
    if (aim > hi) throw InfeasibleInstance("close pair strength must be at most 2");
  }
  constexpr int kAttempts = 100;
  for (int attempt = 0; attempt < kAttempts; ++attempt) {
    const Dag dag = random_dag(n, d, rng);
    BayesNet p(dag, l, random_cpts(dag, l, rng));
    if (aim == 0.0) return {p, p};
    const auto other = random_cpts(dag, l, rng);
    auto distance = [&](double t) {
      return std::sqrt(hellinger_sq_exhaustive(p, mix_rows(p, other, t), cap));
    };
    if (distance(1.0) < aim) continue;
    double a = 0.0;
    double b = 1.0;
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (a + b);
      (distance(mid) < aim ? a : b) = mid;
    }
    const double t = 0.5 * (a + b);
    BayesNet q = mix_rows(p, other, t);
    const double h = std::sqrt(hellinger_sq_exhaustive(p, q, cap));
    const bool inside = gap == Gap::far ? (h > lo && h <= hi) : (h <= hi);
    if (inside) return {std::move(p), std::move(q)};
  }
  throw InfeasibleInstance(fmt::format(
      "no random Bayes net pair with the requested {} gap after {} attempts", to_string(gap),
      kAttempts));
}

double heavy_sum(const ProductDist& p, const ProductDist& q, std::uint64_t m) {
  require_same_space(p, q);
  const double cut = m == 0 ? 0.0 : 1.0 / static_cast<double>(m);
  double total = 0.0;
  for (std::size_t i = 0; i < p.dimension(); ++i) {
    for (Symbol j = 0; j < p.alphabet_size(); ++j) {
      const double a = p.component(i)[j];
      const double b = q.component(i)[j];
      if (std::max(a, b) < cut || a + b == 0.0) continue;
      total += (a - b) * (a - b) / (a + b);
    }
  }
  return total;
}

double light_sum(const ProductDist& p, const ProductDist& q, std::uint64_t m) {
  require_same_space(p, q);
  if (m == 0) return 0.0;
  const double cut = 1.0 / static_cast<double>(m);
  double total = 0.0;
  for (std::size_t i = 0; i < p.dimension(); ++i) {
    for (Symbol j = 0; j < p.alphabet_size(); ++j) {
      const double a = p.component(i)[j];
      const double b = q.component(i)[j];
      if (std::max(a, b) >= cut) continue;
      total += (a - b) * (a - b);
    }
  }
  return total;
}

namespace {

bool enumerable(std::size_t n, std::size_t l, std::size_t cap) {
  try {
    sample_space_size(n, l, cap);
    return true;
  } catch (const EnumerationCapExceeded&) {
    return false;
  }
}

void add_hellinger(Certificate& c, double h2) {
  c["hellinger_sq"] = h2;
  c["hellinger"] = std::sqrt(h2);
  c["tv_lower"] = h2;
  c["tv_upper"] = std::min(1.0, std::sqrt(2.0 * h2));
}

Certificate certify_product(const ProductDist& p, const ProductDist& q, std::size_t cap) {
  Certificate c;
  add_hellinger(c, hellinger_sq(p, q));
  c["chisq"] = chisq(p, q);
  c["kl"] = kl(p, q);
  if (enumerable(p.dimension(), p.alphabet_size(), cap)) c["tv"] = tv_exhaustive(p, q, cap);
  return c;
}

Certificate certify_bayesnet(const BayesNet& p, const BayesNet& q, std::size_t cap) {
  require_same_space(p, q);
  double affinity = 0.0;
  double tv_total = 0.0;
  double chi = 0.0;
  double kl_total = 0.0;
  for_each_point(p.dimension(), p.alphabet_size(), cap, [&](std::span<const Symbol> x) {
    const double a = p.pmf(x);
    const double b = q.pmf(x);
    affinity += std::sqrt(a * b);
    tv_total += std::abs(a - b);
    if (a > 0.0) {
      chi += b > 0.0 ? a * a / b : kDivergent;
      kl_total += b > 0.0 ? a * std::log(a / b) : kDivergent;
    }
  });
  Certificate c;
  add_hellinger(c, std::max(0.0, 1.0 - affinity));
  c["tv"] = 0.5 * tv_total;
  c["chisq"] = is_divergent(chi) ? kDivergent : std::max(0.0, chi - 1.0);
  c["kl"] = std::max(0.0, kl_total);
  return c;
}

}  // namespace

Certificate certify(const Instance& instance, std::size_t cap) {
  Certificate c;
  if (const auto* p = std::get_if<ProductDist>(&instance.p)) {
    const auto* q = std::get_if<ProductDist>(&instance.q);
    if (q == nullptr) throw ContractViolation("instance members have different kinds");
    c = certify_product(*p, *q, cap);
    if (instance.family == Family::planted_heavy || instance.family == Family::planted_light) {
      c["heavy_sum"] = heavy_sum(*p, *q, instance.params.m);
      c["light_sum"] = light_sum(*p, *q, instance.params.m);
    }
  } else {
    const auto* q = std::get_if<BayesNet>(&instance.q);
    if (q == nullptr) throw ContractViolation("instance members have different kinds");
    c = certify_bayesnet(std::get<BayesNet>(instance.p), *q, cap);
  }
  if (instance.base) {
    const auto& [bp, bq] = *instance.base;
    double l2 = 0.0;
    for (double v : bp.probs()) l2 += v * v;
    const FDeltaCertificate bounds = f_delta_bounds(bp, bq, instance.params.delta);
    c["base_tv"] = tv(bp, bq);
    c["base_chisq"] = chisq(bp, bq);
    c["base_kl"] = kl(bp, bq);
    c["base_l2sq"] = l2;
    c["tv_lower_bound"] = bounds.tv_lower_bound;
    c["chisq_upper_bound"] = bounds.chisq_upper_bound;
    c["kl_upper_bound"] = bounds.kl_upper_bound;
  }
  return c;
}

Instance generate(Family family, const InstanceParams& params, std::size_t cap) {
  Rng rng(params.seed);
  Instance inst{family, params, ProductDist::uniform(1, 2), ProductDist::uniform(1, 2), std::nullopt,
                {}};
  switch (family) {
    case Family::identical: {
      check_shape(params.n, params.l);
      if (params.uniform) {
        inst.p = ProductDist::uniform(params.n, params.l);
      } else {
        std::vector<Categorical> comps;
        for (std::size_t i = 0; i < params.n; ++i) comps.emplace_back(dirichlet(params.l, 1.0, rng));
        inst.p = ProductDist(std::move(comps));
      }
      inst.q = inst.p;
      break;
    }
    case Family::paninski_mixture: {
      auto [p, q] = gen_paninski_mixture(params.n, params.l, params.epsilon, rng);
      inst.p = std::move(p);
      inst.q = std::move(q);
      break;
    }
    case Family::planted_heavy: {
      auto [p, q] = gen_planted_heavy(params.n, params.l, params.epsilon, params.strength, rng);
      inst.p = std::move(p);
      inst.q = std::move(q);
      break;
    }
    case Family::planted_light: {
      check_gen_epsilon(params.epsilon);
      const double target = light_target_hellinger(params.epsilon, params.n, params.l);
      auto [p, q] = gen_planted_light(params.n, params.l, target, params.strength, params.m, rng);
      inst.p = std::move(p);
      inst.q = std::move(q);
      break;
    }
    case Family::f_delta_pair: {
      if (params.n < 2) throw ContractViolation("f_delta pair needs at least two base items");
      Categorical bp(dirichlet(params.n, 1.0, rng));
      Categorical bq(dirichlet(params.n, 1.0, rng));
      auto [p, q] = gen_f_delta_pair(bp, bq, params.delta);
      inst.p = std::move(p);
      inst.q = std::move(q);
      inst.base = std::make_pair(std::move(bp), std::move(bq));
      break;
    }
    case Family::random_bayesnet_pair: {
      auto [p, q] = gen_random_bayesnet_pair(params.n, params.l, params.d, params.gap,
                                             params.epsilon, params.strength, rng, cap);
      inst.p = std::move(p);
      inst.q = std::move(q);
      break;
    }
  }
  inst.certificate = certify(inst, cap);
  return inst;
}

}  // namespace prodtest
