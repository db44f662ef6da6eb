#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "prodtest/distances.hpp"
#include "prodtest/distributions.hpp"
#include "prodtest/rng.hpp"

namespace prodtest {

enum class Family {
  identical,
  paninski_mixture,
  planted_heavy,
  planted_light,
  f_delta_pair,
  random_bayesnet_pair,
};

std::string_view to_string(Family f);
// Accepts the names above plus the short forms "paninski", "heavy", "light",
// "fdelta" and "bayesnet".
std::optional<Family> parse_family(std::string_view name);

enum class Gap { close, far };

std::string_view to_string(Gap g);
std::optional<Gap> parse_gap(std::string_view name);

// Generator parameters. Fields a family does not use are ignored.
struct InstanceParams {
  std::size_t n = 10;
  std::size_t l = 2;
  double epsilon = 0.4;
  std::uint64_t seed = 0;
  // Multiplier on the planted perturbation; 0 yields an identical pair.
  double strength = 1.0;
  // Sample rate that defines heavy (max(p,q) >= 1/m) and light cells. 0
  // treats every cell as heavy.
  std::uint64_t m = 0;
  // F_delta rate.
  double delta = 1.0 / 3.0;
  // Bayes net in-degree bound and gap side.
  std::size_t d = 1;
  Gap gap = Gap::far;
  // identical family: uniform pair instead of a random product.
  bool uniform = false;

  friend bool operator==(const InstanceParams&, const InstanceParams&) = default;
};

using AnyDist = std::variant<ProductDist, BayesNet>;

// Exact distances between the two members, keyed by name. Always computed
// from the distributions themselves:
//   hellinger_sq, hellinger, chisq, kl     (products: by factorization)
//   tv                                     (when Sigma^n is enumerable)
//   tv_lower = H^2, tv_upper = sqrt(2) H   (always; bounds on tv)
//   heavy_sum, light_sum                   (products; split at 1/m)
//   base_* and *_bound                     (f_delta pairs)
// chisq and kl may be +infinity.
using Certificate = std::map<std::string, double>;

struct Instance {
  Family family = Family::identical;
  InstanceParams params;
  AnyDist p;
  AnyDist q;
  // Unstructured base pair of an f_delta instance.
  std::optional<std::pair<Categorical, Categorical>> base;
  Certificate certificate;
};

// Dirichlet(alpha, ..., alpha) draw of length k.
std::vector<double> dirichlet(std::size_t k, double alpha, Rng& rng);

// Uniform P; Q_i assigns (1 +- eps/sqrt(n))/l to each consecutive symbol
// pair (2t, 2t+1), the order chosen by an independent fair bit per pair and
// coordinate.
std::pair<ProductDist, ProductDist> gen_paninski_mixture(std::size_t n, std::size_t l,
                                                         double epsilon, Rng& rng);

// Heavy: P_i(j) = (1 + s_ij a)/l, Q_i(j) = (1 - s_ij a)/l with signs +-1 in
// random order on each consecutive pair (an odd last symbol is left alone) and
// a = strength * eps * sqrt(l / (n l')), l' the number of paired symbols.
// Then sum_ij (p-q)^2/(p+q) = 2 strength^2 eps^2.
std::pair<ProductDist, ProductDist> gen_planted_heavy(std::size_t n, std::size_t l, double epsilon,
                                                      double strength, Rng& rng);

// Light: in every coordinate the symbols 1..l-1 carry mass b (1 +- s beta)
// with max < 1/m, and symbol 0 absorbs the remainder, so the discrepancy sits
// on light cells. Sized so sum over light cells of (p-q)^2 equals
// strength^2 * target. Throws InfeasibleInstance when no such b, beta exist.
std::pair<ProductDist, ProductDist> gen_planted_light(std::size_t n, std::size_t l, double target,
                                                      double strength, std::uint64_t m, Rng& rng);

// Light-part targets: eps^4/(25 n l) for Hellinger, eps^2/(n l) for dTV.
double light_target_hellinger(double epsilon, std::size_t n, std::size_t l);
double light_target_tv(double epsilon, std::size_t n, std::size_t l);

struct FDeltaCertificate {
  double tv_lower_bound = 0.0;     // delta e^{-delta} dTV(P,Q)
  double chisq_upper_bound = 0.0;  // exp(4 delta chi^2(P,Q)) - 1
  double kl_upper_bound = 0.0;     // (delta + delta^2/2) KL(P,Q) + (3 delta^2 / 2) ||P||_2^2
};

FDeltaCertificate f_delta_bounds(const Categorical& p, const Categorical& q, double delta);

std::pair<ProductDist, ProductDist> gen_f_delta_pair(const Categorical& p, const Categorical& q,
                                                     double delta);

// Random degree-<=d DAG (random topological order, each node picking up to d
// parents among its predecessors), Dirichlet(1) CPTs for P, and Q obtained by
// mixing every row of P with a random row at a common rate t. t is searched so
// that the enumerated H(P,Q) lands in (eps, 1.5 eps] (far) or (0, eps/2]
// (close); strength 0 returns Q = P. Up to 100 attempts, then
// InfeasibleInstance.
std::pair<BayesNet, BayesNet> gen_random_bayesnet_pair(std::size_t n, std::size_t l, std::size_t d,
                                                       Gap gap, double epsilon, double strength,
                                                       Rng& rng,
                                                       std::size_t cap = kDefaultEnumerationCap);

// Builds the instance of `family` from `params` (seeded by params.seed) and
// certifies it.
Instance generate(Family family, const InstanceParams& params,
                  std::size_t cap = kDefaultEnumerationCap);

// Recomputes the certificate of `instance` from its distributions.
Certificate certify(const Instance& instance, std::size_t cap = kDefaultEnumerationCap);

// sum over cells with max(p,q) >= 1/m of (p-q)^2/(p+q), and over the other
// cells of (p-q)^2. m = 0 makes every cell heavy.
double heavy_sum(const ProductDist& p, const ProductDist& q, std::uint64_t m);
double light_sum(const ProductDist& p, const ProductDist& q, std::uint64_t m);

}  // namespace prodtest
