#include "prodtest/serialization.hpp"

#include <fmt/format.h>
#include <fmt/ranges.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "prodtest/errors.hpp"

namespace prodtest {

namespace {

Json probs_json(const Categorical& c) {
  Json a = Json::array();
  for (double v : c.probs()) a.push_back(v);
  return a;
}

template <class T>
T require(const Json& doc, const char* key) {
  if (!doc.is_object() || !doc.contains(key)) {
    throw ContractViolation(fmt::format("JSON document is missing \"{}\"", key));
  }
  try {
    return doc.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ContractViolation(fmt::format("JSON field \"{}\": {}", key, e.what()));
  }
}

Categorical categorical_from_json(const Json& a, std::size_t l) {
  if (!a.is_array()) throw ContractViolation("probability vector must be a JSON array");
  std::vector<double> probs;
  probs.reserve(a.size());
  for (const auto& v : a) {
    if (!v.is_number()) throw ContractViolation("probability entries must be numbers");
    probs.push_back(v.get<double>());
  }
  if (probs.size() != l) {
    throw ContractViolation(
        fmt::format("probability vector has {} entries, expected l = {}", probs.size(), l));
  }
  return Categorical(std::move(probs));
}

std::string config_key(std::size_t row, std::size_t parents, std::size_t l) {
  std::vector<std::size_t> digits(parents);
  for (std::size_t k = parents; k-- > 0;) {
    digits[k] = row % l;
    row /= l;
  }
  return fmt::format("{}", fmt::join(digits, ","));
}

Json number_or_inf(double v) {
  if (std::isfinite(v)) return v;
  return v > 0 ? "inf" : "-inf";
}

}  // namespace

Json to_json(const ProductDist& p) {
  Json doc;
  doc["kind"] = "product";
  doc["n"] = p.dimension();
  doc["l"] = p.alphabet_size();
  Json comps = Json::array();
  for (const auto& c : p.components()) comps.push_back(probs_json(c));
  doc["components"] = std::move(comps);
  return doc;
}

Json to_json(const BayesNet& p) {
  Json doc;
  doc["kind"] = "bayesnet";
  doc["n"] = p.dimension();
  doc["l"] = p.alphabet_size();
  Json nodes = Json::array();
  for (std::size_t v = 0; v < p.dimension(); ++v) {
    Json node;
    const auto parents = p.dag().parents(v);
    node["parents"] = std::vector<std::size_t>(parents.begin(), parents.end());
    Json cpt = Json::object();
    for (std::size_t r = 0; r < p.rows(v); ++r) {
      cpt[config_key(r, parents.size(), p.alphabet_size())] = probs_json(p.cpt(v, r));
    }
    node["cpt"] = std::move(cpt);
    nodes.push_back(std::move(node));
  }
  doc["nodes"] = std::move(nodes);
  return doc;
}

Json to_json(const AnyDist& p) {
  return std::visit([](const auto& d) { return to_json(d); }, p);
}

AnyDist dist_from_json(const Json& doc) {
  const auto kind = require<std::string>(doc, "kind");
  if (kind == "product") {
    const auto comps = require<Json>(doc, "components");
    if (!comps.is_array() || comps.empty()) {
      throw ContractViolation("product distribution needs a non-empty components array");
    }
    const std::size_t l = doc.contains("l") ? require<std::size_t>(doc, "l") : comps.front().size();
    if (doc.contains("n") && require<std::size_t>(doc, "n") != comps.size()) {
      throw ContractViolation("product distribution: n differs from the number of components");
    }
    std::vector<Categorical> components;
    for (const auto& c : comps) components.push_back(categorical_from_json(c, l));
    return ProductDist(std::move(components));
  }
  if (kind == "bayesnet") {
    const auto nodes = require<Json>(doc, "nodes");
    if (!nodes.is_array() || nodes.empty()) {
      throw ContractViolation("bayes net needs a non-empty nodes array");
    }
    const std::size_t l = require<std::size_t>(doc, "l");
    if (doc.contains("n") && require<std::size_t>(doc, "n") != nodes.size()) {
      throw ContractViolation("bayes net: n differs from the number of nodes");
    }
    std::vector<std::vector<std::size_t>> parents;
    for (const auto& node : nodes) parents.push_back(require<std::vector<std::size_t>>(node, "parents"));
    Dag dag(parents);
    std::vector<std::vector<Categorical>> cpts(nodes.size());
    for (std::size_t v = 0; v < nodes.size(); ++v) {
      const auto cpt = require<Json>(nodes[v], "cpt");
      const std::size_t rows = checked_power(l, parents[v].size());
      if (!cpt.is_object() || cpt.size() != rows) {
        throw ContractViolation(fmt::format("node {}: cpt must have {} rows", v, rows));
      }
      for (std::size_t r = 0; r < rows; ++r) {
        const std::string key = config_key(r, parents[v].size(), l);
        if (!cpt.contains(key)) {
          throw ContractViolation(fmt::format("node {}: cpt row \"{}\" is missing", v, key));
        }
        cpts[v].push_back(categorical_from_json(cpt.at(key), l));
      }
    }
    return BayesNet(std::move(dag), l, std::move(cpts));
  }
  throw ContractViolation(fmt::format("unknown distribution kind \"{}\"", kind));
}

Json to_json(const InstanceParams& params) {
  Json doc;
  doc["n"] = params.n;
  doc["l"] = params.l;
  doc["eps"] = params.epsilon;
  doc["seed"] = params.seed;
  doc["strength"] = params.strength;
  doc["m"] = params.m;
  doc["delta"] = params.delta;
  doc["d"] = params.d;
  doc["gap"] = std::string(to_string(params.gap));
  doc["uniform"] = params.uniform;
  return doc;
}

InstanceParams params_from_json(const Json& doc, const InstanceParams& defaults) {
  if (!doc.is_object()) throw ContractViolation("instance params must be a JSON object");
  InstanceParams p = defaults;
  if (doc.contains("n")) p.n = require<std::size_t>(doc, "n");
  if (doc.contains("l")) p.l = require<std::size_t>(doc, "l");
  if (doc.contains("eps")) p.epsilon = require<double>(doc, "eps");
  if (doc.contains("seed")) p.seed = require<std::uint64_t>(doc, "seed");
  if (doc.contains("strength")) p.strength = require<double>(doc, "strength");
  if (doc.contains("m")) p.m = require<std::uint64_t>(doc, "m");
  if (doc.contains("delta")) p.delta = require<double>(doc, "delta");
  if (doc.contains("d")) p.d = require<std::size_t>(doc, "d");
  if (doc.contains("gap")) {
    const auto g = parse_gap(require<std::string>(doc, "gap"));
    if (!g) throw ContractViolation("gap must be \"close\" or \"far\"");
    p.gap = *g;
  }
  if (doc.contains("uniform")) p.uniform = require<bool>(doc, "uniform");
  return p;
}

Json to_json(const Certificate& c) {
  Json doc = Json::object();
  for (const auto& [key, value] : c) doc[key] = number_or_inf(value);
  return doc;
}

Json to_json(const Instance& instance) {
  Json doc;
  doc["kind"] = "instance";
  doc["family"] = std::string(to_string(instance.family));
  doc["params"] = to_json(instance.params);
  doc["P"] = to_json(instance.p);
  doc["Q"] = to_json(instance.q);
  if (instance.base) {
    doc["base"] = {{"P", probs_json(instance.base->first)}, {"Q", probs_json(instance.base->second)}};
  }
  doc["certificate"] = to_json(instance.certificate);
  return doc;
}

Instance instance_from_json(const Json& doc, std::size_t cap) {
  if (require<std::string>(doc, "kind") != "instance") {
    throw ContractViolation("document is not an instance");
  }
  const auto family = parse_family(require<std::string>(doc, "family"));
  if (!family) throw ContractViolation("unknown instance family");
  Instance inst{*family,
                params_from_json(require<Json>(doc, "params")),
                dist_from_json(require<Json>(doc, "P")),
                dist_from_json(require<Json>(doc, "Q")),
                std::nullopt,
                {}};
  if (inst.p.index() != inst.q.index()) {
    throw ContractViolation("instance members have different kinds");
  }
  if (doc.contains("base")) {
    const auto base = require<Json>(doc, "base");
    const auto bp = require<Json>(base, "P");
    const auto bq = require<Json>(base, "Q");
    if (!bp.is_array()) throw ContractViolation("base.P must be an array");
    inst.base = std::make_pair(categorical_from_json(bp, bp.size()),
                               categorical_from_json(bq, bp.size()));
  }
  inst.certificate = certify(inst, cap);
  return inst;
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ContractViolation(fmt::format("cannot open {}", path));
  std::stringstream buffer;
  buffer << in.rdbuf();
  try {
    return Json::parse(buffer.str());
  } catch (const nlohmann::json::parse_error& e) {
    throw ContractViolation(fmt::format("{}: invalid JSON: {}", path, e.what()));
  }
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ContractViolation(fmt::format("cannot write {}", path));
  out << text;
  if (!out) throw ContractViolation(fmt::format("failed writing {}", path));
}

}  // namespace prodtest
