#pragma once

#include <string>

#include <json.hpp>

#include "prodtest/distributions.hpp"
#include "prodtest/instances.hpp"

namespace prodtest {

using Json = nlohmann::ordered_json;

// Distribution documents:
//   {"kind":"product","n":2,"l":2,"components":[[0.5,0.5],[0.25,0.75]]}
//   {"kind":"bayesnet","n":2,"l":2,"nodes":[
//       {"parents":[],"cpt":{"":[0.5,0.5]}},
//       {"parents":[0],"cpt":{"0":[0.9,0.1],"1":[0.2,0.8]}}]}
// CPT keys are the comma-joined parent values in parent order. Parsing
// renormalizes rows within 1e-9 and throws ContractViolation otherwise.
Json to_json(const ProductDist& p);
Json to_json(const BayesNet& p);
Json to_json(const AnyDist& p);
AnyDist dist_from_json(const Json& doc);

Json to_json(const InstanceParams& params);
InstanceParams params_from_json(const Json& doc, const InstanceParams& defaults = {});

// {"kind":"instance","family":...,"params":{...},"P":{...},"Q":{...},
//  "base":{"P":[...],"Q":[...]} (f_delta only),"certificate":{...}}
// Non-finite certificate values are written as the string "inf".
Json to_json(const Instance& instance);
// The stored certificate is ignored; a fresh one is computed.
Instance instance_from_json(const Json& doc, std::size_t cap = kDefaultEnumerationCap);

Json to_json(const Certificate& c);

Json read_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace prodtest
