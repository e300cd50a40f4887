#pragma once

#include "eqnet/extract.hpp"
#include "eqnet/netlist.hpp"
#include "eqnet/retime.hpp"
#include "eqnet/rewrite.hpp"

#include <map>
#include <string>
#include <vector>

namespace eqnet {

/// A library component: named inputs and an ordered list of outputs, each
/// defined by a pattern over the inputs (as `?<input>` variables).
struct LibraryComponent {
  std::string name;
  std::vector<std::string> inputs;
  std::vector<std::pair<std::string, Pattern>> outputs;
};

/// `(component HalfAdder (inputs a b) (output S (XOR a b)) (output C (AND a b)))`
/// forms. Every component is checked at load time: output patterns may only
/// use declared inputs, and for built-in names the native simulation must
/// match the patterns' truth table. Errors: "syntax", "bad-component".
std::vector<LibraryComponent> parse_library(std::string_view text);
std::string write_library(const std::vector<LibraryComponent> &lib);
void check_component(const LibraryComponent &c);

/// HalfAdder, FullAdder, Mux2.
const std::vector<LibraryComponent> &standard_library();

/// One rule per output: `pattern_k => (proj<k> (C ?i0 ... ?im))`. Learned
/// single-output components (`def_*`) use `(apply def_k ...)` instead.
std::vector<Rewrite> component_rules(const LibraryComponent &c);

/// The shipped Boolean rule set.
const std::vector<Rewrite> &bool_rules();
std::string_view bool_rules_text();

/// gate = 1, proj = 0, HalfAdder = 1.5, FullAdder = 3.75, Mux2 = 2.5,
/// inputs/constants/outputs = 0.
CostModel identify_cost_model(const std::vector<LibraryComponent> &lib);

struct IdentifyConfig {
  RunLimits limits{8, 20000, 30.0};
  ExtractorKind extractor = ExtractorKind::Ilp;
  double ilp_seconds = 30.0;
  bool use_bool_rules = true;
  std::optional<CostModel> costs;
};

struct ComponentInstance {
  std::string instance;
  std::string kind;
  std::map<std::string, NetBit> pins;
};

struct NearMiss {
  std::string component;
  std::size_t output = 0;
  EClassId eclass = 0;
};

struct IdentifyReport {
  RunReport run;
  std::vector<ComponentInstance> instances;
  std::vector<NearMiss> near_misses;
  double cost_before = 0;
  double cost_after = 0;
  bool extraction_timed_out = false;

  std::string to_json() const;
};

struct IdentifyResult {
  Netlist netlist;
  IdentifyReport report;
};

IdentifyResult identify(const Netlist &n, const std::vector<LibraryComponent> &lib,
                        const IdentifyConfig &cfg = {});

/// Definition module for a non-builtin component (ports = inputs, outputs).
Netlist component_definition(const LibraryComponent &c);

} // namespace eqnet
