#pragma once

#include "eqnet/netlist.hpp"
#include "eqnet/rewrite.hpp"
#include "eqnet/term.hpp"

#include <map>
#include <string>
#include <vector>

namespace eqnet {

/// One bidirectional register-motion rule per combinational kind:
/// `(REG (K ?a ... ?z)) <=> (K (REG ?a) ... (REG ?z))`.
/// Throws Error("non-combinational") for REG or unknown kinds.
std::vector<Rewrite> generate_retiming_rules(const std::vector<std::string> &kinds);

/// AND OR XOR NOT MUX.
const std::vector<std::string> &default_retime_kinds();

enum class ExtractorKind { Greedy, Ilp };
ExtractorKind parse_extractor(std::string_view s);

struct RetimeConfig {
  /// Cost of a register. 0 means "derive": one more than the e-node count,
  /// which makes register count dominate the node-count tie-break.
  double register_weight = 0;
  double node_weight = 1;
  RunLimits limits{64, 20000, 60.0};
  ExtractorKind extractor = ExtractorKind::Ilp;
  double ilp_seconds = 60.0;
  /// Also run bool.rules during retiming.
  bool with_bool_rules = false;
};

struct RetimeResult {
  Netlist netlist;
  RunReport report;
  std::size_t registers_before = 0;
  std::size_t registers_after = 0;
  bool extraction_timed_out = false;
};

/// Saturates with retiming rules and extracts the minimum-register circuit.
RetimeResult retime_min_registers(const Netlist &n, const RetimeConfig &cfg = {});

/// One step of directed backward retiming: rewrites the first redex
/// `(REG (K xs...))` found in post-order, shared occurrences included.
/// Returns nullptr when no redex remains.
TermPtr source_retime_step(const TermPtr &t, const std::vector<std::string> &kinds);

struct SourceRetimeResult {
  Netlist netlist;
  std::size_t steps = 0;
};

/// Pushes every register towards the primary inputs until each REG reads a
/// primary input, a constant, or another REG.
SourceRetimeResult source_retime(const Netlist &n,
                                 const std::vector<std::string> &kinds = default_retime_kinds());

/// Per (input bit, output bit): the set of register counts over all paths.
using PathRegisterMap = std::map<std::pair<NetBit, NetBit>, std::vector<std::size_t>>;
PathRegisterMap path_register_counts(const Netlist &n);

std::size_t register_count(const Netlist &n);

} // namespace eqnet
