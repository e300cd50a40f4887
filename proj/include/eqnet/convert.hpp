#pragma once

#include "eqnet/netlist.hpp"
#include "eqnet/term.hpp"

namespace eqnet {

/// Port list and definitions needed to rebuild a netlist from a term.
struct Interface {
  std::string name = "top";
  std::vector<Port> ports;
  std::vector<Netlist> definitions;
};

Interface interface_of(const Netlist &n);

/// Converts a feed-forward netlist into a single `outputs` term whose
/// children are the output-port bits in port order. Fan-out becomes shared
/// subterms. Logic that reaches no output is dropped. Throws
/// Error("cyclic-netlist") on any cycle, including through registers.
TermPtr to_terms(const Netlist &n);

/// Rebuilds a netlist. Structurally identical subterms share one cell.
/// Throws Error("unknown-operator") / Error("arity").
Netlist from_terms(const TermPtr &t, const Interface &iface);

/// Variant that infers the interface: inputs from `input:` leaves (width =
/// highest bit + 1, in order of first appearance), one single-bit output
/// `out<i>` per root child.
Netlist from_terms(const TermPtr &t);

} // namespace eqnet
