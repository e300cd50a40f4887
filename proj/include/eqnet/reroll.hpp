#pragma once

#include "eqnet/netlist.hpp"

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace eqnet {

/// Cells sharing one kind, in canonical instance order.
struct InstanceGroup {
  std::string kind;
  std::vector<std::size_t> cells; ///< indices into Netlist::cells
};

/// Groups of ≥ `min_size` cells of the same kind, sorted by the lowest
/// output bit index of each instance (port-connected outputs first).
std::vector<InstanceGroup> find_groups(const Netlist &n, std::size_t min_size = 3);

/// Pin bit = net[base + stride·i].
struct AffineIndex {
  std::string net;
  long base = 0;
  long stride = 0;

  bool operator==(const AffineIndex &) const = default;
};

/// Loop-carried value: instance i's pin is `source_pin` of instance
/// i − offset. Offset 0 marks the output pin that feeds the chain.
struct ChainIndex {
  std::string source_pin;
  long offset = 1;

  bool operator==(const ChainIndex &) const = default;
};

using PinIndex = std::variant<AffineIndex, ChainIndex>;

struct IndexMap {
  std::map<std::string, PinIndex> pins;
};

/// Returns nullopt when some pin fits neither form.
std::optional<IndexMap> infer_index_maps(const Netlist &n, const InstanceGroup &g);

struct LoopCell {
  std::string kind;
  std::map<std::string, AffineIndex> pins;

  bool operator==(const LoopCell &) const = default;
};

struct Loop {
  std::string var = "i";
  std::size_t range = 0;
  std::vector<LoopCell> body;

  bool operator==(const Loop &) const = default;
};

struct LoopForm {
  std::string name = "top";
  std::vector<Port> ports;
  std::map<std::string, std::size_t> wires; ///< non-port nets
  std::vector<Assign> assigns;
  std::vector<Cell> cells; ///< residual
  std::vector<Loop> loops;
  std::vector<Netlist> definitions;
};

struct RerollConfig {
  std::size_t min_group = 3;
};

struct RerollReport {
  std::vector<std::string> rerolled_kinds;
  std::vector<std::string> unfit_kinds;
};

LoopForm reroll(const Netlist &n, const RerollConfig &cfg = {}, RerollReport *report = nullptr);

/// Instantiates loop bodies. Throws Error("index-out-of-range") naming the
/// loop, the iteration and the pin.
Netlist unroll(const LoopForm &l);

std::string write_loopform(const LoopForm &l);
LoopForm parse_loopform(std::string_view text);

} // namespace eqnet
