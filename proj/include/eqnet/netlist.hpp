#pragma once

#include "eqnet/kinds.hpp"

#include <compare>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace eqnet {

enum class Direction { Input, Output };

struct Port {
  std::string name;
  Direction direction = Direction::Input;
  std::size_t width = 1;

  bool operator==(const Port &) const = default;
};

struct NetBit {
  std::string net;
  std::size_t bit = 0;

  auto operator<=>(const NetBit &) const = default;
  bool operator==(const NetBit &) const = default;
};

std::string to_string(const NetBit &nb);

struct Cell {
  std::string instance;
  std::string kind;
  std::map<std::string, NetBit> pins;

  bool operator==(const Cell &) const = default;
};

struct Assign {
  NetBit sink;
  NetBit source;

  bool operator==(const Assign &) const = default;
};

/// Gate-level module. Every port is also a net of the same name and width.
/// `definitions` holds sub-modules that give meaning to non-builtin cell
/// kinds (learned `def_<k>` abstractions or user library components).
struct Netlist {
  std::string name = "top";
  std::vector<Port> ports;
  std::map<std::string, std::size_t> nets;
  std::vector<Cell> cells;
  std::vector<Assign> assigns;
  std::vector<Netlist> definitions;

  const Port *find_port(const std::string &name) const;
  const Netlist *find_definition(const std::string &name) const;
  /// Signature of `kind` as seen from this module: built-ins first, then
  /// definitions.
  std::optional<KindSig> signature(const std::string &kind) const;

  std::size_t count_kind(const std::string &kind) const;
  std::size_t input_bit_count() const;
};

/// Structural equality up to ordering of cells, assigns, and definitions.
bool same_netlist(const Netlist &a, const Netlist &b);

/// Checks every Netlist invariant: pins match kind signatures, bits within
/// net widths, exactly one driver per net bit, acyclic outside registers,
/// unique names. Throws Error with kinds "undeclared-net", "unknown-cell-kind",
/// "bad-pin", "bit-range", "multiple-driver", "undriven", "cyclic-netlist",
/// "duplicate-name".
void validate(const Netlist &n);

/// Signature of a definition module when used as a cell kind.
KindSig definition_signature(const Netlist &def);

/// Small helper for constructing netlists in code.
class NetlistBuilder {
public:
  explicit NetlistBuilder(std::string name = "top");

  NetlistBuilder &input(const std::string &name, std::size_t width = 1);
  NetlistBuilder &output(const std::string &name, std::size_t width = 1);
  NetlistBuilder &wire(const std::string &name, std::size_t width = 1);
  NetlistBuilder &cell(const std::string &kind, const std::string &instance,
                       std::map<std::string, NetBit> pins);
  NetlistBuilder &assign(NetBit sink, NetBit source);
  NetlistBuilder &definition(Netlist def);

  /// Fresh single-bit wire with a unique name derived from `hint`.
  NetBit fresh(const std::string &hint = "w");
  std::string fresh_instance(const std::string &hint = "g");

  Netlist &netlist() { return n_; }
  Netlist build() const;

private:
  Netlist n_;
  std::size_t counter_ = 0;
};

inline NetBit bit(std::string net, std::size_t b = 0) { return NetBit{std::move(net), b}; }

} // namespace eqnet
