#include "eqnet/netlist.hpp"

#include "eqnet/error.hpp"

#include <algorithm>
#include <set>

namespace eqnet {

std::string to_string(const NetBit &nb) { return nb.net + "[" + std::to_string(nb.bit) + "]"; }

const Port *Netlist::find_port(const std::string &port) const {
  for (const auto &p : ports)
    if (p.name == port)
      return &p;
  return nullptr;
}

const Netlist *Netlist::find_definition(const std::string &def) const {
  for (const auto &d : definitions)
    if (d.name == def)
      return &d;
  return nullptr;
}

KindSig definition_signature(const Netlist &def) {
  KindSig sig;
  sig.name = def.name;
  sig.cls = is_learned_name(def.name) ? KindClass::Learned : KindClass::Component;
  for (const auto &p : def.ports)
    (p.direction == Direction::Input ? sig.inputs : sig.outputs).push_back(p.name);
  return sig;
}

std::optional<KindSig> Netlist::signature(const std::string &kind) const {
  if (const KindSig *k = builtin_kind(kind))
    return *k;
  if (const Netlist *d = find_definition(kind))
    return definition_signature(*d);
  return std::nullopt;
}

std::size_t Netlist::count_kind(const std::string &kind) const {
  return static_cast<std::size_t>(
      std::count_if(cells.begin(), cells.end(), [&](const Cell &c) { return c.kind == kind; }));
}

std::size_t Netlist::input_bit_count() const {
  std::size_t n = 0;
  for (const auto &p : ports)
    if (p.direction == Direction::Input)
      n += p.width;
  return n;
}

bool same_netlist(const Netlist &a, const Netlist &b) {
  if (a.name != b.name || a.ports != b.ports || a.nets != b.nets)
    return false;
  auto by_instance = [](std::vector<Cell> cs) {
    std::sort(cs.begin(), cs.end(),
              [](const Cell &x, const Cell &y) { return x.instance < y.instance; });
    return cs;
  };
  auto by_sink = [](std::vector<Assign> as) {
    std::sort(as.begin(), as.end(), [](const Assign &x, const Assign &y) {
      return std::tie(x.sink, x.source) < std::tie(y.sink, y.source);
    });
    return as;
  };
  if (by_instance(a.cells) != by_instance(b.cells) || by_sink(a.assigns) != by_sink(b.assigns))
    return false;
  if (a.definitions.size() != b.definitions.size())
    return false;
  for (const auto &d : a.definitions) {
    const Netlist *e = b.find_definition(d.name);
    if (!e || !same_netlist(d, *e))
      return false;
  }
  return true;
}

namespace {

void check_bit(const Netlist &n, const NetBit &nb, const std::string &context) {
  auto it = n.nets.find(nb.net);
  if (it == n.nets.end())
    throw Error("undeclared-net", "net '" + nb.net + "' used by " + context + " is not declared");
  if (nb.bit >= it->second)
    throw Error("bit-range", to_string(nb) + " used by " + context + " exceeds width " +
                                 std::to_string(it->second));
}

} // namespace

void validate(const Netlist &n) {
  std::set<std::string> names;
  for (const auto &p : n.ports) {
    if (!names.insert(p.name).second)
      throw Error("duplicate-name", "port '" + p.name + "' declared twice");
    if (p.width == 0)
      throw Error("bit-range", "port '" + p.name + "' has zero width");
    auto it = n.nets.find(p.name);
    if (it == n.nets.end() || it->second != p.width)
      throw Error("undeclared-net", "port '" + p.name + "' needs a net of width " +
                                        std::to_string(p.width));
  }
  for (const auto &[net, width] : n.nets)
    if (width == 0)
      throw Error("bit-range", "net '" + net + "' has zero width");

  std::set<std::string> defs;
  for (const auto &d : n.definitions) {
    if (builtin_kind(d.name))
      throw Error("name-collision", "definition '" + d.name + "' shadows a built-in kind");
    if (!defs.insert(d.name).second)
      throw Error("duplicate-name", "definition '" + d.name + "' declared twice");
    validate(d);
    for (const auto &c : d.cells)
      if (c.kind == "REG")
        throw Error("bad-definition", "definition '" + d.name + "' contains a register");
  }

  // driver per bit
  std::map<NetBit, std::string> driver;
  auto drive = [&](const NetBit &nb, const std::string &who) {
    auto [it, fresh] = driver.emplace(nb, who);
    if (!fresh)
      throw Error("multiple-driver",
                  to_string(nb) + " driven by both " + it->second + " and " + who);
  };
  for (const auto &p : n.ports)
    if (p.direction == Direction::Input)
      for (std::size_t b = 0; b < p.width; ++b)
        drive({p.name, b}, "input port " + p.name);

  std::set<std::string> instances;
  for (const auto &c : n.cells) {
    if (!instances.insert(c.instance).second)
      throw Error("duplicate-name", "cell instance '" + c.instance + "' declared twice");
    auto sig = n.signature(c.kind);
    if (!sig)
      throw Error("unknown-cell-kind", "cell '" + c.instance + "' has unknown kind '" + c.kind + "'");
    if (c.pins.size() != sig->inputs.size() + sig->outputs.size())
      throw Error("bad-pin", "cell '" + c.instance + "' of kind " + c.kind + " has " +
                                 std::to_string(c.pins.size()) + " pins, expected " +
                                 std::to_string(sig->inputs.size() + sig->outputs.size()));
    for (const auto &[pin, nb] : c.pins) {
      if (!sig->input_index(pin) && !sig->output_index(pin))
        throw Error("bad-pin", "cell '" + c.instance + "' has no pin '" + pin + "' (kind " +
                                   c.kind + ")");
      check_bit(n, nb, "cell " + c.instance);
    }
    for (const auto &out : sig->outputs)
      drive(c.pins.at(out), "cell " + c.instance + "." + out);
  }
  for (const auto &a : n.assigns) {
    check_bit(n, a.sink, "assign");
    check_bit(n, a.source, "assign");
    drive(a.sink, "assign from " + to_string(a.source));
  }
  for (const auto &[net, width] : n.nets)
    for (std::size_t b = 0; b < width; ++b)
      if (!driver.count({net, b}))
        throw Error("undriven", to_string(NetBit{net, b}) + " has no driver");
  for (const auto &p : n.ports)
    if (p.direction == Direction::Output)
      for (std::size_t b = 0; b < p.width; ++b)
        if (driver.at({p.name, b}).rfind("input port", 0) == 0)
          throw Error("multiple-driver", "output " + to_string(NetBit{p.name, b}) +
                                             " is driven as an input");

  // Combinational acyclicity: edges bit → bit through non-register cells
  // and assigns.
  std::map<NetBit, std::vector<NetBit>> succ;
  for (const auto &c : n.cells) {
    if (c.kind == "REG")
      continue;
    auto sig = n.signature(c.kind);
    for (const auto &in : sig->inputs)
      for (const auto &out : sig->outputs)
        succ[c.pins.at(in)].push_back(c.pins.at(out));
  }
  for (const auto &a : n.assigns)
    succ[a.source].push_back(a.sink);
  std::map<NetBit, int> state; // 1 on stack, 2 done
  for (const auto &[start, _] : succ) {
    if (state[start])
      continue;
    std::vector<std::pair<NetBit, std::size_t>> stack{{start, 0}};
    state[start] = 1;
    while (!stack.empty()) {
      auto &[node, idx] = stack.back();
      auto it = succ.find(node);
      if (it == succ.end() || idx >= it->second.size()) {
        state[node] = 2;
        stack.pop_back();
        continue;
      }
      NetBit next = it->second[idx++];
      int s = state[next];
      if (s == 1)
        throw Error("cyclic-netlist", "combinational cycle through " + to_string(next));
      if (s == 0) {
        state[next] = 1;
        stack.emplace_back(next, 0);
      }
    }
  }
}

NetlistBuilder::NetlistBuilder(std::string name) { n_.name = std::move(name); }

NetlistBuilder &NetlistBuilder::input(const std::string &name, std::size_t width) {
  n_.ports.push_back({name, Direction::Input, width});
  n_.nets[name] = width;
  return *this;
}

NetlistBuilder &NetlistBuilder::output(const std::string &name, std::size_t width) {
  n_.ports.push_back({name, Direction::Output, width});
  n_.nets[name] = width;
  return *this;
}

NetlistBuilder &NetlistBuilder::wire(const std::string &name, std::size_t width) {
  n_.nets[name] = width;
  return *this;
}

NetlistBuilder &NetlistBuilder::cell(const std::string &kind, const std::string &instance,
                                     std::map<std::string, NetBit> pins) {
  n_.cells.push_back({instance, kind, std::move(pins)});
  return *this;
}

NetlistBuilder &NetlistBuilder::assign(NetBit sink, NetBit source) {
  n_.assigns.push_back({std::move(sink), std::move(source)});
  return *this;
}

NetlistBuilder &NetlistBuilder::definition(Netlist def) {
  n_.definitions.push_back(std::move(def));
  return *this;
}

NetBit NetlistBuilder::fresh(const std::string &hint) {
  std::string name;
  do {
    name = hint + std::to_string(counter_++);
  } while (n_.nets.count(name));
  n_.nets[name] = 1;
  return {name, 0};
}

std::string NetlistBuilder::fresh_instance(const std::string &hint) {
  std::set<std::string> used;
  for (const auto &c : n_.cells)
    used.insert(c.instance);
  std::string name;
  do {
    name = hint + std::to_string(counter_++);
  } while (used.count(name));
  return name;
}

Netlist NetlistBuilder::build() const {
  validate(n_);
  return n_;
}

} // namespace eqnet
