#include "eqnet/convert.hpp"

#include "eqnet/error.hpp"

#include <set>
#include <unordered_map>

namespace eqnet {

Interface interface_of(const Netlist &n) { return {n.name, n.ports, n.definitions}; }

// ------------------------------------------------------------- to_terms --

namespace {

struct Driver {
  enum class Kind { Input, Cell, Assign } kind = Kind::Input;
  std::size_t index = 0; // cell or assign index
  std::string pin;
};

class TermBuilder {
public:
  explicit TermBuilder(const Netlist &n) : n_(n) {
    for (const auto &p : n.ports)
      if (p.direction == Direction::Input)
        for (std::size_t b = 0; b < p.width; ++b)
          drivers_[{p.name, b}] = {Driver::Kind::Input, 0, {}};
    for (std::size_t i = 0; i < n.cells.size(); ++i) {
      auto sig = n.signature(n.cells[i].kind);
      if (!sig)
        throw Error("unknown-cell-kind", "cell '" + n.cells[i].instance + "' has unknown kind '" +
                                             n.cells[i].kind + "'");
      sigs_.push_back(*sig);
      for (const auto &out : sig->outputs)
        drivers_[n.cells[i].pins.at(out)] = {Driver::Kind::Cell, i, out};
    }
    for (std::size_t i = 0; i < n.assigns.size(); ++i)
      drivers_[n.assigns[i].sink] = {Driver::Kind::Assign, i, {}};
  }

  TermPtr root() {
    std::vector<TermPtr> outs;
    for (const auto &p : n_.ports)
      if (p.direction == Direction::Output)
        for (std::size_t b = 0; b < p.width; ++b)
          outs.push_back(bit_term({p.name, b}));
    return table_.intern(Symbol("outputs"), std::move(outs));
  }

private:
  TermPtr bit_term(const NetBit &nb) {
    if (auto it = memo_.find(nb); it != memo_.end())
      return it->second;
    if (!on_path_.insert(nb).second)
      throw Error("cyclic-netlist", "cycle through " + to_string(nb) +
                                        " (feedback is not supported)");
    auto it = drivers_.find(nb);
    if (it == drivers_.end())
      throw Error("undriven", to_string(nb) + " has no driver");
    const Driver &d = it->second;
    TermPtr t;
    switch (d.kind) {
    case Driver::Kind::Input:
      t = table_.intern(Symbol(input_symbol(nb.net, nb.bit)), {});
      break;
    case Driver::Kind::Assign:
      t = bit_term(n_.assigns[d.index].source);
      break;
    case Driver::Kind::Cell:
      t = cell_output(d.index, d.pin);
      break;
    }
    on_path_.erase(nb);
    memo_.emplace(nb, t);
    return t;
  }

  TermPtr cell_output(std::size_t idx, const std::string &pin) {
    const Cell &c = n_.cells[idx];
    const KindSig &sig = sigs_[idx];
    std::vector<TermPtr> args;
    for (const auto &in : sig.inputs)
      args.push_back(bit_term(c.pins.at(in)));
    switch (sig.cls) {
    case KindClass::Gate:
    case KindClass::Constant:
    case KindClass::Register:
      return table_.intern(Symbol(c.kind), std::move(args));
    case KindClass::Learned: {
      if (sig.outputs.size() != 1)
        throw Error("arity", "learned kind " + c.kind + " must have exactly one output");
      args.insert(args.begin(), table_.intern(Symbol(c.kind), {}));
      return table_.intern(Symbol("apply"), std::move(args));
    }
    case KindClass::Component: {
      auto inner = table_.intern(Symbol(c.kind), std::move(args));
      return table_.intern(Symbol(proj_name(*sig.output_index(pin))), {inner});
    }
    }
    throw InvariantError("unreachable kind class");
  }

  const Netlist &n_;
  std::vector<KindSig> sigs_;
  std::map<NetBit, Driver> drivers_;
  std::map<NetBit, TermPtr> memo_;
  std::set<NetBit> on_path_;
  TermTable table_;
};

} // namespace

TermPtr to_terms(const Netlist &n) { return TermBuilder(n).root(); }

// ----------------------------------------------------------- from_terms --

namespace {

class NetlistEmitter {
public:
  explicit NetlistEmitter(const Interface &iface) : iface_(iface) {
    n_.name = iface.name;
    n_.ports = iface.ports;
    n_.definitions = iface.definitions;
    for (const auto &p : iface.ports) {
      n_.nets[p.name] = p.width;
      reserved_.insert(p.name);
    }
    for (const auto &d : iface.definitions)
      defs_.emplace(d.name, definition_signature(d));
  }

  Netlist emit(const TermPtr &raw) {
    TermPtr t = table_.intern(raw);
    if (t->op().str() != "outputs")
      throw Error("unknown-operator", "root must be 'outputs', got '" + t->op().str() + "'");
    std::vector<NetBit> sinks;
    for (const auto &p : n_.ports)
      if (p.direction == Direction::Output)
        for (std::size_t b = 0; b < p.width; ++b)
          sinks.push_back({p.name, b});
    if (sinks.size() != t->children().size())
      throw Error("arity", "outputs has " + std::to_string(t->children().size()) +
                               " children but the interface has " + std::to_string(sinks.size()) +
                               " output bits");
    std::vector<NetBit> sources;
    for (const auto &c : t->children())
      sources.push_back(signal(c));

    // Cell outputs feeding an output port drive the port bit directly; the
    // first port claims the signal, later ones alias it with an assign.
    std::map<NetBit, NetBit> rename;
    for (std::size_t i = 0; i < sinks.size(); ++i) {
      const NetBit &src = sources[i];
      if (auto it = rename.find(src); it != rename.end()) {
        n_.assigns.push_back({sinks[i], it->second});
      } else if (internal_.count(src.net)) {
        rename.emplace(src, sinks[i]);
      } else {
        n_.assigns.push_back({sinks[i], src});
      }
    }
    for (auto &c : n_.cells)
      for (auto &[pin, nb] : c.pins)
        if (auto it = rename.find(nb); it != rename.end())
          nb = it->second;
    for (const auto &[from, _] : rename)
      n_.nets.erase(from.net);
    return std::move(n_);
  }

private:
  NetBit fresh_net() {
    std::string name;
    do {
      name = "n" + std::to_string(net_counter_++);
    } while (reserved_.count(name));
    n_.nets[name] = 1;
    internal_.insert(name);
    return {name, 0};
  }

  std::string fresh_instance(const std::string &kind) {
    std::string base;
    for (char ch : kind)
      base += static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    return base + "_" + std::to_string(cell_counter_++);
  }

  std::optional<KindSig> signature(const std::string &kind) const {
    if (const KindSig *k = builtin_kind(kind))
      return *k;
    if (auto it = defs_.find(kind); it != defs_.end())
      return it->second;
    return std::nullopt;
  }

  void check_arity(const TermPtr &t, std::size_t expected) const {
    if (t->children().size() != expected)
      throw Error("arity", "'" + t->op().str() + "' expects " + std::to_string(expected) +
                               " children, got " + std::to_string(t->children().size()));
  }

  NetBit signal(const TermPtr &t) {
    if (auto it = signals_.find(t.get()); it != signals_.end())
      return it->second;
    NetBit out = make_signal(t);
    signals_.emplace(t.get(), out);
    return out;
  }

  NetBit make_signal(const TermPtr &t) {
    const std::string &op = t->op().str();
    if (auto in = parse_input_symbol(op)) {
      const Port *p = nullptr;
      for (const auto &q : n_.ports)
        if (q.name == in->port)
          p = &q;
      if (!p || p->direction != Direction::Input || in->bit >= p->width)
        throw Error("unknown-operator", "'" + op + "' is not an input bit of the interface");
      check_arity(t, 0);
      return {in->port, in->bit};
    }
    if (auto k = proj_index(op)) {
      check_arity(t, 1);
      const TermPtr &comp = t->children()[0];
      auto sig = signature(comp->op().str());
      if (!sig || sig->cls != KindClass::Component)
        throw Error("unknown-operator", "'" + op + "' applied to non-component '" +
                                            comp->op().str() + "'");
      if (*k >= sig->outputs.size())
        throw Error("arity", "'" + op + "' out of range for " + sig->name + " with " +
                                 std::to_string(sig->outputs.size()) + " outputs");
      return component(comp, *sig).at(*k);
    }
    if (op == "apply") {
      if (t->children().empty())
        throw Error("arity", "'apply' needs a definition name");
      const std::string &def = t->children()[0]->op().str();
      auto sig = signature(def);
      if (!sig || sig->cls != KindClass::Learned || !t->children()[0]->is_leaf())
        throw Error("unknown-operator", "'apply' of undefined abstraction '" + def + "'");
      if (sig->outputs.size() != 1)
        throw Error("arity", "abstraction '" + def + "' must have one output");
      check_arity(t, sig->inputs.size() + 1);
      Cell c{fresh_instance(def), def, {}};
      for (std::size_t i = 0; i < sig->inputs.size(); ++i)
        c.pins[sig->inputs[i]] = signal(t->children()[i + 1]);
      NetBit y = fresh_net();
      c.pins[sig->outputs[0]] = y;
      n_.cells.push_back(std::move(c));
      return y;
    }
    auto sig = signature(op);
    if (!sig)
      throw Error("unknown-operator", "unknown operator '" + op + "'");
    if (sig->cls == KindClass::Component || sig->cls == KindClass::Learned)
      throw Error("unknown-operator", "'" + op + "' must appear under " +
                                          (sig->cls == KindClass::Component ? "proj<k>" : "apply"));
    check_arity(t, sig->inputs.size());
    Cell c{fresh_instance(op), op, {}};
    for (std::size_t i = 0; i < sig->inputs.size(); ++i)
      c.pins[sig->inputs[i]] = signal(t->children()[i]);
    NetBit y = fresh_net();
    c.pins[sig->outputs[0]] = y;
    n_.cells.push_back(std::move(c));
    return y;
  }

  const std::vector<NetBit> &component(const TermPtr &t, const KindSig &sig) {
    if (auto it = components_.find(t.get()); it != components_.end())
      return it->second;
    check_arity(t, sig.inputs.size());
    Cell c{fresh_instance(sig.name), sig.name, {}};
    for (std::size_t i = 0; i < sig.inputs.size(); ++i)
      c.pins[sig.inputs[i]] = signal(t->children()[i]);
    std::vector<NetBit> outs;
    for (const auto &o : sig.outputs) {
      outs.push_back(fresh_net());
      c.pins[o] = outs.back();
    }
    n_.cells.push_back(std::move(c));
    return components_.emplace(t.get(), std::move(outs)).first->second;
  }

  const Interface &iface_;
  Netlist n_;
  TermTable table_;
  std::map<std::string, KindSig> defs_;
  std::set<std::string> reserved_;
  std::set<std::string> internal_;
  std::unordered_map<const Term *, NetBit> signals_;
  std::unordered_map<const Term *, std::vector<NetBit>> components_;
  std::size_t net_counter_ = 0;
  std::size_t cell_counter_ = 0;
};

} // namespace

Netlist from_terms(const TermPtr &t, const Interface &iface) {
  Netlist n = NetlistEmitter(iface).emit(t);
  validate(n);
  return n;
}

Netlist from_terms(const TermPtr &t) {
  Interface iface;
  std::vector<std::string> order;
  std::map<std::string, std::size_t> widths;
  std::set<const Term *> seen;
  std::vector<const Term *> stack{t.get()};
  // Depth-first, left to right, so ports appear in first-use order.
  std::vector<const Term *> pre;
  while (!stack.empty()) {
    const Term *cur = stack.back();
    stack.pop_back();
    if (!seen.insert(cur).second)
      continue;
    if (auto in = parse_input_symbol(cur->op().str())) {
      if (!widths.count(in->port))
        order.push_back(in->port);
      widths[in->port] = std::max(widths[in->port], in->bit + 1);
    }
    for (auto it = cur->children().rbegin(); it != cur->children().rend(); ++it)
      stack.push_back(it->get());
  }
  for (const auto &name : order)
    iface.ports.push_back({name, Direction::Input, widths[name]});
  if (t->op().str() != "outputs")
    throw Error("unknown-operator", "root must be 'outputs', got '" + t->op().str() + "'");
  for (std::size_t i = 0; i < t->children().size(); ++i)
    iface.ports.push_back({"out" + std::to_string(i), Direction::Output, 1});
  return from_terms(t, iface);
}

} // namespace eqnet
