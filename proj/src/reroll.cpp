#include "eqnet/reroll.hpp"

#include "eqnet/error.hpp"
#include "eqnet/netlist_io.hpp"
#include "eqnet/sexpr.hpp"

#include <algorithm>
#include <charconv>
#include <set>
#include <sstream>
#include <tuple>

namespace eqnet {

namespace {

std::string lower(std::string s) {
  for (auto &c : s)
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

// "n12" sorts after "n9".
bool natural_less(const std::string &a, const std::string &b) {
  auto split = [](const std::string &s) {
    std::size_t k = s.size();
    while (k > 0 && std::isdigit(static_cast<unsigned char>(s[k - 1])))
      --k;
    long num = k < s.size() ? std::stol(s.substr(k)) : -1;
    return std::make_pair(s.substr(0, k), num);
  };
  auto x = split(a), y = split(b);
  return x != y ? x < y : a < b;
}

std::string unique_name(const std::string &base, const std::map<std::string, std::size_t> &taken) {
  std::string name = base;
  for (std::size_t k = 1; taken.count(name); ++k)
    name = base + "_" + std::to_string(k);
  return name;
}

struct OrderKey {
  int port_rank;
  std::string net;
  std::size_t bit;
  std::string instance;
};

OrderKey order_key(const Netlist &n, const Cell &c, const KindSig &sig) {
  for (const auto &o : sig.outputs) {
    const NetBit &nb = c.pins.at(o);
    if (n.find_port(nb.net))
      return {0, nb.net, nb.bit, c.instance};
  }
  const NetBit &nb = c.pins.at(sig.outputs.at(0));
  return {1, nb.net, nb.bit, c.instance};
}

bool key_less(const OrderKey &a, const OrderKey &b) {
  if (a.port_rank != b.port_rank)
    return a.port_rank < b.port_rank;
  if (a.port_rank == 0) {
    if (a.bit != b.bit)
      return a.bit < b.bit;
    if (a.net != b.net)
      return a.net < b.net;
  } else if (a.net != b.net) {
    return natural_less(a.net, b.net);
  } else if (a.bit != b.bit) {
    return a.bit < b.bit;
  }
  return a.instance < b.instance;
}

std::optional<AffineIndex> fit_affine(const std::vector<NetBit> &bits) {
  if (bits.empty())
    return std::nullopt;
  AffineIndex a{bits[0].net, static_cast<long>(bits[0].bit), 0};
  if (bits.size() > 1)
    a.stride = static_cast<long>(bits[1].bit) - static_cast<long>(bits[0].bit);
  for (std::size_t j = 0; j < bits.size(); ++j)
    if (bits[j].net != a.net ||
        static_cast<long>(bits[j].bit) != a.base + a.stride * static_cast<long>(j))
      return std::nullopt;
  return a;
}

std::vector<NetBit> pin_bits(const Netlist &n, const InstanceGroup &g, const std::string &pin) {
  std::vector<NetBit> bits;
  for (auto idx : g.cells)
    bits.push_back(n.cells[idx].pins.at(pin));
  return bits;
}

// Output pin of the group that drives input `pin` of the next instance.
std::optional<std::string> chain_source(const Netlist &n, const InstanceGroup &g,
                                        const KindSig &sig, const std::string &pin) {
  if (g.cells.size() < 2)
    return std::nullopt;
  for (const auto &out : sig.outputs) {
    bool ok = true;
    for (std::size_t j = 1; j < g.cells.size() && ok; ++j)
      ok = n.cells[g.cells[j]].pins.at(pin) == n.cells[g.cells[j - 1]].pins.at(out);
    if (ok)
      return out;
  }
  return std::nullopt;
}

} // namespace

std::vector<InstanceGroup> find_groups(const Netlist &n, std::size_t min_size) {
  std::map<std::string, std::vector<std::size_t>> by_kind;
  for (std::size_t i = 0; i < n.cells.size(); ++i)
    by_kind[n.cells[i].kind].push_back(i);
  std::vector<InstanceGroup> groups;
  for (auto &[kind, cells] : by_kind) {
    if (cells.size() < std::max<std::size_t>(min_size, 1))
      continue;
    auto sig = n.signature(kind);
    if (!sig || sig->outputs.empty())
      continue;
    std::vector<std::pair<OrderKey, std::size_t>> keyed;
    for (auto idx : cells)
      keyed.emplace_back(order_key(n, n.cells[idx], *sig), idx);
    std::sort(keyed.begin(), keyed.end(),
              [](const auto &a, const auto &b) { return key_less(a.first, b.first); });
    InstanceGroup g{kind, {}};
    for (const auto &[_, idx] : keyed)
      g.cells.push_back(idx);
    groups.push_back(std::move(g));
  }
  return groups;
}

std::optional<IndexMap> infer_index_maps(const Netlist &n, const InstanceGroup &g) {
  auto sig = n.signature(g.kind);
  if (!sig || g.cells.empty())
    return std::nullopt;
  IndexMap m;
  std::set<std::string> chained_outputs;
  for (const auto &pin : sig->inputs) {
    if (auto a = fit_affine(pin_bits(n, g, pin))) {
      m.pins[pin] = *a;
    } else if (auto src = chain_source(n, g, *sig, pin)) {
      if (!chained_outputs.insert(*src).second)
        return std::nullopt; // one chain per output pin
      m.pins[pin] = ChainIndex{*src, 1};
    } else {
      return std::nullopt;
    }
  }
  for (const auto &pin : sig->outputs) {
    if (chained_outputs.count(pin)) {
      m.pins[pin] = ChainIndex{pin, 0};
    } else if (auto a = fit_affine(pin_bits(n, g, pin))) {
      m.pins[pin] = *a;
    } else {
      return std::nullopt;
    }
  }
  return m;
}

// --------------------------------------------------------------- reroll --

namespace {

void replace_bit(Netlist &n, const NetBit &from, const NetBit &to) {
  for (auto &c : n.cells)
    for (auto &[_, nb] : c.pins)
      if (nb == from)
        nb = to;
  for (auto &a : n.assigns) {
    if (a.sink == from)
      a.sink = to;
    if (a.source == from)
      a.source = to;
  }
}

// Gathers the per-instance outputs of `pin` into one vector net when they
// are scattered over single-bit internal wires, so consumers can be fitted.
void pack_outputs(Netlist &n, const InstanceGroup &g, const KindSig &sig) {
  std::set<std::string> chained;
  for (const auto &in : sig.inputs)
    if (auto src = chain_source(n, g, sig, in))
      chained.insert(*src);
  for (const auto &pin : sig.outputs) {
    if (chained.count(pin))
      continue;
    auto bits = pin_bits(n, g, pin);
    if (fit_affine(bits))
      continue;
    std::set<std::string> nets;
    bool packable = true;
    for (const auto &b : bits)
      packable = packable && !n.find_port(b.net) && n.nets.at(b.net) == 1 && nets.insert(b.net).second;
    if (!packable)
      continue;
    std::string wire = unique_name(lower(g.kind) + "_" + lower(pin), n.nets);
    n.nets[wire] = bits.size();
    for (std::size_t j = 0; j < bits.size(); ++j) {
      replace_bit(n, bits[j], {wire, j});
      n.nets.erase(bits[j].net);
    }
  }
}

} // namespace

LoopForm reroll(const Netlist &input, const RerollConfig &cfg, RerollReport *report) {
  Netlist n = input;
  auto groups = find_groups(n, cfg.min_group);
  for (const auto &g : groups)
    pack_outputs(n, g, *n.signature(g.kind));

  std::vector<std::pair<InstanceGroup, IndexMap>> fitted;
  RerollReport rep;
  for (const auto &g : groups) {
    if (auto m = infer_index_maps(n, g)) {
      fitted.emplace_back(g, std::move(*m));
      rep.rerolled_kinds.push_back(g.kind);
    } else {
      rep.unfit_kinds.push_back(g.kind);
    }
  }

  // Who reads each bit, so chain materialisation knows which old nets
  // must stay alive.
  std::map<NetBit, std::size_t> readers;
  for (const auto &c : n.cells) {
    auto sig = n.signature(c.kind);
    for (const auto &in : sig->inputs)
      ++readers[c.pins.at(in)];
  }
  for (const auto &a : n.assigns)
    ++readers[a.source];

  LoopForm lf;
  lf.name = n.name;
  lf.ports = n.ports;
  lf.definitions = n.definitions;
  std::set<std::size_t> covered;
  std::vector<Assign> extra_assigns;
  std::set<std::string> dropped;

  for (const auto &[g, m] : fitted) {
    Loop loop;
    loop.range = g.cells.size();
    LoopCell body{g.kind, {}};
    for (const auto &[pin, idx] : m.pins)
      if (const auto *a = std::get_if<AffineIndex>(&idx))
        body.pins[pin] = *a;
    for (const auto &[pin, idx] : m.pins) {
      const auto *ch = std::get_if<ChainIndex>(&idx);
      if (!ch || ch->offset == 0)
        continue;
      const std::string &src = ch->source_pin;
      std::string wire = unique_name(lower(g.kind) + "_" + lower(src) + "_chain", n.nets);
      n.nets[wire] = loop.range + 1;
      body.pins[pin] = AffineIndex{wire, 0, 1};
      body.pins[src] = AffineIndex{wire, 1, 1};
      extra_assigns.push_back({{wire, 0}, n.cells[g.cells[0]].pins.at(pin)});
      for (std::size_t j = 0; j < loop.range; ++j) {
        NetBit old = n.cells[g.cells[j]].pins.at(src);
        std::size_t uses = readers[old];
        if (j + 1 < loop.range)
          --uses; // the next instance now reads the chain wire
        if (uses == 0 && !n.find_port(old.net) && n.nets.at(old.net) == 1)
          dropped.insert(old.net);
        else
          extra_assigns.push_back({old, {wire, j + 1}});
      }
    }
    loop.body.push_back(std::move(body));
    lf.loops.push_back(std::move(loop));
    covered.insert(g.cells.begin(), g.cells.end());
  }

  for (std::size_t i = 0; i < n.cells.size(); ++i)
    if (!covered.count(i))
      lf.cells.push_back(n.cells[i]);
  lf.assigns = n.assigns;
  lf.assigns.insert(lf.assigns.end(), extra_assigns.begin(), extra_assigns.end());
  for (const auto &[net, w] : n.nets)
    if (!n.find_port(net) && !dropped.count(net))
      lf.wires[net] = w;
  if (report)
    *report = std::move(rep);
  return lf;
}

// --------------------------------------------------------------- unroll --

Netlist unroll(const LoopForm &l) {
  Netlist n;
  n.name = l.name;
  n.ports = l.ports;
  n.definitions = l.definitions;
  for (const auto &p : l.ports)
    n.nets[p.name] = p.width;
  for (const auto &[w, width] : l.wires)
    n.nets[w] = width;
  n.assigns = l.assigns;
  n.cells = l.cells;
  std::set<std::string> names;
  for (const auto &c : n.cells)
    names.insert(c.instance);
  for (std::size_t k = 0; k < l.loops.size(); ++k) {
    const Loop &loop = l.loops[k];
    for (std::size_t i = 0; i < loop.range; ++i) {
      for (std::size_t b = 0; b < loop.body.size(); ++b) {
        const LoopCell &lc = loop.body[b];
        Cell c;
        c.kind = lc.kind;
        std::string base = lower(lc.kind) + "_l" + std::to_string(k) +
                           (loop.body.size() > 1 ? "_" + std::to_string(b) : "") + "_" +
                           std::to_string(i);
        c.instance = base;
        for (std::size_t s = 1; names.count(c.instance); ++s)
          c.instance = base + "_" + std::to_string(s);
        names.insert(c.instance);
        for (const auto &[pin, idx] : lc.pins) {
          long at = idx.base + idx.stride * static_cast<long>(i);
          auto net = n.nets.find(idx.net);
          if (net == n.nets.end())
            throw Error("undeclared-net", "loop " + std::to_string(k) + " pin " + pin +
                                              " uses undeclared net '" + idx.net + "'");
          if (at < 0 || static_cast<std::size_t>(at) >= net->second)
            throw Error("index-out-of-range",
                        "loop " + std::to_string(k) + " " + loop.var + "=" + std::to_string(i) +
                            " pin " + pin + ": " + idx.net + "[" + std::to_string(at) +
                            "] outside width " + std::to_string(net->second));
          c.pins[pin] = {idx.net, static_cast<std::size_t>(at)};
        }
        n.cells.push_back(std::move(c));
      }
    }
  }
  validate(n);
  return n;
}

// --------------------------------------------------------------- format --

namespace {

std::string bit_text(const NetBit &nb) {
  return "(bit " + nb.net + " " + std::to_string(nb.bit) + ")";
}

std::string index_text(const AffineIndex &a, const std::string &var) {
  return "(bit " + a.net + " (+ (* " + std::to_string(a.stride) + " " + var + ") " +
         std::to_string(a.base) + "))";
}

long parse_int(const SExpr &e) {
  if (!e.is_atom())
    syntax_error(e, "expected an integer");
  long v = 0;
  auto [p, ec] = std::from_chars(e.atom.data(), e.atom.data() + e.atom.size(), v);
  if (ec != std::errc{} || p != e.atom.data() + e.atom.size())
    syntax_error(e, "expected an integer, got '" + e.atom + "'");
  return v;
}

std::size_t parse_size(const SExpr &e) {
  long v = parse_int(e);
  if (v < 0)
    syntax_error(e, "expected a non-negative integer");
  return static_cast<std::size_t>(v);
}

NetBit parse_bit(const SExpr &e) {
  if (!e.is_form("bit") || e.items.size() != 3 || !e.items[1].is_atom())
    syntax_error(e, "expected (bit <net> <index>)");
  return {e.items[1].atom, parse_size(e.items[2])};
}

// (+ (* s i) b), (* s i), i, or a constant.
AffineIndex parse_index(const SExpr &e, const std::string &net, const std::string &var) {
  AffineIndex a{net, 0, 0};
  auto term = [&](const SExpr &t) {
    if (t.is_atom(var)) {
      a.stride += 1;
    } else if (t.is_form("*") && t.items.size() == 3 && t.items[2].is_atom(var)) {
      a.stride += parse_int(t.items[1]);
    } else if (t.is_atom()) {
      a.base += parse_int(t);
    } else {
      syntax_error(t, "index terms are <int>, " + var + ", or (* <int> " + var + ")");
    }
  };
  if (e.is_form("+")) {
    if (e.items.size() < 3)
      syntax_error(e, "(+ ...) needs at least two terms");
    for (std::size_t k = 1; k < e.items.size(); ++k)
      term(e.items[k]);
  } else {
    term(e);
  }
  return a;
}

} // namespace

std::string write_loopform(const LoopForm &l) {
  std::ostringstream out;
  out << "(loop-netlist " << l.name << "\n  (ports";
  for (const auto &p : l.ports)
    out << " (" << (p.direction == Direction::Input ? "input" : "output") << " " << p.name << " "
        << p.width << ")";
  out << ")\n  (wires";
  for (const auto &[w, width] : l.wires)
    out << " (" << w << " " << width << ")";
  out << ")";
  for (const auto &a : l.assigns)
    out << "\n  (assign " << bit_text(a.sink) << " " << bit_text(a.source) << ")";
  for (const auto &c : l.cells) {
    out << "\n  (cell " << c.kind << " " << c.instance;
    for (const auto &[pin, nb] : c.pins)
      out << " (" << pin << " " << bit_text(nb) << ")";
    out << ")";
  }
  for (const auto &loop : l.loops) {
    out << "\n  (for " << loop.var << " 0 " << loop.range;
    for (const auto &lc : loop.body) {
      out << "\n    (cell " << lc.kind;
      for (const auto &[pin, idx] : lc.pins)
        out << " (" << pin << " " << index_text(idx, loop.var) << ")";
      out << ")";
    }
    out << ")";
  }
  out << ")\n";
  for (const auto &d : l.definitions)
    out << write_netlist(d, NetlistFormat::Sexpr);
  return out.str();
}

LoopForm parse_loopform(std::string_view text) {
  auto forms = parse_sexprs(text);
  if (forms.empty() || !forms[0].is_form("loop-netlist") || forms[0].items.size() < 2 ||
      !forms[0].items[1].is_atom())
    throw Error("syntax", "1:1: expected (loop-netlist <name> ...)");
  const SExpr &top = forms[0];
  LoopForm l;
  l.name = top.items[1].atom;
  for (std::size_t i = 2; i < top.items.size(); ++i) {
    const SExpr &s = top.items[i];
    if (s.is_form("ports")) {
      for (std::size_t j = 1; j < s.items.size(); ++j) {
        const SExpr &p = s.items[j];
        if (!p.is_list || p.items.size() != 3 || !p.items[1].is_atom() ||
            !(p.items[0].is_atom("input") || p.items[0].is_atom("output")))
          syntax_error(p, "expected (input|output <name> <width>)");
        l.ports.push_back({p.items[1].atom,
                           p.items[0].is_atom("input") ? Direction::Input : Direction::Output,
                           parse_size(p.items[2])});
      }
    } else if (s.is_form("wires")) {
      for (std::size_t j = 1; j < s.items.size(); ++j) {
        const SExpr &w = s.items[j];
        if (!w.is_list || w.items.size() != 2 || !w.items[0].is_atom())
          syntax_error(w, "expected (<wire> <width>)");
        l.wires[w.items[0].atom] = parse_size(w.items[1]);
      }
    } else if (s.is_form("assign")) {
      if (s.items.size() != 3)
        syntax_error(s, "expected (assign (bit ...) (bit ...))");
      l.assigns.push_back({parse_bit(s.items[1]), parse_bit(s.items[2])});
    } else if (s.is_form("cell")) {
      if (s.items.size() < 3 || !s.items[1].is_atom() || !s.items[2].is_atom())
        syntax_error(s, "expected (cell <KIND> <instance> ...)");
      Cell c{s.items[2].atom, s.items[1].atom, {}};
      for (std::size_t j = 3; j < s.items.size(); ++j) {
        const SExpr &p = s.items[j];
        if (!p.is_list || p.items.size() != 2 || !p.items[0].is_atom())
          syntax_error(p, "expected (<pin> (bit ...))");
        c.pins[p.items[0].atom] = parse_bit(p.items[1]);
      }
      l.cells.push_back(std::move(c));
    } else if (s.is_form("for")) {
      if (s.items.size() < 4 || !s.items[1].is_atom())
        syntax_error(s, "expected (for <var> 0 <n> (cell ...)...)");
      Loop loop;
      loop.var = s.items[1].atom;
      if (parse_int(s.items[2]) != 0)
        syntax_error(s.items[2], "loops start at 0");
      loop.range = parse_size(s.items[3]);
      for (std::size_t j = 4; j < s.items.size(); ++j) {
        const SExpr &c = s.items[j];
        if (!c.is_form("cell") || c.items.size() < 2 || !c.items[1].is_atom())
          syntax_error(c, "expected (cell <KIND> (<pin> (bit <net> <index>))...)");
        LoopCell lc{c.items[1].atom, {}};
        for (std::size_t k = 2; k < c.items.size(); ++k) {
          const SExpr &p = c.items[k];
          if (!p.is_list || p.items.size() != 2 || !p.items[0].is_atom() ||
              !p.items[1].is_form("bit") || p.items[1].items.size() != 3 ||
              !p.items[1].items[1].is_atom())
            syntax_error(p, "expected (<pin> (bit <net> <index>))");
          lc.pins[p.items[0].atom] =
              parse_index(p.items[1].items[2], p.items[1].items[1].atom, loop.var);
        }
        loop.body.push_back(std::move(lc));
      }
      l.loops.push_back(std::move(loop));
    } else {
      syntax_error(s, "unexpected form " + s.to_string());
    }
  }
  for (std::size_t i = 1; i < forms.size(); ++i) {
    if (!forms[i].is_form("module"))
      syntax_error(forms[i], "expected a (module ...) definition");
    l.definitions.push_back(parse_netlist(forms[i].to_string(), NetlistFormat::Sexpr));
  }
  return l;
}

} // namespace eqnet
