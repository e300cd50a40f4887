#include "eqnet/retime.hpp"

#include "eqnet/convert.hpp"
#include "eqnet/error.hpp"
#include "eqnet/extract.hpp"
#include "eqnet/identify.hpp"
#include "eqnet/kinds.hpp"

#include <algorithm>
#include <functional>
#include <set>
#include <unordered_map>

namespace eqnet {

std::vector<Rewrite> generate_retiming_rules(const std::vector<std::string> &kinds) {
  std::vector<Rewrite> rules;
  for (const auto &k : kinds) {
    const KindSig *sig = builtin_kind(k);
    if (!sig || sig->cls != KindClass::Gate)
      throw Error("non-combinational", "cannot retime across '" + k + "'");
    std::vector<Pattern> plain, delayed;
    for (std::size_t i = 0; i < sig->inputs.size(); ++i) {
      auto v = Pattern::var("?" + std::string(1, static_cast<char>('a' + i)));
      plain.push_back(v);
      delayed.push_back(Pattern::node("REG", {v}));
    }
    std::string name = "retime-";
    for (char c : k)
      name += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    rules.push_back({name, Pattern::node("REG", {Pattern::node(k, plain)}),
                     Pattern::node(k, delayed), true});
  }
  return rules;
}

const std::vector<std::string> &default_retime_kinds() {
  static const std::vector<std::string> kinds{"AND", "OR", "XOR", "NOT", "MUX"};
  return kinds;
}

ExtractorKind parse_extractor(std::string_view s) {
  if (s == "greedy")
    return ExtractorKind::Greedy;
  if (s == "ilp")
    return ExtractorKind::Ilp;
  throw Error("usage", "unknown extractor '" + std::string(s) + "' (expected greedy or ilp)");
}

std::size_t register_count(const Netlist &n) { return n.count_kind("REG"); }

RetimeResult retime_min_registers(const Netlist &n, const RetimeConfig &cfg) {
  TermPtr t = to_terms(n);
  EGraph g;
  EClassId root = g.add_term(t);
  g.rebuild();

  auto rules = generate_retiming_rules(default_retime_kinds());
  if (cfg.with_bool_rules)
    rules.insert(rules.end(), bool_rules().begin(), bool_rules().end());

  RetimeResult out;
  out.report = run(g, rules, cfg.limits);
  root = g.find(root);

  double reg = cfg.register_weight > 0 ? cfg.register_weight
                                       : static_cast<double>(g.node_count() + 1) * cfg.node_weight;
  CostModel cm(cfg.node_weight);
  cm.set("REG", reg).set("input", 0).set("const", 0).set("outputs", 0).set("proj", 0);

  Selection s = cfg.extractor == ExtractorKind::Ilp
                    ? extract_ilp(g, {root}, cm, {cfg.ilp_seconds, true})
                    : extract_greedy(g, {root}, cm);
  validate_selection(g, s, cm);
  out.extraction_timed_out = s.timed_out;
  out.netlist = from_terms(selection_term(s, root), interface_of(n));
  out.registers_before = register_count(n);
  out.registers_after = register_count(out.netlist);
  return out;
}

// ------------------------------------------------------- source retiming --

TermPtr source_retime_step(const TermPtr &t, const std::vector<std::string> &kinds) {
  std::set<Symbol> movable;
  for (const auto &k : kinds)
    movable.insert(Symbol(k));
  const Symbol reg("REG");

  // Post-order search for the first redex.
  const Term *redex = nullptr;
  std::set<const Term *> seen;
  std::function<void(const Term *)> find = [&](const Term *x) {
    if (redex || !seen.insert(x).second)
      return;
    for (const auto &c : x->children())
      find(c.get());
    if (!redex && x->op() == reg && x->children().size() == 1 &&
        movable.count(x->children()[0]->op()))
      redex = x;
  };
  find(t.get());
  if (!redex)
    return nullptr;

  const Term *inner = redex->children()[0].get();
  TermTable table;
  std::unordered_map<const Term *, TermPtr> memo;
  std::function<TermPtr(const TermPtr &)> rebuild = [&](const TermPtr &x) -> TermPtr {
    if (auto it = memo.find(x.get()); it != memo.end())
      return it->second;
    TermPtr r;
    if (x.get() == redex) {
      std::vector<TermPtr> args;
      for (const auto &c : inner->children())
        args.push_back(table.intern(reg, {rebuild(c)}));
      r = table.intern(inner->op(), std::move(args));
    } else {
      std::vector<TermPtr> kids;
      for (const auto &c : x->children())
        kids.push_back(rebuild(c));
      r = table.intern(x->op(), std::move(kids));
    }
    memo.emplace(x.get(), r);
    return r;
  };
  return rebuild(t);
}

SourceRetimeResult source_retime(const Netlist &n, const std::vector<std::string> &kinds) {
  generate_retiming_rules(kinds); // validates the kind list
  TermPtr t = to_terms(n);
  SourceRetimeResult out;
  while (TermPtr next = source_retime_step(t, kinds)) {
    t = next;
    ++out.steps;
  }
  out.netlist = from_terms(t, interface_of(n));
  return out;
}

// ------------------------------------------------- path register counts --

namespace {

class PathCounter {
public:
  using Counts = std::map<NetBit, std::set<std::size_t>>;

  explicit PathCounter(const Netlist &n) : n_(n) {
    for (std::size_t i = 0; i < n.cells.size(); ++i) {
      auto sig = n.signature(n.cells[i].kind);
      if (!sig)
        throw Error("unknown-cell-kind", n.cells[i].kind);
      for (const auto &o : sig->outputs)
        cell_of_[n.cells[i].pins.at(o)] = i;
      sigs_.push_back(*sig);
    }
    for (const auto &a : n.assigns)
      assign_of_[a.sink] = a.source;
    for (const auto &p : n.ports)
      if (p.direction == Direction::Input)
        for (std::size_t b = 0; b < p.width; ++b)
          inputs_.insert({p.name, b});
  }

  const Counts &counts(const NetBit &nb) {
    if (auto it = memo_.find(nb); it != memo_.end())
      return it->second;
    if (!active_.insert(nb).second)
      throw Error("cyclic-netlist", "cycle through " + to_string(nb));
    Counts c;
    if (inputs_.count(nb)) {
      c[nb].insert(0);
    } else if (auto a = assign_of_.find(nb); a != assign_of_.end()) {
      c = counts(a->second);
    } else if (auto ci = cell_of_.find(nb); ci != cell_of_.end()) {
      const Cell &cell = n_.cells[ci->second];
      std::size_t delay = cell.kind == "REG" ? 1 : 0;
      for (const auto &in : sigs_[ci->second].inputs)
        for (const auto &[src, set] : counts(cell.pins.at(in)))
          for (auto k : set)
            c[src].insert(k + delay);
    }
    active_.erase(nb);
    return memo_.emplace(nb, std::move(c)).first->second;
  }

private:
  const Netlist &n_;
  std::vector<KindSig> sigs_;
  std::map<NetBit, std::size_t> cell_of_;
  std::map<NetBit, NetBit> assign_of_;
  std::set<NetBit> inputs_;
  std::map<NetBit, Counts> memo_;
  std::set<NetBit> active_;
};

} // namespace

PathRegisterMap path_register_counts(const Netlist &n) {
  PathCounter pc(n);
  PathRegisterMap out;
  for (const auto &p : n.ports) {
    if (p.direction != Direction::Output)
      continue;
    for (std::size_t b = 0; b < p.width; ++b) {
      NetBit ob{p.name, b};
      for (const auto &[src, set] : pc.counts(ob))
        out[{src, ob}] = std::vector<std::size_t>(set.begin(), set.end());
    }
  }
  return out;
}

} // namespace eqnet
