#include "eqnet/learn.hpp"

#include "eqnet/convert.hpp"
#include "eqnet/error.hpp"
#include "eqnet/extract.hpp"
#include "eqnet/identify.hpp"
#include "eqnet/kinds.hpp"

#include <json.hpp>

#include <algorithm>
#include <functional>
#include <set>
#include <unordered_map>
#include <unordered_set>

namespace eqnet {

// ---------------------------------------------------------- anti-unify --

Pattern anti_unify(const TermPtr &a, const TermPtr &b) {
  std::map<std::pair<std::string, std::string>, std::string> vars;
  std::function<Pattern(const TermPtr &, const TermPtr &)> lgg = [&](const TermPtr &x,
                                                                   const TermPtr &y) -> Pattern {
    if (x->op() == y->op() && x->children().size() == y->children().size()) {
      std::vector<Pattern> kids;
      for (std::size_t i = 0; i < x->children().size(); ++i)
        kids.push_back(lgg(x->children()[i], y->children()[i]));
      return Pattern::node(x->op(), std::move(kids));
    }
    auto key = std::make_pair(to_string(x), to_string(y));
    auto it = vars.find(key);
    if (it == vars.end())
      it = vars.emplace(key, "?p" + std::to_string(vars.size())).first;
    return Pattern::var(it->second);
  };
  return lgg(a, b);
}

namespace {

Pattern rename_vars(const Pattern &p, std::map<std::string, std::string> &names) {
  if (p.is_var()) {
    auto it = names.find(p.var_name());
    if (it == names.end())
      it = names.emplace(p.var_name(), "?p" + std::to_string(names.size())).first;
    return Pattern::var(it->second);
  }
  std::vector<Pattern> kids;
  for (const auto &c : p.children())
    kids.push_back(rename_vars(c, names));
  return Pattern::node(p.op(), std::move(kids));
}

// Concrete input bits become parameters too: an abstraction is a module and
// may not refer to the ports of the design it was learned from.
Pattern lift_inputs(const Pattern &p, std::map<std::string, std::string> &names) {
  if (p.is_var())
    return p;
  if (parse_input_symbol(p.op().str())) {
    auto it = names.find(p.op().str());
    if (it == names.end())
      it = names.emplace(p.op().str(), "?in" + std::to_string(names.size())).first;
    return Pattern::var(it->second);
  }
  std::vector<Pattern> kids;
  for (const auto &c : p.children())
    kids.push_back(lift_inputs(c, names));
  return Pattern::node(p.op(), std::move(kids));
}

bool abstractable(const Pattern &p) {
  if (p.is_var())
    return true;
  const std::string &op = p.op().str();
  if (op == "REG" || op == "outputs" || op == "apply" || is_learned_name(op))
    return false;
  return std::all_of(p.children().begin(), p.children().end(), abstractable);
}

} // namespace

Pattern canonical_pattern(const Pattern &p) {
  std::map<std::string, std::string> names;
  return rename_vars(p, names);
}

// ------------------------------------------------------------- discover --

std::vector<Abstraction> discover(const std::vector<Netlist> &corpus, const LearnConfig &cfg) {
  TermTable table;
  EGraph g;
  std::vector<TermPtr> subterms;
  std::unordered_set<const Term *> seen;
  std::function<void(const TermPtr &)> collect = [&](const TermPtr &t) {
    if (!seen.insert(t.get()).second)
      return;
    for (const auto &c : t->children())
      collect(c);
    if (!t->is_leaf() && t->op().str() != "outputs")
      subterms.push_back(t);
  };
  for (const auto &n : corpus) {
    TermPtr t = table.intern(to_terms(n));
    g.add_term(t);
    collect(t);
  }
  g.rebuild();

  // Pairs only make sense between subterms with the same head operator.
  std::map<Symbol, std::vector<TermPtr>> by_op;
  for (const auto &t : subterms)
    by_op[t->op()].push_back(t);
  std::size_t pairs = 0;
  for (const auto &[_, v] : by_op)
    pairs += v.size() * (v.size() - 1) / 2;
  if (pairs > cfg.max_pairs) {
    for (auto &[_, v] : by_op) {
      std::stable_sort(v.begin(), v.end(), [](const TermPtr &a, const TermPtr &b) {
        return term_dag_size(a) > term_dag_size(b);
      });
      // Evenly spaced picks over the size order keep both small cells and
      // deep cones in the beam.
      if (v.size() > cfg.beam_size && cfg.beam_size > 0) {
        std::vector<TermPtr> keep;
        for (std::size_t k = 0; k < cfg.beam_size; ++k)
          keep.push_back(v[k * (v.size() - 1) / std::max<std::size_t>(cfg.beam_size - 1, 1)]);
        v = std::move(keep);
      }
    }
  }

  std::map<std::string, Pattern> candidates;
  for (const auto &[_, v] : by_op) {
    for (std::size_t i = 0; i < v.size(); ++i) {
      for (std::size_t j = i + 1; j < v.size(); ++j) {
        std::map<std::string, std::string> lifted;
        Pattern p = canonical_pattern(lift_inputs(anti_unify(v[i], v[j]), lifted));
        if (p.size() < 2 || p.variables().size() > cfg.max_arity || !abstractable(p))
          continue;
        candidates.emplace(p.to_string(), std::move(p));
      }
    }
  }

  std::vector<Abstraction> ranked;
  for (auto &[text, body] : candidates) {
    std::set<EClassId> roots;
    for (const auto &m : ematch(g, body))
      roots.insert(m.eclass);
    if (roots.size() < cfg.min_matches)
      continue;
    Abstraction a;
    a.body = body;
    a.arity = body.variables().size();
    a.matches = roots.size();
    a.score = static_cast<double>(body.size() - 1) * static_cast<double>(a.matches - 1);
    ranked.push_back(std::move(a));
  }
  std::stable_sort(ranked.begin(), ranked.end(), [](const Abstraction &a, const Abstraction &b) {
    if (a.score != b.score)
      return a.score > b.score;
    return a.body.to_string() < b.body.to_string();
  });
  for (std::size_t i = 0; i < ranked.size(); ++i)
    ranked[i].name = "def_" + std::to_string(i);
  return ranked;
}

// ------------------------------------------------------------- abstract --

namespace {

LibraryComponent as_component(const Abstraction &a) {
  LibraryComponent c;
  c.name = a.name;
  for (std::size_t i = 0; i < a.arity; ++i)
    c.inputs.push_back("p" + std::to_string(i));
  c.outputs.emplace_back("Y", canonical_pattern(a.body));
  return c;
}

} // namespace

Netlist abstraction_definition(const Abstraction &a) {
  if (!is_learned_name(a.name))
    throw Error("bad-component", "abstraction names start with def_: '" + a.name + "'");
  return component_definition(as_component(a));
}

std::vector<Netlist> abstract(const std::vector<Netlist> &corpus, const Abstraction &a) {
  for (const auto &n : corpus) {
    if (n.find_definition(a.name) || builtin_kind(a.name))
      throw Error("name-collision", "kind '" + a.name + "' already exists in '" + n.name + "'");
  }
  LibraryComponent comp = as_component(a);
  auto rules = component_rules(comp);
  CostModel cm(1.0);
  cm.set("input", 0).set("const", 0).set("outputs", 0).set("proj", 0);
  cm.set("apply", 0.5).set("def", 0);

  std::vector<Netlist> out;
  for (const auto &n : corpus) {
    EGraph g;
    EClassId root = g.add_term(to_terms(n));
    run(g, rules, {4, 200000, 60.0});
    root = g.find(root);
    if (g.classes_with(Symbol("apply")).empty()) {
      out.push_back(n);
      continue;
    }
    Selection s = extract_ilp(g, {root}, cm);
    TermPtr t = selection_term(s, root);
    Interface iface = interface_of(n);
    bool used = false;
    std::unordered_set<const Term *> seen;
    std::function<void(const Term *)> walk = [&](const Term *x) {
      if (!seen.insert(x).second)
        return;
      used = used || x->op().str() == "apply";
      for (const auto &c : x->children())
        walk(c.get());
    };
    walk(t.get());
    if (used)
      iface.definitions.push_back(abstraction_definition(a));
    out.push_back(from_terms(t, iface));
  }
  return out;
}

// --------------------------------------------------------------- inline --

Netlist inline_definitions(const Netlist &n) {
  // Body terms of every definition, keyed by name.
  std::map<std::string, std::pair<KindSig, TermPtr>> bodies;
  for (const auto &d : n.definitions)
    bodies.emplace(d.name, std::make_pair(definition_signature(d), to_terms(inline_definitions(d))));

  TermTable table;
  std::unordered_map<const Term *, TermPtr> memo;
  std::function<TermPtr(const TermPtr &)> expand;
  auto substitute = [&](const TermPtr &body, const KindSig &sig, const std::vector<TermPtr> &args) {
    std::unordered_map<const Term *, TermPtr> local;
    std::function<TermPtr(const TermPtr &)> sub = [&](const TermPtr &x) -> TermPtr {
      if (auto it = local.find(x.get()); it != local.end())
        return it->second;
      TermPtr r;
      if (auto in = parse_input_symbol(x->op().str())) {
        auto idx = sig.input_index(in->port);
        if (!idx)
          throw InvariantError("definition input '" + in->port + "' has no pin");
        r = args[*idx];
      } else {
        std::vector<TermPtr> kids;
        for (const auto &c : x->children())
          kids.push_back(sub(c));
        r = table.intern(x->op(), std::move(kids));
      }
      local.emplace(x.get(), r);
      return r;
    };
    return sub(body);
  };
  expand = [&](const TermPtr &x) -> TermPtr {
    if (auto it = memo.find(x.get()); it != memo.end())
      return it->second;
    TermPtr r;
    const std::string &op = x->op().str();
    auto pk = proj_index(op);
    if (op == "apply" && bodies.count(x->children()[0]->op().str())) {
      const auto &[sig, body] = bodies.at(x->children()[0]->op().str());
      std::vector<TermPtr> args;
      for (std::size_t i = 1; i < x->children().size(); ++i)
        args.push_back(expand(x->children()[i]));
      r = substitute(body->children().at(0), sig, args);
    } else if (pk && bodies.count(x->children()[0]->op().str())) {
      const TermPtr &comp = x->children()[0];
      const auto &[sig, body] = bodies.at(comp->op().str());
      std::vector<TermPtr> args;
      for (const auto &c : comp->children())
        args.push_back(expand(c));
      r = substitute(body->children().at(*pk), sig, args);
    } else {
      std::vector<TermPtr> kids;
      for (const auto &c : x->children())
        kids.push_back(expand(c));
      r = table.intern(x->op(), std::move(kids));
    }
    memo.emplace(x.get(), r);
    return r;
  };

  Interface iface = interface_of(n);
  iface.definitions.clear();
  return from_terms(expand(to_terms(n)), iface);
}

std::string learn_report_json(const std::vector<Abstraction> &ranked) {
  nlohmann::ordered_json j = nlohmann::ordered_json::array();
  for (const auto &a : ranked)
    j.push_back({{"name", a.name},
                 {"score", a.score},
                 {"matches", a.matches},
                 {"arity", a.arity},
                 {"size", a.body.size()},
                 {"body", a.body.to_string()}});
  return j.dump(2);
}

} // namespace eqnet
