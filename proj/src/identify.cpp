#include "eqnet/identify.hpp"

#include "eqnet/convert.hpp"
#include "eqnet/error.hpp"
#include "eqnet/kinds.hpp"
#include "eqnet/oracle.hpp"
#include "eqnet/sexpr.hpp"

#include <json.hpp>

#include <algorithm>
#include <functional>
#include <set>
#include <unordered_set>

namespace eqnet {

// -------------------------------------------------------------- library --

namespace {

Pattern output_pattern(const SExpr &e, const std::vector<std::string> &inputs,
                       const std::string &component) {
  if (e.is_atom()) {
    if (std::find(inputs.begin(), inputs.end(), e.atom) != inputs.end())
      return Pattern::var("?" + e.atom);
    if (e.atom == "CONST0" || e.atom == "CONST1")
      return Pattern::node(e.atom);
    throw Error("bad-component", component + ": '" + e.atom + "' at " + e.where() +
                                     " is not a declared input");
  }
  if (e.items.empty() || !e.items[0].is_atom())
    syntax_error(e, "expected operator at head of list");
  std::vector<Pattern> kids;
  for (std::size_t i = 1; i < e.items.size(); ++i)
    kids.push_back(output_pattern(e.items[i], inputs, component));
  return Pattern::node(e.items[0].atom, std::move(kids));
}

std::string library_text(const Pattern &p) {
  if (p.is_var())
    return p.var_name().substr(1);
  if (p.children().empty())
    return p.op().str();
  std::string s = "(" + p.op().str();
  for (const auto &c : p.children())
    s += " " + library_text(c);
  return s + ")";
}

bool is_ident(const std::string &s) {
  if (s.empty() || s[0] == '?' || s[0] == '(' || s[0] == ')')
    return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
  });
}

TermPtr output_term(const LibraryComponent &c, std::size_t k) {
  std::map<std::string, TermPtr> subst;
  for (const auto &in : c.inputs)
    subst["?" + in] = input_leaf(in, 0);
  return pattern_to_term(c.outputs[k].second, subst);
}

} // namespace

Netlist component_definition(const LibraryComponent &c) {
  Interface iface;
  iface.name = c.name;
  for (const auto &in : c.inputs)
    iface.ports.push_back({in, Direction::Input, 1});
  std::vector<TermPtr> outs;
  for (std::size_t k = 0; k < c.outputs.size(); ++k) {
    iface.ports.push_back({c.outputs[k].first, Direction::Output, 1});
    outs.push_back(output_term(c, k));
  }
  return from_terms(make_term("outputs", std::move(outs)), iface);
}

void check_component(const LibraryComponent &c) {
  auto bad = [&](const std::string &what) { throw Error("bad-component", c.name + ": " + what); };
  if (!is_ident(c.name))
    bad("invalid component name");
  if (c.outputs.empty())
    bad("no outputs");
  std::set<std::string> names;
  for (const auto &in : c.inputs)
    if (!is_ident(in) || !names.insert(in).second)
      bad("invalid or duplicate input '" + in + "'");
  for (const auto &[out, pat] : c.outputs) {
    if (!is_ident(out) || !names.insert(out).second)
      bad("invalid or duplicate output '" + out + "'");
    for (const auto &v : pat.variables())
      if (std::find(c.inputs.begin(), c.inputs.end(), v.substr(1)) == c.inputs.end())
        bad("output '" + out + "' uses undeclared input " + v);
    if (pat.is_var())
      bad("output '" + out + "' is a bare input");
  }
  if (builtin_kind(c.name) && !is_builtin_component(c.name))
    bad("name clashes with a gate kind");
  if (is_learned_name(c.name) && c.outputs.size() != 1)
    bad("learned components have exactly one output");

  Netlist def;
  try {
    def = component_definition(c);
  } catch (const Error &e) {
    bad(e.what());
  }
  for (const auto &cell : def.cells)
    if (cell.kind == "REG")
      bad("registers are not allowed in components");

  if (!is_builtin_component(c.name))
    return;
  // Native semantics must agree with the patterns.
  const KindSig *sig = builtin_kind(c.name);
  if (sig->inputs.size() != c.inputs.size() || sig->outputs.size() != c.outputs.size())
    bad("pin counts differ from the built-in " + c.name);
  NetlistBuilder b(c.name);
  for (const auto &in : c.inputs)
    b.input(in);
  for (const auto &[out, _] : c.outputs)
    b.output(out);
  std::map<std::string, NetBit> pins;
  for (std::size_t i = 0; i < c.inputs.size(); ++i)
    pins[sig->inputs[i]] = bit(c.inputs[i]);
  for (std::size_t k = 0; k < c.outputs.size(); ++k)
    pins[sig->outputs[k]] = bit(c.outputs[k].first);
  b.cell(c.name, "u0", pins);
  Netlist native = b.build();
  Verdict v = check_equiv(native, def);
  if (!v.equivalent)
    bad("patterns disagree with the built-in semantics of " + c.name);
}

std::vector<LibraryComponent> parse_library(std::string_view text) {
  std::vector<LibraryComponent> lib;
  std::set<std::string> seen;
  for (const auto &form : parse_sexprs(text)) {
    if (!form.is_form("component") || form.items.size() < 3 || !form.items[1].is_atom())
      syntax_error(form, "expected (component <name> (inputs ...) (output ...)...)");
    LibraryComponent c;
    c.name = form.items[1].atom;
    for (std::size_t i = 2; i < form.items.size(); ++i) {
      const SExpr &f = form.items[i];
      if (f.is_form("inputs")) {
        for (std::size_t j = 1; j < f.items.size(); ++j) {
          if (!f.items[j].is_atom())
            syntax_error(f.items[j], "input names are atoms");
          c.inputs.push_back(f.items[j].atom);
        }
      } else if (f.is_form("output")) {
        if (f.items.size() != 3 || !f.items[1].is_atom())
          syntax_error(f, "expected (output <name> <expr>)");
        c.outputs.emplace_back(f.items[1].atom, output_pattern(f.items[2], c.inputs, c.name));
      } else {
        syntax_error(f, "expected (inputs ...) or (output ...)");
      }
    }
    if (!seen.insert(c.name).second)
      throw Error("bad-component", "component '" + c.name + "' defined twice");
    check_component(c);
    lib.push_back(std::move(c));
  }
  return lib;
}

std::string write_library(const std::vector<LibraryComponent> &lib) {
  std::string out;
  for (const auto &c : lib) {
    out += "(component " + c.name + "\n  (inputs";
    for (const auto &in : c.inputs)
      out += " " + in;
    out += ")";
    for (const auto &[name, pat] : c.outputs)
      out += "\n  (output " + name + " " + library_text(pat) + ")";
    out += ")\n";
  }
  return out;
}

namespace {
constexpr std::string_view kStandardLibrary = R"(
(component HalfAdder (inputs a b)
  (output S (XOR a b))
  (output C (AND a b)))
(component FullAdder (inputs a b cin)
  (output S (XOR (XOR a b) cin))
  (output Cout (OR (AND a b) (AND cin (XOR a b)))))
(component Mux2 (inputs a b s)
  (output Y (OR (AND a (NOT s)) (AND b s))))
)";

constexpr std::string_view kBoolRules = R"(# Boolean algebra over AND/OR/XOR/NOT.
and-comm: (AND ?a ?b) => (AND ?b ?a)
or-comm: (OR ?a ?b) => (OR ?b ?a)
xor-comm: (XOR ?a ?b) => (XOR ?b ?a)
and-assoc: (AND ?a (AND ?b ?c)) <=> (AND (AND ?a ?b) ?c)
or-assoc: (OR ?a (OR ?b ?c)) <=> (OR (OR ?a ?b) ?c)
xor-assoc: (XOR ?a (XOR ?b ?c)) <=> (XOR (XOR ?a ?b) ?c)
and-identity: (AND ?a CONST1) => ?a
or-identity: (OR ?a CONST0) => ?a
xor-identity: (XOR ?a CONST0) => ?a
and-annihilate: (AND ?a CONST0) => CONST0
or-annihilate: (OR ?a CONST1) => CONST1
and-idempotent: (AND ?a ?a) => ?a
or-idempotent: (OR ?a ?a) => ?a
xor-self: (XOR ?a ?a) => CONST0
not-not: (NOT (NOT ?a)) => ?a
not-const0: (NOT CONST0) => CONST1
not-const1: (NOT CONST1) => CONST0
demorgan-and: (NOT (AND ?a ?b)) <=> (OR (NOT ?a) (NOT ?b))
demorgan-or: (NOT (OR ?a ?b)) <=> (AND (NOT ?a) (NOT ?b))
xor-not: (NOT (XOR ?a ?b)) <=> (XOR (NOT ?a) ?b)
)";
} // namespace

const std::vector<LibraryComponent> &standard_library() {
  static const std::vector<LibraryComponent> lib = parse_library(kStandardLibrary);
  return lib;
}

std::string_view bool_rules_text() { return kBoolRules; }

const std::vector<Rewrite> &bool_rules() {
  static const std::vector<Rewrite> rules = parse_rules(kBoolRules);
  return rules;
}

std::vector<Rewrite> component_rules(const LibraryComponent &c) {
  std::vector<Pattern> vars;
  for (const auto &in : c.inputs)
    vars.push_back(Pattern::var("?" + in));
  std::vector<Rewrite> rules;
  if (is_learned_name(c.name)) {
    std::vector<Pattern> args{Pattern::node(c.name)};
    args.insert(args.end(), vars.begin(), vars.end());
    rules.push_back({c.name, c.outputs.at(0).second, Pattern::node("apply", args), false});
    return rules;
  }
  for (std::size_t k = 0; k < c.outputs.size(); ++k) {
    const auto &[out, pat] = c.outputs[k];
    // An output that ignores some input cannot bind the whole component.
    if (pat.variables().size() != c.inputs.size())
      continue;
    rules.push_back({c.name + "-" + out, pat,
                     Pattern::node(proj_name(k), {Pattern::node(c.name, vars)}), false});
  }
  return rules;
}

CostModel identify_cost_model(const std::vector<LibraryComponent> &lib) {
  CostModel cm(1.0);
  cm.set("input", 0).set("const", 0).set("outputs", 0).set("proj", 0);
  cm.set("apply", 0.5).set("def", 0);
  for (const auto &c : lib) {
    if (c.name == "HalfAdder") {
      cm.set(c.name, 1.5);
    } else if (c.name == "FullAdder") {
      cm.set(c.name, 3.75);
    } else if (c.name == "Mux2") {
      cm.set(c.name, 2.5);
    } else if (!is_learned_name(c.name)) {
      // Between the most expensive single output and the whole body.
      Netlist def = component_definition(c);
      double total = static_cast<double>(def.cells.size());
      double single = 0;
      for (std::size_t k = 0; k < c.outputs.size(); ++k)
        single = std::max(single, static_cast<double>(c.outputs[k].second.size()));
      cm.set(c.name, c.outputs.size() > 1 ? (total + single) / 2 : std::max(0.0, total - 0.5));
    }
  }
  return cm;
}

// ------------------------------------------------------------- identify --

std::string IdentifyReport::to_json() const {
  nlohmann::ordered_json j;
  j["run"] = nlohmann::ordered_json::parse(run.to_json());
  j["cost_before"] = cost_before;
  j["cost_after"] = cost_after;
  j["extraction_timed_out"] = extraction_timed_out;
  nlohmann::ordered_json insts = nlohmann::ordered_json::array();
  for (const auto &inst : instances) {
    nlohmann::ordered_json pins = nlohmann::ordered_json::object();
    for (const auto &[pin, nb] : inst.pins)
      pins[pin] = to_string(nb);
    insts.push_back({{"instance", inst.instance}, {"kind", inst.kind}, {"pins", pins}});
  }
  j["instances"] = insts;
  nlohmann::ordered_json near = nlohmann::ordered_json::array();
  for (const auto &m : near_misses)
    near.push_back({{"component", m.component}, {"output", m.output}, {"eclass", m.eclass}});
  j["near_misses"] = near;
  return j.dump(2);
}

namespace {

double dag_cost(const TermPtr &t, const CostModel &cm) {
  std::unordered_set<const Term *> seen;
  double total = 0;
  std::function<void(const Term *)> walk = [&](const Term *x) {
    if (!seen.insert(x).second)
      return;
    total += cm.cost(x->op());
    for (const auto &c : x->children())
      walk(c.get());
  };
  walk(t.get());
  return total;
}

void collect_ops(const TermPtr &t, std::set<std::string> &ops) {
  std::unordered_set<const Term *> seen;
  std::function<void(const Term *)> walk = [&](const Term *x) {
    if (!seen.insert(x).second)
      return;
    ops.insert(x->op().str());
    for (const auto &c : x->children())
      walk(c.get());
  };
  walk(t.get());
}

} // namespace

IdentifyResult identify(const Netlist &n, const std::vector<LibraryComponent> &lib,
                        const IdentifyConfig &cfg) {
  TermTable table;
  TermPtr t = table.intern(to_terms(n));
  CostModel cm = cfg.costs ? *cfg.costs : identify_cost_model(lib);

  EGraph g;
  EClassId root = g.add_term(t);
  std::vector<Rewrite> rules;
  for (const auto &c : lib) {
    auto rs = component_rules(c);
    rules.insert(rules.end(), rs.begin(), rs.end());
  }
  if (cfg.use_bool_rules)
    rules.insert(rules.end(), bool_rules().begin(), bool_rules().end());

  IdentifyResult out;
  out.report.run = run(g, rules, cfg.limits);
  root = g.find(root);

  Selection s = cfg.extractor == ExtractorKind::Ilp
                    ? extract_ilp(g, {root}, cm, {cfg.ilp_seconds, true})
                    : extract_greedy(g, {root}, cm);
  validate_selection(g, s, cm);
  TermPtr chosen = selection_term(s, root);
  out.report.cost_before = dag_cost(t, cm);
  out.report.cost_after = s.cost;
  out.report.extraction_timed_out = s.timed_out;

  Interface iface = interface_of(n);
  std::set<std::string> ops;
  collect_ops(chosen, ops);
  for (const auto &c : lib)
    if (!is_builtin_component(c.name) && ops.count(c.name) && !n.find_definition(c.name))
      iface.definitions.push_back(component_definition(c));
  out.netlist = from_terms(chosen, iface);

  std::set<std::string> names;
  for (const auto &c : lib)
    names.insert(c.name);
  for (const auto &cell : out.netlist.cells)
    if (names.count(cell.kind))
      out.report.instances.push_back({cell.instance, cell.kind, cell.pins});

  // Component nodes for which only one output was ever matched.
  for (const auto &c : lib) {
    if (c.outputs.size() < 2 || is_learned_name(c.name))
      continue;
    std::map<EClassId, std::set<std::size_t>> projected;
    for (std::size_t k = 0; k < c.outputs.size(); ++k)
      for (EClassId cls : g.classes_with(Symbol(proj_name(k))))
        for (const auto &node : g.nodes(cls))
          if (node.op.str() == proj_name(k))
            for (const auto &inner : g.nodes(g.find(node.children[0])))
              if (inner.op.str() == c.name)
                projected[g.find(node.children[0])].insert(k);
    for (const auto &[comp, ks] : projected) {
      if (ks.size() != 1)
        continue;
      std::size_t k = *ks.begin();
      for (EClassId cls : g.classes_with(Symbol(proj_name(k))))
        for (const auto &node : g.nodes(cls))
          if (node.op.str() == proj_name(k) && g.find(node.children[0]) == comp)
            out.report.near_misses.push_back({c.name, k, cls});
    }
  }
  std::sort(out.report.near_misses.begin(), out.report.near_misses.end(),
            [](const NearMiss &a, const NearMiss &b) {
              return std::tie(a.eclass, a.component, a.output) <
                     std::tie(b.eclass, b.component, b.output);
            });
  out.report.near_misses.erase(
      std::unique(out.report.near_misses.begin(), out.report.near_misses.end(),
                  [](const NearMiss &a, const NearMiss &b) {
                    return a.eclass == b.eclass && a.component == b.component &&
                           a.output == b.output;
                  }),
      out.report.near_misses.end());
  return out;
}

} // namespace eqnet
