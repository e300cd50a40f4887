#include "eqnet/rewrite.hpp"

#include "eqnet/error.hpp"
#include "eqnet/sexpr.hpp"

#include <json.hpp>

#include <algorithm>
#include <functional>
#include <set>

namespace eqnet {

Pattern Pattern::var(std::string name) {
  Pattern p;
  p.is_var_ = true;
  p.var_ = std::move(name);
  return p;
}

Pattern Pattern::node(std::string_view op, std::vector<Pattern> children) {
  return node(Symbol(op), std::move(children));
}

Pattern Pattern::node(Symbol op, std::vector<Pattern> children) {
  Pattern p;
  p.op_ = op;
  p.children_ = std::move(children);
  return p;
}

std::vector<std::string> Pattern::variables() const {
  std::vector<std::string> out;
  std::vector<const Pattern *> stack{this};
  while (!stack.empty()) {
    const Pattern *p = stack.back();
    stack.pop_back();
    if (p->is_var_) {
      if (std::find(out.begin(), out.end(), p->var_) == out.end())
        out.push_back(p->var_);
      continue;
    }
    for (auto it = p->children_.rbegin(); it != p->children_.rend(); ++it)
      stack.push_back(&*it);
  }
  return out;
}

std::size_t Pattern::size() const {
  if (is_var_)
    return 0;
  std::size_t n = 1;
  for (const auto &c : children_)
    n += c.size();
  return n;
}

std::string Pattern::to_string() const {
  if (is_var_)
    return var_;
  if (children_.empty())
    return op_.str();
  std::string out = "(" + op_.str();
  for (const auto &c : children_)
    out += " " + c.to_string();
  return out + ")";
}

bool Pattern::operator==(const Pattern &o) const {
  if (is_var_ != o.is_var_)
    return false;
  if (is_var_)
    return var_ == o.var_;
  return op_ == o.op_ && children_ == o.children_;
}

namespace {

bool nullary_name(std::string_view s) {
  return s == "CONST0" || s == "CONST1" || s.substr(0, 6) == "input:" || s.substr(0, 4) == "def_";
}

Pattern pattern_from_sexpr(const SExpr &e) {
  if (e.is_atom()) {
    if (e.atom.size() > 1 && e.atom[0] == '?')
      return Pattern::var(e.atom);
    if (e.atom == "?")
      syntax_error(e, "empty variable name");
    if (nullary_name(e.atom))
      return Pattern::node(e.atom);
    return Pattern::node(input_symbol(e.atom, 0));
  }
  if (e.items.empty() || !e.items[0].is_atom() || e.items[0].atom[0] == '?')
    syntax_error(e, "expected operator at head of list");
  std::vector<Pattern> kids;
  for (std::size_t i = 1; i < e.items.size(); ++i)
    kids.push_back(pattern_from_sexpr(e.items[i]));
  return Pattern::node(e.items[0].atom, std::move(kids));
}

} // namespace

Pattern parse_pattern(std::string_view text) { return pattern_from_sexpr(parse_sexpr(text)); }

Pattern pattern_from_term(const TermPtr &t) {
  std::vector<Pattern> kids;
  for (const auto &c : t->children())
    kids.push_back(pattern_from_term(c));
  return Pattern::node(t->op(), std::move(kids));
}

TermPtr pattern_to_term(const Pattern &p, const std::map<std::string, TermPtr> &subst) {
  if (p.is_var()) {
    auto it = subst.find(p.var_name());
    if (it == subst.end())
      throw Error("unbound-variable", "no value for " + p.var_name());
    return it->second;
  }
  std::vector<TermPtr> kids;
  for (const auto &c : p.children())
    kids.push_back(pattern_to_term(c, subst));
  return make_term(p.op(), std::move(kids));
}

// -------------------------------------------------------------- ematch --

namespace {

constexpr EClassId kUnbound = ~EClassId{0};

struct CompiledPattern {
  bool is_var = false;
  std::size_t var = 0;
  Symbol op;
  std::vector<CompiledPattern> children;
};

CompiledPattern compile(const Pattern &p, const std::vector<std::string> &vars) {
  CompiledPattern c;
  if (p.is_var()) {
    c.is_var = true;
    c.var = static_cast<std::size_t>(std::find(vars.begin(), vars.end(), p.var_name()) - vars.begin());
    return c;
  }
  c.op = p.op();
  for (const auto &k : p.children())
    c.children.push_back(compile(k, vars));
  return c;
}

using Binding = std::vector<EClassId>;

void match_class(const EGraph &g, const CompiledPattern &p, EClassId c, Binding &b,
                 const std::function<void(Binding &)> &k);

void match_children(const EGraph &g, const CompiledPattern &p, const ENode &n, std::size_t i,
                    Binding &b, const std::function<void(Binding &)> &k) {
  if (i == p.children.size()) {
    k(b);
    return;
  }
  match_class(g, p.children[i], n.children[i], b,
              [&](Binding &bb) { match_children(g, p, n, i + 1, bb, k); });
}

void match_class(const EGraph &g, const CompiledPattern &p, EClassId c, Binding &b,
                 const std::function<void(Binding &)> &k) {
  c = g.find(c);
  if (p.is_var) {
    if (b[p.var] == kUnbound) {
      b[p.var] = c;
      k(b);
      b[p.var] = kUnbound;
    } else if (b[p.var] == c) {
      k(b);
    }
    return;
  }
  for (const auto &n : g.nodes(c))
    if (n.op == p.op && n.children.size() == p.children.size())
      match_children(g, p, n, 0, b, k);
}

} // namespace

std::vector<Match> ematch(const EGraph &g, const Pattern &p) {
  auto vars = p.variables();
  auto cp = compile(p, vars);
  std::vector<Match> out;
  auto visit = [&](EClassId c) {
    Binding b(vars.size(), kUnbound);
    match_class(g, cp, c, b, [&](Binding &bb) { out.push_back({c, bb}); });
  };
  if (cp.is_var) {
    for (auto c : g.classes())
      visit(c);
  } else {
    for (auto c : g.classes_with(cp.op))
      visit(c);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

EClassId instantiate(EGraph &g, const Pattern &p, const std::vector<std::string> &vars,
                     const std::vector<EClassId> &bindings) {
  if (p.is_var()) {
    auto it = std::find(vars.begin(), vars.end(), p.var_name());
    if (it == vars.end())
      throw Error("unbound-variable", "variable " + p.var_name() + " is not bound");
    return bindings[static_cast<std::size_t>(it - vars.begin())];
  }
  ENode n{p.op(), {}};
  for (const auto &c : p.children())
    n.children.push_back(instantiate(g, c, vars, bindings));
  return g.add(std::move(n));
}

// --------------------------------------------------------------- rules --

void check_rewrite(const Rewrite &r) {
  auto check = [&](const Pattern &from, const Pattern &to) {
    auto bound = from.variables();
    for (const auto &v : to.variables())
      if (std::find(bound.begin(), bound.end(), v) == bound.end())
        throw Error("unbound-variable", "rule '" + r.name + "': " + v + " is not bound on the " +
                                            (&from == &r.lhs ? "left" : "right"));
  };
  check(r.lhs, r.rhs);
  if (r.bidirectional)
    check(r.rhs, r.lhs);
}

namespace {

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos)
    return {};
  auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

// Finds `token` outside parentheses.
std::size_t find_top_level(std::string_view s, std::string_view token) {
  int depth = 0;
  for (std::size_t i = 0; i + token.size() <= s.size(); ++i) {
    if (s[i] == '(')
      ++depth;
    else if (s[i] == ')')
      --depth;
    else if (depth == 0 && s.substr(i, token.size()) == token)
      return i;
  }
  return std::string_view::npos;
}

} // namespace

std::vector<Rewrite> parse_rules(std::string_view text) {
  std::vector<Rewrite> rules;
  std::set<std::string> names;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos)
      end = text.size();
    std::string_view raw = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (auto hash = raw.find('#'); hash != std::string_view::npos)
      raw = raw.substr(0, hash);
    std::string line = trim(raw);
    if (line.empty())
      continue;
    auto where = "line " + std::to_string(line_no);
    auto colon = line.find(':');
    if (colon == std::string::npos)
      throw Error("syntax", where + ": expected 'name: LHS => RHS'");
    std::string name = trim(std::string_view(line).substr(0, colon));
    if (name.empty() || name.find_first_of(" \t()") != std::string::npos)
      throw Error("syntax", where + ": bad rule name '" + name + "'");
    std::string_view body = std::string_view(line).substr(colon + 1);
    bool bidi = true;
    auto arrow = find_top_level(body, "<=>");
    std::size_t arrow_len = 3;
    if (arrow == std::string_view::npos) {
      bidi = false;
      arrow = find_top_level(body, "=>");
      arrow_len = 2;
    }
    if (arrow == std::string_view::npos)
      throw Error("syntax", where + ": missing '=>' or '<=>'");
    Rewrite r;
    r.name = name;
    r.bidirectional = bidi;
    try {
      r.lhs = parse_pattern(body.substr(0, arrow));
      r.rhs = parse_pattern(body.substr(arrow + arrow_len));
    } catch (const Error &e) {
      throw Error(e.kind(), where + ": " + e.what());
    }
    if (r.lhs.is_var())
      throw Error("syntax", where + ": left-hand side must not be a bare variable");
    if (bidi && r.rhs.is_var())
      throw Error("syntax", where + ": bidirectional rule sides must not be bare variables");
    try {
      check_rewrite(r);
    } catch (const Error &e) {
      throw Error(e.kind(), where + ": " + e.what());
    }
    if (!names.insert(name).second)
      throw Error("duplicate-rule", where + ": rule '" + name + "' defined twice");
    rules.push_back(std::move(r));
  }
  return rules;
}

std::string write_rules(const std::vector<Rewrite> &rules) {
  std::string out;
  for (const auto &r : rules)
    out += r.name + ": " + r.lhs.to_string() + (r.bidirectional ? " <=> " : " => ") +
           r.rhs.to_string() + "\n";
  return out;
}

// ----------------------------------------------------------------- run --

std::string to_string(StopReason r) {
  switch (r) {
  case StopReason::Saturated: return "saturated";
  case StopReason::IterLimit: return "iter-limit";
  case StopReason::NodeLimit: return "node-limit";
  case StopReason::TimeLimit: return "time-limit";
  }
  return "?";
}

std::string RunReport::to_json() const {
  nlohmann::ordered_json j;
  j["iterations"] = iterations;
  j["stop_reason"] = to_string(stop);
  j["enodes"] = enodes;
  j["eclasses"] = eclasses;
  nlohmann::ordered_json rm = nlohmann::ordered_json::object();
  for (const auto &[name, n] : rule_matches)
    rm[name] = n;
  j["rule_matches"] = rm;
  return j.dump(2);
}

RunReport run(EGraph &g, const std::vector<Rewrite> &rules, const RunLimits &limits) {
  struct Directed {
    std::string name;
    const Pattern *lhs;
    const Pattern *rhs;
    std::vector<std::string> vars;
  };
  std::vector<Directed> directed;
  for (const auto &r : rules) {
    check_rewrite(r);
    directed.push_back({r.name, &r.lhs, &r.rhs, r.lhs.variables()});
    if (r.bidirectional)
      directed.push_back({r.name + "~rev", &r.rhs, &r.lhs, r.rhs.variables()});
  }

  RunReport report;
  for (const auto &d : directed)
    report.rule_matches.emplace_back(d.name, 0);
  g.rebuild();
  const auto start = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  };

  for (;;) {
    if (report.iterations >= limits.max_iterations) {
      report.stop = StopReason::IterLimit;
      break;
    }
    if (elapsed() > limits.max_seconds) {
      report.stop = StopReason::TimeLimit;
      break;
    }
    ++report.iterations;

    std::vector<std::vector<Match>> found;
    found.reserve(directed.size());
    for (std::size_t i = 0; i < directed.size(); ++i) {
      found.push_back(ematch(g, *directed[i].lhs));
      report.rule_matches[i].second += found.back().size();
    }

    const auto unions_before = g.union_count();
    const auto nodes_before = g.node_count();
    bool node_limit = false;
    for (std::size_t i = 0; i < directed.size() && !node_limit; ++i) {
      for (const auto &m : found[i]) {
        EClassId id = instantiate(g, *directed[i].rhs, directed[i].vars, m.bindings);
        g.merge(m.eclass, id);
        if (g.node_count() > limits.max_enodes) {
          node_limit = true;
          break;
        }
      }
    }
    g.rebuild();
    if (node_limit || g.node_count() > limits.max_enodes) {
      report.stop = StopReason::NodeLimit;
      break;
    }
    if (g.union_count() == unions_before && g.node_count() == nodes_before) {
      report.stop = StopReason::Saturated;
      break;
    }
    if (elapsed() > limits.max_seconds) {
      report.stop = StopReason::TimeLimit;
      break;
    }
  }
  report.enodes = g.node_count();
  report.eclasses = g.class_count();
  return report;
}

} // namespace eqnet
