#include "eqnet/term.hpp"

#include "eqnet/error.hpp"
#include "eqnet/sexpr.hpp"

#include <charconv>
#include <unordered_set>

namespace eqnet {

TermPtr make_term(std::string_view op, std::vector<TermPtr> children) {
  return std::make_shared<const Term>(Symbol(op), std::move(children));
}

TermPtr make_term(Symbol op, std::vector<TermPtr> children) {
  return std::make_shared<const Term>(op, std::move(children));
}

std::string input_symbol(std::string_view port, std::size_t bit) {
  std::string s = "input:";
  s += port;
  s += ':';
  s += std::to_string(bit);
  return s;
}

TermPtr input_leaf(std::string_view port, std::size_t bit) {
  return make_term(input_symbol(port, bit));
}

std::optional<InputBit> parse_input_symbol(std::string_view op) {
  if (op.substr(0, 6) != "input:")
    return std::nullopt;
  auto rest = op.substr(6);
  auto colon = rest.rfind(':');
  if (colon == std::string_view::npos || colon == 0)
    return std::nullopt;
  std::size_t bit = 0;
  auto digits = rest.substr(colon + 1);
  auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), bit);
  if (ec != std::errc{} || ptr != digits.data() + digits.size() || digits.empty())
    return std::nullopt;
  return InputBit{std::string(rest.substr(0, colon)), bit};
}

bool term_equal(const TermPtr &a, const TermPtr &b) {
  if (a == b)
    return true;
  if (!a || !b || a->op() != b->op() || a->children().size() != b->children().size())
    return false;
  for (std::size_t i = 0; i < a->children().size(); ++i)
    if (!term_equal(a->children()[i], b->children()[i]))
      return false;
  return true;
}

std::size_t term_dag_size(const TermPtr &t) {
  TermTable table;
  std::unordered_set<const Term *> seen;
  std::vector<TermPtr> stack{table.intern(t)};
  while (!stack.empty()) {
    auto cur = stack.back();
    stack.pop_back();
    if (!seen.insert(cur.get()).second)
      continue;
    for (const auto &c : cur->children())
      stack.push_back(c);
  }
  return seen.size();
}

std::string to_string(const TermPtr &t) {
  if (t->is_leaf())
    return t->op().str();
  std::string out = "(" + t->op().str();
  for (const auto &c : t->children()) {
    out += ' ';
    out += to_string(c);
  }
  return out + ")";
}

namespace {

bool nullary_name(std::string_view s) {
  return s == "CONST0" || s == "CONST1" || s.substr(0, 6) == "input:" || s.substr(0, 4) == "def_";
}

TermPtr term_from_sexpr(const SExpr &e) {
  if (e.is_atom()) {
    if (e.atom.empty() || e.atom[0] == '?')
      syntax_error(e, "variables are not allowed in terms");
    if (nullary_name(e.atom))
      return make_term(e.atom);
    return input_leaf(e.atom, 0);
  }
  if (e.items.empty() || !e.items[0].is_atom())
    syntax_error(e, "expected operator");
  std::vector<TermPtr> kids;
  for (std::size_t i = 1; i < e.items.size(); ++i)
    kids.push_back(term_from_sexpr(e.items[i]));
  return make_term(e.items[0].atom, std::move(kids));
}

} // namespace

TermPtr parse_term(std::string_view text) { return term_from_sexpr(parse_sexpr(text)); }

std::size_t TermTable::KeyHash::operator()(const Key &k) const {
  std::size_t h = std::hash<Symbol>{}(k.op);
  for (auto *c : k.children)
    h = h * 1000003u ^ std::hash<const void *>{}(c);
  return h;
}

TermPtr TermTable::intern(Symbol op, std::vector<TermPtr> children) {
  Key key{op, {}};
  key.children.reserve(children.size());
  for (auto &c : children) {
    c = intern(c);
    key.children.push_back(c.get());
  }
  if (auto it = table_.find(key); it != table_.end())
    return it->second;
  auto t = make_term(op, std::move(children));
  canon_.emplace(t.get(), std::make_pair(t, t));
  table_.emplace(std::move(key), t);
  return t;
}

TermPtr TermTable::intern(const TermPtr &t) {
  if (auto it = canon_.find(t.get()); it != canon_.end())
    return it->second.second;
  auto r = intern(t->op(), t->children());
  canon_.emplace(t.get(), std::make_pair(t, r));
  return r;
}

} // namespace eqnet
