#include "eqnet/egraph.hpp"

#include "eqnet/error.hpp"
#include "eqnet/kinds.hpp"

#include <algorithm>

namespace eqnet {

bool node_less(const ENode &a, const ENode &b) {
  if (a.op != b.op)
    return a.op < b.op;
  if (a.children.size() != b.children.size())
    return a.children.size() < b.children.size();
  return a.children < b.children;
}

std::size_t ENodeHash::operator()(const ENode &n) const {
  std::size_t h = std::hash<Symbol>{}(n.op) * 0x9e3779b97f4a7c15ULL;
  for (auto c : n.children)
    h = (h ^ c) * 0x100000001b3ULL;
  return h;
}

EGraph::EGraph() {
  for (const char *op : {"AND", "OR", "XOR"})
    declare(Symbol(op), 2);
  declare(Symbol("NOT"), 1);
  declare(Symbol("REG"), 1);
  declare(Symbol("MUX"), 3);
  declare(Symbol("CONST0"), 0);
  declare(Symbol("CONST1"), 0);
  declare(Symbol("HalfAdder"), 2);
  declare(Symbol("FullAdder"), 3);
  declare(Symbol("Mux2"), 3);
}

void EGraph::declare(Symbol op, std::size_t arity) { arity_[op] = arity; }

std::optional<std::size_t> EGraph::arity(Symbol op) const {
  if (auto it = arity_.find(op); it != arity_.end())
    return it->second;
  const std::string &s = op.str();
  if (proj_index(s))
    return 1;
  if (s.rfind("input:", 0) == 0 || is_learned_name(s))
    return 0;
  return std::nullopt;
}

EClassId EGraph::make_class() {
  auto id = static_cast<EClassId>(parent_.size());
  parent_.push_back(id);
  return id;
}

EClassId EGraph::find(EClassId id) const {
  while (parent_[id] != id)
    id = parent_[id];
  return id;
}

ENode EGraph::canonicalize(const ENode &n) const {
  ENode out{n.op, n.children};
  for (auto &c : out.children)
    c = find(c);
  return out;
}

EClassId EGraph::add(ENode node) {
  const std::string &name = node.op.str();
  if (name == "outputs" || name == "apply") {
    // variadic
  } else if (auto a = arity(node.op)) {
    if (*a != node.children.size())
      throw Error("arity", "'" + name + "' expects " + std::to_string(*a) + " children, got " +
                               std::to_string(node.children.size()));
  } else {
    arity_[node.op] = node.children.size();
  }
  for (auto c : node.children)
    if (c >= parent_.size())
      throw Error("arity", "child class " + std::to_string(c) + " does not exist");
  node = canonicalize(node);
  if (auto it = hashcons_.find(node); it != hashcons_.end())
    return find(it->second);
  EClassId id = make_class();
  if (clean()) {
    // Fresh ids are the largest, so the sorted views stay sorted.
    class_list_.push_back(id);
    by_op_[node.op].push_back(id);
    class_nodes_[id].push_back(node);
  } else {
    stale_ = true;
  }
  hashcons_.emplace(std::move(node), id);
  return id;
}

EClassId EGraph::add_term(const TermPtr &t) {
  // Iterative post-order so deep terms do not exhaust the stack.
  std::unordered_map<const Term *, EClassId> memo;
  std::vector<std::pair<const Term *, bool>> stack{{t.get(), false}};
  while (!stack.empty()) {
    auto [cur, expanded] = stack.back();
    stack.pop_back();
    if (memo.count(cur))
      continue;
    if (!expanded) {
      stack.emplace_back(cur, true);
      for (auto it = cur->children().rbegin(); it != cur->children().rend(); ++it)
        if (!memo.count(it->get()))
          stack.emplace_back(it->get(), false);
      continue;
    }
    ENode n{cur->op(), {}};
    for (const auto &c : cur->children())
      n.children.push_back(memo.at(c.get()));
    memo.emplace(cur, add(std::move(n)));
  }
  return memo.at(t.get());
}

bool EGraph::merge(EClassId a, EClassId b) {
  EClassId ra = find(a), rb = find(b);
  if (ra == rb)
    return false;
  // The smaller id stays canonical, so the final partition's canonical ids
  // do not depend on merge order.
  if (rb < ra)
    std::swap(ra, rb);
  parent_[rb] = ra;
  ++unions_;
  pending_.push_back(rb);
  return true;
}

void EGraph::rebuild() {
  if (clean())
    return;
  bool changed = true;
  while (changed) {
    changed = false;
    std::unordered_map<ENode, EClassId, ENodeHash> next;
    next.reserve(hashcons_.size());
    for (const auto &[node, cls] : hashcons_) {
      ENode canon = canonicalize(node);
      EClassId c = find(cls);
      auto [it, fresh] = next.emplace(std::move(canon), c);
      if (!fresh && find(it->second) != c) {
        merge(it->second, c);
        changed = true;
      }
    }
    hashcons_ = std::move(next);
  }
  for (std::size_t i = 0; i < parent_.size(); ++i)
    parent_[i] = find(static_cast<EClassId>(i));

  class_nodes_.clear();
  by_op_.clear();
  for (auto &[node, cls] : hashcons_) {
    cls = find(cls);
    class_nodes_[cls].push_back(node);
  }
  class_list_.clear();
  for (auto &[cls, nodes] : class_nodes_) {
    std::sort(nodes.begin(), nodes.end(), node_less);
    class_list_.push_back(cls);
  }
  std::sort(class_list_.begin(), class_list_.end());
  for (EClassId c : class_list_) {
    Symbol last;
    bool first = true;
    for (const auto &n : class_nodes_[c]) {
      if (first || n.op != last)
        by_op_[n.op].push_back(c);
      last = n.op;
      first = false;
    }
  }
  pending_.clear();
  stale_ = false;
}

std::size_t EGraph::class_count() const {
  if (clean())
    return class_list_.size();
  std::size_t roots = 0;
  for (std::size_t i = 0; i < parent_.size(); ++i)
    roots += find(static_cast<EClassId>(i)) == i;
  return roots;
}

const std::vector<ENode> &EGraph::nodes(EClassId c) const {
  static const std::vector<ENode> empty;
  auto it = class_nodes_.find(find(c));
  return it == class_nodes_.end() ? empty : it->second;
}

const std::vector<EClassId> &EGraph::classes_with(Symbol op) const {
  static const std::vector<EClassId> empty;
  auto it = by_op_.find(op);
  return it == by_op_.end() ? empty : it->second;
}

std::optional<EClassId> EGraph::lookup(const ENode &node) const {
  if (auto it = hashcons_.find(canonicalize(node)); it != hashcons_.end())
    return find(it->second);
  return std::nullopt;
}

std::optional<EClassId> EGraph::lookup_term(const TermPtr &t) const {
  ENode n{t->op(), {}};
  for (const auto &c : t->children()) {
    auto id = lookup_term(c);
    if (!id)
      return std::nullopt;
    n.children.push_back(*id);
  }
  return lookup(n);
}

std::vector<TermPtr> enumerate_terms(const EGraph &g, EClassId c, std::size_t limit,
                                     std::size_t max_depth) {
  std::vector<TermPtr> out;
  if (max_depth == 0 || limit == 0)
    return out;
  for (const auto &n : g.nodes(c)) {
    std::vector<std::vector<TermPtr>> options;
    bool dead = false;
    for (auto child : n.children) {
      options.push_back(enumerate_terms(g, child, limit, max_depth - 1));
      if (options.back().empty()) {
        dead = true;
        break;
      }
    }
    if (dead)
      continue;
    std::vector<std::size_t> idx(options.size(), 0);
    for (;;) {
      std::vector<TermPtr> kids;
      for (std::size_t i = 0; i < options.size(); ++i)
        kids.push_back(options[i][idx[i]]);
      out.push_back(make_term(n.op, std::move(kids)));
      if (out.size() >= limit)
        return out;
      std::size_t k = 0;
      while (k < idx.size() && ++idx[k] == options[k].size())
        idx[k++] = 0;
      if (k == idx.size())
        break;
    }
  }
  return out;
}

} // namespace eqnet
