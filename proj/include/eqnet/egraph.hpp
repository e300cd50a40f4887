#pragma once

#include "eqnet/symbol.hpp"
#include "eqnet/term.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <unordered_map>
#include <vector>

namespace eqnet {

using EClassId = std::uint32_t;

struct ENode {
  Symbol op;
  std::vector<EClassId> children;

  bool operator==(const ENode &) const = default;
};

/// Deterministic order: operator name, then arity, then child ids.
bool node_less(const ENode &a, const ENode &b);

struct ENodeHash {
  std::size_t operator()(const ENode &n) const;
};

/// Union-find over e-classes with a hashcons for congruence closure.
///
/// Mutation (add/merge) may leave the graph non-canonical; `rebuild()`
/// restores the invariants. Read operations (classes, nodes, ematch,
/// extraction) are only meaningful on a rebuilt graph.
class EGraph {
public:
  EGraph();

  /// Adds a node whose children are existing class ids. Fixed-arity
  /// operators are checked against the arity table (Error("arity")).
  EClassId add(ENode node);
  EClassId add_term(const TermPtr &t);

  EClassId find(EClassId id) const;
  /// Unions two classes. Returns true when they were distinct.
  bool merge(EClassId a, EClassId b);
  void rebuild();
  bool clean() const { return pending_.empty() && !stale_; }

  /// Canonical class ids in ascending order. This and the two views below
  /// reflect the graph as of the last rebuild(); adds into a clean graph
  /// keep them current.
  const std::vector<EClassId> &classes() const { return class_list_; }
  /// Nodes of a canonical class, sorted by `node_less`.
  const std::vector<ENode> &nodes(EClassId c) const;
  /// Canonical classes containing at least one node with operator `op`.
  const std::vector<EClassId> &classes_with(Symbol op) const;

  std::size_t node_count() const { return hashcons_.size(); }
  /// Current number of classes, pending merges included.
  std::size_t class_count() const;
  /// Number of effective unions performed so far.
  std::uint64_t union_count() const { return unions_; }

  /// Looks up the class of a term without adding it.
  std::optional<EClassId> lookup_term(const TermPtr &t) const;
  std::optional<EClassId> lookup(const ENode &node) const;

  /// Fixes the arity of `op`; a later mismatch is an Error("arity").
  /// Variadic operators (`outputs`, `apply`) are exempt.
  void declare(Symbol op, std::size_t arity);
  std::optional<std::size_t> arity(Symbol op) const;

  ENode canonicalize(const ENode &n) const;

private:
  EClassId make_class();

  mutable std::vector<EClassId> parent_;
  std::unordered_map<ENode, EClassId, ENodeHash> hashcons_;
  std::vector<EClassId> pending_;
  bool stale_ = false;
  std::uint64_t unions_ = 0;

  std::vector<EClassId> class_list_;
  std::unordered_map<EClassId, std::vector<ENode>> class_nodes_;
  std::unordered_map<Symbol, std::vector<EClassId>> by_op_;
  std::unordered_map<Symbol, std::size_t> arity_;
};

/// Every term represented by class `c`, up to `limit` terms and `max_depth`
/// levels. Used by tests to check soundness of saturation.
std::vector<TermPtr> enumerate_terms(const EGraph &g, EClassId c, std::size_t limit,
                                     std::size_t max_depth = 16);

} // namespace eqnet
