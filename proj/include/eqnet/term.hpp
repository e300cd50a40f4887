#pragma once

#include "eqnet/symbol.hpp"

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace eqnet {

class Term;
using TermPtr = std::shared_ptr<const Term>;

/// Immutable operator tree (a DAG when subterms are shared). Leaves are
/// primary-input bits `input:<port>:<bit>`, constants, or `def_<k>` names.
class Term {
public:
  Term(Symbol op, std::vector<TermPtr> children)
      : op_(op), children_(std::move(children)) {}

  Symbol op() const { return op_; }
  const std::vector<TermPtr> &children() const { return children_; }
  bool is_leaf() const { return children_.empty(); }

private:
  Symbol op_;
  std::vector<TermPtr> children_;
};

TermPtr make_term(std::string_view op, std::vector<TermPtr> children = {});
TermPtr make_term(Symbol op, std::vector<TermPtr> children = {});
TermPtr input_leaf(std::string_view port, std::size_t bit);

struct InputBit {
  std::string port;
  std::size_t bit = 0;
};
/// Decodes `input:<port>:<bit>`.
std::optional<InputBit> parse_input_symbol(std::string_view op);
std::string input_symbol(std::string_view port, std::size_t bit);

/// Structural equality (not pointer equality).
bool term_equal(const TermPtr &a, const TermPtr &b);

/// Number of distinct (structurally) nodes reachable from `t`.
std::size_t term_dag_size(const TermPtr &t);

/// S-expression rendering. Shared subterms are printed in full at every use.
std::string to_string(const TermPtr &t);

/// Parses a term. A bare atom that is not a nullary operator (`CONST0`,
/// `CONST1`, `def_*`, `input:*`) is shorthand for `input:<atom>:0`.
TermPtr parse_term(std::string_view text);

/// Hash-consing table: returns one shared pointer per structural term.
class TermTable {
public:
  TermPtr intern(Symbol op, std::vector<TermPtr> children);
  TermPtr intern(const TermPtr &t);

private:
  struct Key {
    Symbol op;
    std::vector<const Term *> children;
    bool operator==(const Key &) const = default;
  };
  struct KeyHash {
    std::size_t operator()(const Key &k) const;
  };
  std::unordered_map<Key, TermPtr, KeyHash> table_;
  // original → (original kept alive, canonical)
  std::unordered_map<const Term *, std::pair<TermPtr, TermPtr>> canon_;
};

} // namespace eqnet
