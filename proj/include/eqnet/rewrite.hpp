#pragma once

#include "eqnet/egraph.hpp"

#include <chrono>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace eqnet {

/// Pattern tree: an operator node with child patterns, or a variable `?x`.
class Pattern {
public:
  static Pattern var(std::string name);
  static Pattern node(std::string_view op, std::vector<Pattern> children = {});
  static Pattern node(Symbol op, std::vector<Pattern> children = {});

  bool is_var() const { return is_var_; }
  const std::string &var_name() const { return var_; }
  Symbol op() const { return op_; }
  const std::vector<Pattern> &children() const { return children_; }

  /// Variables in first-occurrence order.
  std::vector<std::string> variables() const;
  /// Number of operator (non-variable) nodes.
  std::size_t size() const;
  std::string to_string() const;

  bool operator==(const Pattern &o) const;

private:
  bool is_var_ = false;
  std::string var_;
  Symbol op_;
  std::vector<Pattern> children_;
};

/// `?x` atoms are variables; other atoms follow the term syntax, except that
/// bare names are operators only if nullary-looking (CONST0 etc.) and input
/// shorthands otherwise.
Pattern parse_pattern(std::string_view text);
Pattern pattern_from_term(const TermPtr &t);
/// Instantiates a variable-free pattern (or one whose variables are given).
TermPtr pattern_to_term(const Pattern &p, const std::map<std::string, TermPtr> &subst = {});

/// Variable bindings in the pattern's first-occurrence variable order.
struct Match {
  EClassId eclass;
  std::vector<EClassId> bindings;

  bool operator==(const Match &) const = default;
  auto operator<=>(const Match &) const = default;
};

/// All (class, substitution) pairs such that the substituted pattern is
/// represented in the class. Sorted by class id, then bindings.
std::vector<Match> ematch(const EGraph &g, const Pattern &p);

/// Adds the pattern under the substitution and returns its class.
EClassId instantiate(EGraph &g, const Pattern &p, const std::vector<std::string> &vars,
                     const std::vector<EClassId> &bindings);

struct Rewrite {
  std::string name;
  Pattern lhs;
  Pattern rhs;
  bool bidirectional = false;
};

/// Checks that every right-hand variable is bound on the left (both ways
/// for bidirectional rules). Throws Error("unbound-variable").
void check_rewrite(const Rewrite &r);

/// Rule file: `name: LHS => RHS` or `name: LHS <=> RHS`, `#` comments.
/// Errors: "syntax", "unbound-variable", "duplicate-rule".
std::vector<Rewrite> parse_rules(std::string_view text);
std::string write_rules(const std::vector<Rewrite> &rules);

struct RunLimits {
  std::size_t max_iterations = 30;
  std::size_t max_enodes = 20000;
  double max_seconds = 60.0;
};

enum class StopReason { Saturated, IterLimit, NodeLimit, TimeLimit };
std::string to_string(StopReason r);

struct RunReport {
  std::size_t iterations = 0;
  StopReason stop = StopReason::Saturated;
  std::size_t enodes = 0;
  std::size_t eclasses = 0;
  /// Per directed rule (bidirectional rules contribute `name` and
  /// `name~rev`), total matches over all iterations.
  std::vector<std::pair<std::string, std::size_t>> rule_matches;

  bool operator==(const RunReport &) const = default;
  std::string to_json() const;
};

/// Equality saturation. Each iteration matches every rule on the rebuilt
/// graph, applies all matches in rule order, then rebuilds. Nodes are never
/// removed.
RunReport run(EGraph &g, const std::vector<Rewrite> &rules, const RunLimits &limits);

} // namespace eqnet
