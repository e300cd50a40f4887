#pragma once

#include "eqnet/egraph.hpp"

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace eqnet {

/// Operator costs. Lookup order: exact symbol, then the family key
/// (`input` for `input:*`, `proj` for `proj<k>`, `def` for `def_*`), then
/// the default.
class CostModel {
public:
  explicit CostModel(double default_cost = 1.0) : default_(default_cost) {}

  CostModel &set(std::string_view op, double cost);
  double cost(Symbol op) const;
  double default_cost() const { return default_; }
  const std::map<std::string, double, std::less<>> &entries() const { return costs_; }

  /// `symbol cost` pairs, one per line; `#` comments; `default <c>` sets the
  /// fallback. Errors: "syntax".
  static CostModel parse(std::string_view text);

private:
  double default_;
  std::map<std::string, double, std::less<>> costs_;
};

struct Selection {
  /// Canonical class → chosen node, for every class reachable from the roots.
  std::map<EClassId, ENode> chosen;
  std::vector<EClassId> roots;
  /// DAG cost: each chosen node counted once.
  double cost = 0;
  /// Set when the ILP search hit its time limit; the selection is the best
  /// incumbent found, not necessarily optimal.
  bool timed_out = false;
};

/// Closed + acyclic + cost consistent. Throws InvariantError on violation.
void validate_selection(const EGraph &g, const Selection &s, const CostModel &cm);

/// Rebuilds the chosen term for a root class (shared subterms shared).
TermPtr selection_term(const Selection &s, EClassId root);

/// Greedy bottom-up extraction minimising per-class tree cost.
/// Throws Error("infeasible").
Selection extract_greedy(const EGraph &g, const std::vector<EClassId> &roots, const CostModel &cm);

struct IlpOptions {
  double time_limit_seconds = 30.0;
  /// Remove nodes dominated by a sibling with cost ≤ and children ⊆.
  bool prune_dominated = true;
};

/// Exact DAG-cost extraction by depth-first branch and bound. Ties prefer
/// fewer chosen nodes, then the lexicographically smallest choice vector.
/// Throws Error("infeasible").
Selection extract_ilp(const EGraph &g, const std::vector<EClassId> &roots, const CostModel &cm,
                      const IlpOptions &opt = {});

/// The 0/1 formulation of DAG extraction: a binary per e-node, an integer
/// level per class, root/child-coverage/big-M acyclicity constraints.
struct IlpProblem {
  struct Var {
    std::string name;
    EClassId eclass = 0;
    std::size_t index = 0; ///< node index within class
    double cost = 0;
  };
  std::vector<EClassId> classes; ///< reachable classes, ascending
  std::vector<EClassId> roots;
  std::vector<Var> node_vars;
  /// children[i] = canonical child classes of node_vars[i]
  std::vector<std::vector<EClassId>> children;
  std::size_t level_bound() const { return classes.size(); }
};

IlpProblem build_ilp(const EGraph &g, const std::vector<EClassId> &roots, const CostModel &cm);

/// CPLEX-style LP text: Minimize / Subject To / Bounds / Binaries / Generals.
/// Variables are named `x_<class>_<k>` and `l_<class>`.
std::string export_lp(const IlpProblem &p);

} // namespace eqnet
