#pragma once

#include "eqnet/netlist.hpp"
#include "eqnet/rewrite.hpp"
#include "eqnet/term.hpp"

#include <string>
#include <vector>

namespace eqnet {

/// Least general generalisation. Mismatching subterm pairs become
/// variables `?p0, ?p1, ...` in first-occurrence order; a repeated pair
/// reuses its variable.
Pattern anti_unify(const TermPtr &a, const TermPtr &b);

/// Renames variables to `?p0..` in first-occurrence order.
Pattern canonical_pattern(const Pattern &p);

struct Abstraction {
  std::string name;
  Pattern body;
  std::size_t arity = 0;
  std::size_t matches = 0;
  double score = 0;
};

struct LearnConfig {
  std::size_t max_arity = 4;
  std::size_t min_matches = 2;
  /// Pair enumeration is exhaustive up to this many pairs; beyond it only
  /// the largest `beam_size` subterms per operator are paired.
  std::size_t max_pairs = 10000;
  std::size_t beam_size = 64;
};

/// Ranked candidates, best first; names `def_0, def_1, ...` in rank order.
std::vector<Abstraction> discover(const std::vector<Netlist> &corpus, const LearnConfig &cfg = {});

/// Rewrites body matches into `(apply def_k ...)` cells and adds the
/// `def_k` definition module where used. Throws Error("name-collision").
std::vector<Netlist> abstract(const std::vector<Netlist> &corpus, const Abstraction &a);

/// Definition module of an abstraction: inputs p0..pm, output Y.
Netlist abstraction_definition(const Abstraction &a);

/// Replaces every cell whose kind is a definition module by the module's
/// body, recursively. Definitions are dropped from the result.
Netlist inline_definitions(const Netlist &n);

std::string learn_report_json(const std::vector<Abstraction> &ranked);

} // namespace eqnet
