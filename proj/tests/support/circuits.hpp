#pragma once

#include "eqnet/egraph.hpp"
#include "eqnet/netlist.hpp"

#include <cstdint>
#include <random>
#include <string>

namespace eqnet::testing {

/// n-bit ripple-carry adder from raw gates: a, b (n bits), cin -> s (n bits), cout.
Netlist ripple_carry_adder(std::size_t n, bool with_cin = true);

/// XOR + AND on i0, i1 driving s and c.
Netlist half_adder_circuit();

/// Two registers in front of an AND (`two_regs`), or one behind it.
Netlist retime_figure(bool two_regs);

/// Random feed-forward pipeline: gates and registers over `inputs` input
/// bits, at most `max_cells` cells and `max_regs` registers.
Netlist random_pipeline(std::mt19937_64 &rng, std::size_t inputs = 4, std::size_t max_cells = 30,
                        std::size_t max_regs = 6);

/// Two netlists that together contain four copies of
/// (XOR (AND p0 p1) (OR p2 p3)) on different inputs, plus unrelated gates.
std::vector<Netlist> embedded_cone_corpus();

/// Random rebuilt e-graph with at most `max_nodes` nodes, plus its roots.
struct RandomEGraph {
  EGraph graph;
  std::vector<EClassId> roots;
};
RandomEGraph random_egraph(std::mt19937_64 &rng, std::size_t max_nodes = 16);

} // namespace eqnet::testing

namespace eqnet::testing {

/// Path under the repository's tests/corpus directory.
inline std::string corpus_path(const std::string &file) {
  return std::string(EQNET_SOURCE_DIR) + "/tests/corpus/" + file;
}

inline std::string source_path(const std::string &rel) {
  return std::string(EQNET_SOURCE_DIR) + "/" + rel;
}

} // namespace eqnet::testing
