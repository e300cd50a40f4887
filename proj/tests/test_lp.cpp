#include "circuits.hpp"

#include "eqnet/convert.hpp"
#include "eqnet/error.hpp"
#include "eqnet/extract.hpp"
#include "eqnet/identify.hpp"
#include "eqnet/lp.hpp"

#include <doctest.h>

using namespace eqnet;

namespace {

struct HaGraph {
  EGraph g;
  EClassId sum, carry;
  CostModel cm{1.0};
  HaGraph() {
    sum = g.add_term(parse_term("(XOR a b)"));
    g.merge(sum, g.add_term(parse_term("(proj0 (HalfAdder a b))")));
    carry = g.add_term(parse_term("(AND a b)"));
    g.merge(carry, g.add_term(parse_term("(proj1 (HalfAdder a b))")));
    g.rebuild();
    sum = g.find(sum);
    carry = g.find(carry);
    cm.set("input", 0).set("proj", 0).set("HalfAdder", 1.5);
  }
};

std::size_t count_lines_starting(const std::string &text, const std::string &prefix) {
  std::size_t n = 0, pos = 0;
  while ((pos = text.find("\n " + prefix, pos)) != std::string::npos) {
    ++n;
    ++pos;
  }
  return n;
}

} // namespace

TEST_CASE("empty graph exports an empty program") {
  EGraph g;
  std::string lp = export_lp(build_ilp(g, {}, CostModel{}));
  CHECK(lp.find("Subject To\nBounds") != std::string::npos);
  auto sol = solve_lp(parse_lp(lp));
  REQUIRE(sol);
  CHECK(sol->objective == 0);
}

TEST_CASE("half-adder example: variables and root constraints") {
  HaGraph h;
  IlpProblem p = build_ilp(h.g, {h.sum, h.carry}, h.cm);
  std::size_t in_roots = 0;
  for (const auto &v : p.node_vars)
    in_roots += v.eclass == h.sum || v.eclass == h.carry;
  CHECK(in_roots == 4);
  CHECK(p.node_vars.size() == 7); // plus HalfAdder, a, b
  std::string text = export_lp(p);
  CHECK(count_lines_starting(text, "root_") == 2);
  LinearProgram lp = parse_lp(text);
  std::size_t binaries = 0;
  for (const auto &v : lp.vars)
    binaries += v.binary;
  CHECK(binaries == 7);
}

TEST_CASE("re-imported LP reaches the extraction optimum") {
  HaGraph h;
  auto sol = solve_lp(parse_lp(export_lp(build_ilp(h.g, {h.sum, h.carry}, h.cm))));
  REQUIRE(sol);
  CHECK(sol->objective == doctest::Approx(extract_ilp(h.g, {h.sum, h.carry}, h.cm).cost));

  std::mt19937_64 rng(13);
  CostModel cm(1.0);
  cm.set("input", 0).set("F1", 0.5).set("G2", 2).set("H0", 3);
  for (int i = 0; i < 25; ++i) {
    auto r = testing::random_egraph(rng, 10);
    auto s = extract_ilp(r.graph, r.roots, cm);
    auto lp = solve_lp(parse_lp(export_lp(build_ilp(r.graph, r.roots, cm))));
    REQUIRE(lp);
    CHECK(lp->objective == doctest::Approx(s.cost));
  }
}

TEST_CASE("re-imported LP of a saturated half adder") {
  EGraph g;
  auto root = g.add_term(to_terms(testing::half_adder_circuit()));
  std::vector<Rewrite> rules;
  for (const auto &c : standard_library()) {
    auto r = component_rules(c);
    rules.insert(rules.end(), r.begin(), r.end());
  }
  run(g, rules, {4, 5000, 10});
  root = g.find(root);
  CostModel cm = identify_cost_model(standard_library());
  auto sol = solve_lp(parse_lp(export_lp(build_ilp(g, {root}, cm))));
  REQUIRE(sol);
  CHECK(sol->objective == doctest::Approx(extract_ilp(g, {root}, cm).cost));
}

TEST_CASE("LP parser basics") {
  auto lp = parse_lp("Minimize\n obj: 2 x + 3 y\nSubject To\n c1: x + y >= 1\n"
                     " c2: x - y <= 0\nBinaries\n x\n y\nEnd\n");
  REQUIRE(lp.find("x"));
  CHECK(lp.constraints.size() == 2);
  auto sol = solve_lp(lp);
  REQUIRE(sol);
  CHECK(sol->objective == 3); // y alone; x needs y as well
  CHECK(sol->values[*lp.find("y")] == 1);

  auto infeasible = parse_lp("Minimize\n obj: x\nSubject To\n c: x >= 2\nBinaries\n x\nEnd\n");
  CHECK_FALSE(solve_lp(infeasible).has_value());
  CHECK_THROWS_AS(parse_lp("Maximize\n obj: x\nEnd\n"), Error);
  CHECK_THROWS_AS(parse_lp("Minimize\n obj: x +\nSubject To\n c: >= 1\nEnd\n"), Error);
}
