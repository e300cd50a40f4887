#include "circuits.hpp"
#include "reference.hpp"

#include "eqnet/convert.hpp"
#include "eqnet/error.hpp"
#include "eqnet/extract.hpp"
#include "eqnet/identify.hpp"
#include "eqnet/retime.hpp"

#include <doctest.h>

using namespace eqnet;

namespace {

CostModel ha_costs() {
  CostModel cm(1.0);
  cm.set("input", 0).set("proj", 0).set("HalfAdder", 1.5).set("outputs", 0);
  return cm;
}

// Class A = {XOR(a,b), proj0(HA(a,b))}, class B = {AND(a,b), proj1(HA(a,b))}.
struct TwoClass {
  EGraph g;
  EClassId sum, carry;
  TwoClass(bool with_carry) {
    sum = g.add_term(parse_term("(XOR a b)"));
    g.merge(sum, g.add_term(parse_term("(proj0 (HalfAdder a b))")));
    carry = g.add_term(parse_term("(AND a b)"));
    if (with_carry)
      g.merge(carry, g.add_term(parse_term("(proj1 (HalfAdder a b))")));
    g.rebuild();
  }
};

} // namespace

TEST_CASE("single AND class") {
  EGraph g;
  auto r = g.add_term(parse_term("(AND a b)"));
  CostModel cm(1.0);
  cm.set("input", 0.25);
  for (auto s : {extract_greedy(g, {r}, cm), extract_ilp(g, {r}, cm)}) {
    CHECK(s.cost == doctest::Approx(1.5));
    CHECK(to_string(selection_term(s, r)) == "(AND input:a:0 input:b:0)");
    validate_selection(g, s, cm);
  }
}

TEST_CASE("one output alone does not justify a half adder") {
  TwoClass t(false);
  auto s = extract_ilp(t.g, {t.sum}, ha_costs());
  CHECK(s.cost == doctest::Approx(1.0));
  CHECK(s.chosen.at(t.g.find(t.sum)).op.str() == "XOR");
  CHECK(testing::brute_force_subset_cost(t.g, {t.sum}, ha_costs()) == doctest::Approx(1.0));
}

TEST_CASE("both outputs share one half adder") {
  TwoClass t(true);
  auto s = extract_ilp(t.g, {t.sum, t.carry}, ha_costs());
  CHECK(s.cost == doctest::Approx(1.5));
  CHECK(s.chosen.at(t.g.find(t.sum)).op.str() == "proj0");
  CHECK(s.chosen.at(t.g.find(t.carry)).op.str() == "proj1");
  CHECK(testing::brute_force_subset_cost(t.g, {t.sum, t.carry}, ha_costs()) ==
        doctest::Approx(1.5));
  // greedy sees each root alone
  CHECK(extract_greedy(t.g, {t.sum, t.carry}, ha_costs()).cost >= s.cost);
}

TEST_CASE("retiming figure: one register beats two") {
  EGraph g;
  auto r = g.add_term(to_terms(testing::retime_figure(true)));
  run(g, generate_retiming_rules({"AND"}), {10, 1000, 10});
  CostModel cm(0.0);
  cm.set("REG", 1);
  auto s = extract_ilp(g, {r}, cm);
  CHECK(s.cost == doctest::Approx(1.0));
  CHECK(testing::brute_force_subset_cost(g, {r}, cm) == doctest::Approx(1.0));
  CHECK(to_string(selection_term(s, r)) == "(outputs (REG (AND input:a:0 input:b:0)))");
}

TEST_CASE("acyclicity forces the non-cyclic derivation") {
  // class X = {f(X) [cheap, cyclic], g(a) [expensive]}
  EGraph g;
  auto x = g.add_term(parse_term("(g a)"));
  auto fx = g.add({Symbol("f"), {x}});
  g.merge(x, fx);
  g.rebuild();
  CostModel cm(0.0);
  cm.set("g", 5).set("f", 1);
  auto s = extract_ilp(g, {x}, cm);
  CHECK(s.cost == doctest::Approx(5.0));
  CHECK(s.chosen.at(g.find(x)).op.str() == "g");
  CHECK(testing::brute_force_subset_cost(g, {x}, cm) == doctest::Approx(5.0));
  CHECK(extract_greedy(g, {x}, cm).cost == doctest::Approx(5.0));
}

TEST_CASE("exact extraction matches subset enumeration on random graphs") {
  std::mt19937_64 rng(5);
  CostModel cm(1.0);
  cm.set("input", 0.5).set("F0", 2).set("F1", 1).set("F2", 3).set("G0", 1).set("G1", 2)
      .set("G2", 0.5).set("H0", 4).set("H1", 0.25).set("H2", 1);
  for (int i = 0; i < 60; ++i) {
    auto r = testing::random_egraph(rng, 14);
    double ref = testing::brute_force_subset_cost(r.graph, r.roots, cm);
    REQUIRE(ref < testing::kInfeasible);
    auto s = extract_ilp(r.graph, r.roots, cm);
    CHECK(s.cost == doctest::Approx(ref));
    validate_selection(r.graph, s, cm);
    auto gs = extract_greedy(r.graph, r.roots, cm);
    validate_selection(r.graph, gs, cm);
    CHECK(gs.cost >= s.cost - 1e-9);
  }
}

TEST_CASE("greedy never beats exact on saturated circuit graphs") {
  std::mt19937_64 rng(9);
  CostModel cm(1.0);
  cm.set("input", 0).set("outputs", 0);
  for (int i = 0; i < 50; ++i) {
    Netlist n = testing::random_pipeline(rng, 3, 8, 2);
    EGraph g;
    auto r = g.add_term(to_terms(n));
    run(g, bool_rules(), {3, 3000, 5});
    r = g.find(r);
    auto e = extract_ilp(g, {r}, cm, {10.0, true});
    auto gr = extract_greedy(g, {r}, cm);
    CHECK(gr.cost >= e.cost - 1e-9);
  }
}

TEST_CASE("validator catches broken selections") {
  TwoClass t(true);
  auto s = extract_ilp(t.g, {t.sum, t.carry}, ha_costs());
  auto broken = s;
  broken.chosen.erase(broken.chosen.begin());
  CHECK_THROWS_AS(validate_selection(t.g, broken, ha_costs()), InvariantError);
  auto wrong_cost = s;
  wrong_cost.cost += 1;
  CHECK_THROWS_AS(validate_selection(t.g, wrong_cost, ha_costs()), InvariantError);
}

TEST_CASE("cost model file") {
  CostModel cm = CostModel::parse("# costs\nAND 2\nREG 10.5\ndefault 0.5\n");
  CHECK(cm.cost(Symbol("AND")) == 2);
  CHECK(cm.cost(Symbol("REG")) == 10.5);
  CHECK(cm.cost(Symbol("OR")) == 0.5);
  CHECK_THROWS_AS(CostModel::parse("AND"), Error);
  CHECK_THROWS_AS(CostModel::parse("AND two"), Error);
}

TEST_CASE("extraction is deterministic") {
  std::mt19937_64 rng(21);
  CostModel cm(1.0);
  for (int i = 0; i < 10; ++i) {
    auto r = testing::random_egraph(rng, 16);
    auto a = extract_ilp(r.graph, r.roots, cm);
    auto b = extract_ilp(r.graph, r.roots, cm);
    CHECK(a.chosen == b.chosen);
  }
}
