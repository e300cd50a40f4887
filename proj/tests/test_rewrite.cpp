#include "circuits.hpp"

#include "eqnet/convert.hpp"
#include "eqnet/error.hpp"
#include "eqnet/identify.hpp"
#include "eqnet/oracle.hpp"
#include "eqnet/rewrite.hpp"

#include <doctest.h>

using namespace eqnet;

namespace {

Netlist single_output(const TermPtr &t) {
  Interface iface;
  for (const char *p : {"a", "b", "c", "d"})
    iface.ports.push_back({p, Direction::Input, 1});
  iface.ports.push_back({"y", Direction::Output, 1});
  return from_terms(make_term("outputs", {t}), iface);
}

} // namespace

TEST_CASE("directed rule parses") {
  auto rs = parse_rules("and-comm: (AND ?a ?b) => (AND ?b ?a)\n");
  REQUIRE(rs.size() == 1);
  CHECK(rs[0].name == "and-comm");
  CHECK_FALSE(rs[0].bidirectional);
  CHECK(rs[0].lhs.to_string() == "(AND ?a ?b)");
  CHECK(rs[0].rhs.to_string() == "(AND ?b ?a)");
}

TEST_CASE("bidirectional rule parses") {
  auto rs = parse_rules("# retiming\nretime-and: (REG (AND ?a ?b)) <=> (AND (REG ?a) (REG ?b))\n");
  REQUIRE(rs.size() == 1);
  CHECK(rs[0].bidirectional);
  CHECK(write_rules(rs) == "retime-and: (REG (AND ?a ?b)) <=> (AND (REG ?a) (REG ?b))\n");
}

TEST_CASE("unbound right-hand variable is rejected") {
  try {
    parse_rules("bad: (AND ?a ?b) => (OR ?a ?c)");
    FAIL("expected an error");
  } catch (const Error &e) {
    CHECK(e.kind() == "unbound-variable");
    CHECK(std::string(e.what()).find("?c") != std::string::npos);
  }
  // the reverse direction of <=> must bind too
  CHECK_THROWS_AS(parse_rules("bad: (AND ?a ?b) <=> ?a"), Error);
  CHECK_THROWS_AS(parse_rules("nocolon (AND ?a ?b) => ?a"), Error);
  CHECK_THROWS_AS(parse_rules("x: (AND ?a ?b => ?a"), Error);
}

TEST_CASE("commutativity saturates quickly without new classes") {
  EGraph g;
  g.add_term(parse_term("(AND a b)"));
  auto classes = g.class_count();
  auto rep = run(g, parse_rules("and-comm: (AND ?a ?b) => (AND ?b ?a)"), {30, 1000, 10});
  CHECK(rep.stop == StopReason::Saturated);
  CHECK(rep.iterations <= 2);
  CHECK(g.lookup_term(parse_term("(AND b a)")).has_value());
  CHECK(g.class_count() == classes);
}

TEST_CASE("no rules: saturated after one iteration, graph unchanged") {
  EGraph g;
  g.add_term(parse_term("(OR a (NOT b))"));
  auto nodes = g.node_count();
  auto rep = run(g, {}, {30, 1000, 10});
  CHECK(rep.stop == StopReason::Saturated);
  CHECK(rep.iterations == 1);
  CHECK(g.node_count() == nodes);
}

TEST_CASE("zero iteration limit does nothing") {
  EGraph g;
  g.add_term(parse_term("(AND a b)"));
  auto rep = run(g, bool_rules(), {0, 1000, 10});
  CHECK(rep.iterations == 0);
  CHECK(rep.stop == StopReason::IterLimit);
  CHECK(g.node_count() == 3);
}

TEST_CASE("AC on a 4-input AND tree keeps every term equivalent") {
  TermPtr orig = parse_term("(AND (AND a b) (AND c d))");
  EGraph g;
  auto root = g.add_term(orig);
  auto rules = parse_rules("c: (AND ?a ?b) => (AND ?b ?a)\n"
                           "a: (AND ?a (AND ?b ?c)) <=> (AND (AND ?a ?b) ?c)\n");
  auto rep = run(g, rules, {100, 5000, 30});
  CHECK((rep.stop == StopReason::Saturated || rep.stop == StopReason::NodeLimit));
  auto terms = enumerate_terms(g, g.find(root), 1000);
  CHECK(terms.size() > 10);
  Netlist ref = single_output(orig);
  for (const auto &t : terms) {
    Netlist n = single_output(t);
    CHECK(check_equiv(ref, n).equivalent);
  }
}

TEST_CASE("node limit stops a growing run") {
  EGraph g;
  g.add_term(parse_term("(AND (AND a b) (AND c (AND d e)))"));
  auto rep = run(g, bool_rules(), {100, 200, 30});
  CHECK(rep.stop == StopReason::NodeLimit);
}

TEST_CASE("run report counts matches per rule and serialises") {
  EGraph g;
  g.add_term(parse_term("(outputs (AND a b) (NOT (NOT c)))"));
  auto rep = run(g, bool_rules(), {2, 1000, 10});
  bool found = false;
  for (const auto &[name, count] : rep.rule_matches)
    if (name == "not-not")
      found = count >= 1;
  CHECK(found);
  CHECK(rep.to_json().find("\"stop_reason\"") != std::string::npos);
}

TEST_CASE("runs are deterministic") {
  auto once = [] {
    EGraph g;
    g.add_term(to_terms(testing::ripple_carry_adder(2)));
    auto rep = run(g, bool_rules(), {4, 5000, 30});
    return std::make_pair(rep, g.node_count());
  };
  CHECK(once() == once());
}
