#include "circuits.hpp"

#include "eqnet/convert.hpp"
#include "eqnet/error.hpp"
#include "eqnet/oracle.hpp"

#include <doctest.h>

using namespace eqnet;

namespace {

constexpr Value3 O = Value3::Zero, I = Value3::One, X = Value3::X;

Netlist two_input(const std::string &expr) {
  Interface iface;
  iface.ports = {{"a", Direction::Input, 1}, {"b", Direction::Input, 1}, {"y", Direction::Output, 1}};
  return from_terms(parse_term("(outputs " + expr + ")"), iface);
}

} // namespace

TEST_CASE("three-valued gate tables") {
  CHECK(v_and(O, X) == O);
  CHECK(v_and(I, X) == X);
  CHECK(v_or(I, X) == I);
  CHECK(v_or(O, X) == X);
  CHECK(v_xor(I, X) == X);
  CHECK(v_not(X) == X);
  CHECK(v_mux(I, I, X) == I);
  CHECK(v_mux(O, I, X) == X);
  CHECK(v_mux(O, I, I) == I);
}

TEST_CASE("XOR of 1 and 1 is 0") {
  auto out = simulate(two_input("(XOR a b)"), {{I, I}});
  CHECK(out[0] == Vector3{O});
}

TEST_CASE("half adder cell on 1,1") {
  NetlistBuilder b("ha");
  b.input("a").input("b").output("s").output("c");
  b.cell("HalfAdder", "h", {{"A", bit("a")}, {"B", bit("b")}, {"S", bit("s")}, {"C", bit("c")}});
  auto out = simulate(b.build(), {{I, I}});
  CHECK(out[0] == Vector3{O, I});
}

TEST_CASE("register delays by one cycle and starts unknown") {
  Netlist n = from_terms(parse_term("(outputs (REG a))"));
  auto out = simulate(n, {{I}, {O}, {I}});
  CHECK(out[0] == Vector3{X});
  CHECK(out[1] == Vector3{I});
  CHECK(out[2] == Vector3{O});
  CHECK(max_path_registers(n) == 1);
}

TEST_CASE("XOR equals its sum-of-products form") {
  Verdict v = check_equiv(two_input("(XOR a b)"), two_input("(OR (AND a (NOT b)) (AND (NOT a) b))"));
  CHECK(v.equivalent);
  CHECK(v.exhaustive);
  CHECK(v.vectors == 4);
  CHECK(v.coverage() == "exhaustive(4 rows)");
}

TEST_CASE("AND differs from OR at a=1, b=0 first") {
  Verdict v = check_equiv(two_input("(AND a b)"), two_input("(OR a b)"));
  CHECK_FALSE(v.equivalent);
  REQUIRE(v.counterexample);
  const auto &cx = *v.counterexample;
  REQUIRE(cx.stimulus.size() == 1);
  // rows are enumerated with the first input bit as the least significant
  CHECK(cx.stimulus[0] == Vector3{I, O});
  CHECK(cx.value_a == O);
  CHECK(cx.value_b == I);
  std::string j = verdict_json(v, Simulator(two_input("(AND a b)")).input_bits());
  CHECK(j.find("\"equivalent\": false") != std::string::npos);
  CHECK(j.find("\"a[0]\": \"1\"") != std::string::npos);
}

TEST_CASE("retiming figure sides are equivalent after one cycle") {
  Verdict v = check_equiv(testing::retime_figure(true), testing::retime_figure(false));
  CHECK(v.equivalent);
  CHECK(v.sequential);
  CHECK(v.warmup == 1);
  // extra register on one side is caught
  Netlist late = from_terms(parse_term("(outputs (REG (REG (AND a b))))"),
                            interface_of(testing::retime_figure(false)));
  CHECK_FALSE(check_equiv(testing::retime_figure(true), late).equivalent);
}

TEST_CASE("sampling kicks in above the exhaustive limit") {
  Netlist n = testing::ripple_carry_adder(8);
  EquivConfig cfg;
  cfg.max_exhaustive_bits = 12;
  cfg.samples = 100;
  cfg.seed = 42;
  Verdict v = check_equiv(n, n, cfg);
  CHECK(v.equivalent);
  CHECK_FALSE(v.exhaustive);
  CHECK(v.vectors == 100);
  CHECK(v.coverage() == "sampled(100, seed 42)");
  cfg.max_exhaustive_bits = 17;
  Verdict full = check_equiv(n, n, cfg);
  CHECK(full.exhaustive);
  CHECK(full.vectors == (1u << 17));
}

TEST_CASE("sampled check finds a planted bug deterministically") {
  Netlist good = testing::ripple_carry_adder(8);
  Netlist bad = good;
  for (auto &c : bad.cells)
    if (c.instance == "a1_5")
      c.kind = "OR";
  EquivConfig cfg;
  cfg.seed = 7;
  Verdict a = check_equiv(good, bad, cfg), b = check_equiv(good, bad, cfg);
  CHECK_FALSE(a.equivalent);
  CHECK(a.counterexample->stimulus == b.counterexample->stimulus);
}

TEST_CASE("mismatched ports are an error, not a verdict") {
  try {
    check_equiv(testing::half_adder_circuit(), testing::retime_figure(true));
    FAIL("expected an error");
  } catch (const Error &e) {
    CHECK(e.kind() == "port-mismatch");
  }
}

TEST_CASE("combinational cycles are rejected by the simulator") {
  Netlist n;
  n.name = "cyc";
  n.ports = {{"a", Direction::Input, 1}, {"y", Direction::Output, 1}};
  n.nets = {{"a", 1}, {"y", 1}, {"t", 1}};
  n.cells = {{"g", "AND", {{"A", bit("a")}, {"B", bit("t")}, {"Y", bit("y")}}},
             {"h", "NOT", {{"A", bit("y")}, {"Y", bit("t")}}}};
  CHECK_THROWS_AS(Simulator{n}, Error);
}

TEST_CASE("path depth") {
  CHECK(max_path_registers(testing::ripple_carry_adder(2)) == 0);
  CHECK(max_path_registers(testing::retime_figure(true)) == 1);
}
