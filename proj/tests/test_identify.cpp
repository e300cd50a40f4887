#include "circuits.hpp"

#include "eqnet/convert.hpp"
#include "eqnet/error.hpp"
#include "eqnet/identify.hpp"
#include "eqnet/netlist_io.hpp"
#include "eqnet/oracle.hpp"

#include <doctest.h>

using namespace eqnet;

namespace {

const LibraryComponent &component(const std::string &name) {
  for (const auto &c : standard_library())
    if (c.name == name)
      return c;
  throw std::logic_error(name);
}

std::size_t raw_gates(const Netlist &n) {
  std::size_t k = 0;
  for (const auto &g : gate_kinds())
    k += n.count_kind(g);
  return k;
}

} // namespace

TEST_CASE("half adder rules") {
  auto rs = component_rules(component("HalfAdder"));
  CHECK(write_rules(rs) == "HalfAdder-S: (XOR ?a ?b) => (proj0 (HalfAdder ?a ?b))\n"
                           "HalfAdder-C: (AND ?a ?b) => (proj1 (HalfAdder ?a ?b))\n");
}

TEST_CASE("mux rule") {
  auto rs = component_rules(component("Mux2"));
  CHECK(write_rules(rs) ==
        "Mux2-Y: (OR (AND ?a (NOT ?s)) (AND ?b ?s)) => (proj0 (Mux2 ?a ?b ?s))\n");
}

TEST_CASE("full adder rules and semantics") {
  const auto &fa = component("FullAdder");
  CHECK(component_rules(fa).size() == 2);
  CHECK_NOTHROW(check_component(fa));
  // the definition module computes a + b + cin
  Netlist def = component_definition(fa);
  auto rows = simulate(def, {{Value3::One, Value3::One, Value3::One}});
  CHECK(rows[0] == Vector3{Value3::One, Value3::One});
}

TEST_CASE("library file round trip and validation") {
  std::string text = read_file(testing::source_path("components/std.lib"));
  auto lib = parse_library(text);
  CHECK(lib.size() == 3);
  CHECK(write_library(lib) == text);
  auto kind = [](const std::string &t) {
    try {
      parse_library(t);
    } catch (const Error &e) {
      return e.kind();
    }
    return std::string();
  };
  CHECK(kind("(component X (inputs a b) (output Y (AND a c)))") == "bad-component");
  CHECK(kind("(component AND (inputs a b) (output Y (OR a b)))") == "bad-component");
  CHECK(kind("(component HalfAdder (inputs a b) (output S (XOR a b)) (output C (OR a b)))") ==
        "bad-component");
  CHECK(kind("(component X (inputs a) (output Y a))") == "bad-component");
  CHECK(kind("(component X (inputs a b) (output Y (AND a b)) (output Y (OR a b)))") ==
        "bad-component");
  CHECK(kind("(component X (inputs a b) (output Y (AND a b)))") == "");
}

TEST_CASE("shipped identify rules match the standard library") {
  std::vector<Rewrite> rs;
  for (const auto &c : standard_library()) {
    auto r = component_rules(c);
    rs.insert(rs.end(), r.begin(), r.end());
  }
  CHECK(write_rules(rs) == read_file(testing::source_path("rules/identify.rules")));
  CHECK(std::string(bool_rules_text()) == read_file(testing::source_path("rules/bool.rules")));
}

TEST_CASE("the half adder circuit becomes one HalfAdder") {
  Netlist n = testing::half_adder_circuit();
  auto r = identify(n, standard_library());
  CHECK(r.netlist.count_kind("HalfAdder") == 1);
  CHECK(raw_gates(r.netlist) == 0);
  REQUIRE(r.report.instances.size() == 1);
  CHECK(r.report.instances[0].kind == "HalfAdder");
  CHECK(r.report.instances[0].pins.at("A") == bit("i0"));
  CHECK(r.report.cost_before == doctest::Approx(2.0));
  CHECK(r.report.cost_after == doctest::Approx(1.5));
  Verdict v = check_equiv(n, r.netlist);
  CHECK(v.equivalent);
  CHECK(v.exhaustive);
}

TEST_CASE("a lone XOR stays a gate") {
  NetlistBuilder b("x");
  b.input("a").input("b").output("y");
  b.cell("XOR", "g", {{"A", bit("a")}, {"B", bit("b")}, {"Y", bit("y")}});
  auto r = identify(b.build(), standard_library());
  CHECK(r.netlist.count_kind("XOR") == 1);
  CHECK(r.netlist.count_kind("HalfAdder") == 0);
  CHECK(r.report.instances.empty());
  CHECK_FALSE(r.report.near_misses.empty());
}

TEST_CASE("commuted AND still pairs with the XOR") {
  NetlistBuilder b("ha");
  b.input("a").input("b").output("s").output("c");
  b.cell("XOR", "x", {{"A", bit("a")}, {"B", bit("b")}, {"Y", bit("s")}});
  b.cell("AND", "g", {{"A", bit("b")}, {"B", bit("a")}, {"Y", bit("c")}});
  Netlist n = b.build();
  auto r = identify(n, standard_library());
  CHECK(r.netlist.count_kind("HalfAdder") == 1);
  CHECK(raw_gates(r.netlist) == 0);
  CHECK(check_equiv(n, r.netlist).equivalent);

  IdentifyConfig no_bool;
  no_bool.use_bool_rules = false;
  auto plain = identify(n, standard_library(), no_bool);
  CHECK(check_equiv(n, plain.netlist).equivalent);
}

TEST_CASE("4-bit adder becomes four full adders") {
  Netlist n = testing::ripple_carry_adder(4);
  auto r = identify(n, standard_library());
  CHECK(r.netlist.count_kind("FullAdder") == 4);
  CHECK(raw_gates(r.netlist) == 0);
  CHECK(r.report.instances.size() == 4);
  CHECK_FALSE(r.report.extraction_timed_out);
  CHECK(check_equiv(n, r.netlist).equivalent);
}

TEST_CASE("adder without carry-in: first stage may be a half adder") {
  Netlist n = testing::ripple_carry_adder(3, false);
  auto r = identify(n, standard_library());
  CHECK(r.netlist.count_kind("FullAdder") + r.netlist.count_kind("HalfAdder") == 3);
  CHECK(check_equiv(n, r.netlist).equivalent);
}

TEST_CASE("user components are emitted as definitions") {
  auto lib = parse_library("(component Maj (inputs a b c)\n"
                           "  (output Y (OR (AND a b) (OR (AND a c) (AND b c)))))\n");
  NetlistBuilder b("m");
  b.input("x", 3).output("y");
  for (const char *w : {"t0", "t1", "t2", "t3"})
    b.wire(w);
  b.cell("AND", "g0", {{"A", bit("x", 0)}, {"B", bit("x", 1)}, {"Y", bit("t0")}});
  b.cell("AND", "g1", {{"A", bit("x", 0)}, {"B", bit("x", 2)}, {"Y", bit("t1")}});
  b.cell("AND", "g2", {{"A", bit("x", 1)}, {"B", bit("x", 2)}, {"Y", bit("t2")}});
  b.cell("OR", "o0", {{"A", bit("t1")}, {"B", bit("t2")}, {"Y", bit("t3")}});
  b.cell("OR", "o1", {{"A", bit("t0")}, {"B", bit("t3")}, {"Y", bit("y")}});
  Netlist n = b.build();
  auto r = identify(n, lib);
  CHECK(r.netlist.count_kind("Maj") == 1);
  REQUIRE(r.netlist.definitions.size() == 1);
  CHECK(r.netlist.definitions[0].name == "Maj");
  CHECK(check_equiv(n, r.netlist).equivalent);
  // and it survives the file formats
  for (auto fmt : {NetlistFormat::Json, NetlistFormat::Sexpr})
    CHECK(check_equiv(n, parse_netlist(write_netlist(r.netlist, fmt), fmt)).equivalent);
}

TEST_CASE("cost model keeps components profitable only when shared") {
  CostModel cm = identify_cost_model(standard_library());
  CHECK(cm.cost(Symbol("HalfAdder")) < 2);
  CHECK(cm.cost(Symbol("HalfAdder")) > 1);
  CHECK(cm.cost(Symbol("FullAdder")) < 5);
  CHECK(cm.cost(Symbol("FullAdder")) > 3);
  CHECK(cm.cost(Symbol("proj0")) == 0);
}

TEST_CASE("identify report JSON") {
  auto r = identify(testing::half_adder_circuit(), standard_library());
  std::string j = r.report.to_json();
  CHECK(j.find("\"instances\"") != std::string::npos);
  CHECK(j.find("HalfAdder") != std::string::npos);
}
