#include "circuits.hpp"

#include "eqnet/error.hpp"
#include "eqnet/identify.hpp"
#include "eqnet/netlist_io.hpp"
#include "eqnet/oracle.hpp"
#include "eqnet/reroll.hpp"

#include <doctest.h>

using namespace eqnet;

namespace {

Netlist adder4_fa() { return identify(testing::ripple_carry_adder(4), standard_library()).netlist; }

// n XORs: y[i] = a[order[i]] ^ b[i]
Netlist xor_bank(const std::vector<std::size_t> &order) {
  std::size_t n = order.size();
  NetlistBuilder b("bank");
  b.input("a", n).input("b", n).output("y", n);
  for (std::size_t i = 0; i < n; ++i)
    b.cell("XOR", "x" + std::to_string(i),
           {{"A", bit("a", order[i])}, {"B", bit("b", i)}, {"Y", bit("y", i)}});
  return b.build();
}

} // namespace

TEST_CASE("four full adders form one group") {
  Netlist n = adder4_fa();
  auto gs = find_groups(n);
  REQUIRE(gs.size() == 1);
  CHECK(gs[0].kind == "FullAdder");
  CHECK(gs[0].cells.size() == 4);
}

TEST_CASE("distinct gate kinds form no group") {
  CHECK(find_groups(testing::half_adder_circuit()).empty());
}

TEST_CASE("eight XORs on a[i], b[i] form a group of eight") {
  Netlist n = xor_bank({0, 1, 2, 3, 4, 5, 6, 7});
  auto gs = find_groups(n);
  REQUIRE(gs.size() == 1);
  CHECK(gs[0].cells.size() == 8);
  auto m = infer_index_maps(n, gs[0]);
  REQUIRE(m);
  CHECK(std::get<AffineIndex>(m->pins.at("A")) == AffineIndex{"a", 0, 1});
  CHECK(std::get<AffineIndex>(m->pins.at("Y")) == AffineIndex{"y", 0, 1});
}

TEST_CASE("reversed wiring fits with a negative stride") {
  Netlist n = xor_bank({3, 2, 1, 0});
  auto gs = find_groups(n);
  auto m = infer_index_maps(n, gs.at(0));
  REQUIRE(m);
  CHECK(std::get<AffineIndex>(m->pins.at("A")) == AffineIndex{"a", 3, -1});
  LoopForm lf = reroll(n);
  CHECK(lf.loops.size() == 1);
  CHECK(check_equiv(n, unroll(lf)).equivalent);
}

TEST_CASE("carry chain is recognised") {
  Netlist n = adder4_fa();
  auto m = infer_index_maps(n, find_groups(n).at(0));
  REQUIRE(m);
  CHECK(std::get<ChainIndex>(m->pins.at("Cin")) == ChainIndex{"Cout", 1});
  CHECK(std::get<ChainIndex>(m->pins.at("Cout")) == ChainIndex{"Cout", 0});
  CHECK(std::get<AffineIndex>(m->pins.at("A")) == AffineIndex{"a", 0, 1});
}

TEST_CASE("4-bit adder rerolls into one loop and back") {
  Netlist n = adder4_fa();
  RerollReport rep;
  LoopForm lf = reroll(n, {}, &rep);
  REQUIRE(lf.loops.size() == 1);
  CHECK(lf.loops[0].range == 4);
  CHECK(lf.cells.empty());
  CHECK(rep.rerolled_kinds == std::vector<std::string>{"FullAdder"});
  CHECK(lf.wires.count("fulladder_cout_chain"));
  Netlist back = unroll(lf);
  CHECK(back.count_kind("FullAdder") == 4);
  CHECK(check_equiv(n, back).equivalent);
  CHECK(check_equiv(testing::ripple_carry_adder(4), back).equivalent);
}

TEST_CASE("generic figure: n+1 gates over a[i], b[i] into c[i]") {
  for (std::size_t width : {2u, 5u, 9u}) {
    NetlistBuilder b("fig");
    b.input("a", width).input("b", width).output("c", width);
    for (std::size_t i = 0; i < width; ++i)
      b.cell("AND", "g" + std::to_string(i),
             {{"A", bit("a", i)}, {"B", bit("b", i)}, {"Y", bit("c", i)}});
    Netlist n = b.build();
    LoopForm lf = reroll(n, {2});
    REQUIRE(lf.loops.size() == 1);
    CHECK(lf.loops[0].range == width);
    REQUIRE(lf.loops[0].body.size() == 1);
    CHECK(lf.loops[0].body[0].kind == "AND");
    CHECK(check_equiv(n, unroll(lf)).equivalent);
  }
}

TEST_CASE("permuted wiring stays residual") {
  Netlist n = xor_bank({0, 2, 1});
  RerollReport rep;
  LoopForm lf = reroll(n, {}, &rep);
  CHECK(lf.loops.empty());
  CHECK(lf.cells.size() == 3);
  CHECK(rep.unfit_kinds == std::vector<std::string>{"XOR"});
  CHECK(check_equiv(n, unroll(lf)).equivalent);
}

TEST_CASE("scattered internal outputs are packed into a vector") {
  // NOT on each input bit into separate wires, then an AND bank reads them.
  NetlistBuilder b("packed");
  b.input("a", 4).input("b", 4).output("y", 4);
  for (int i = 0; i < 4; ++i) {
    std::string w = "t" + std::to_string(i);
    b.wire(w);
    b.cell("NOT", "n" + std::to_string(i), {{"A", bit("a", i)}, {"Y", bit(w)}});
    b.cell("AND", "g" + std::to_string(i), {{"A", bit(w)}, {"B", bit("b", i)}, {"Y", bit("y", i)}});
  }
  Netlist n = b.build();
  LoopForm lf = reroll(n);
  CHECK(lf.loops.size() == 2);
  CHECK(lf.cells.empty());
  CHECK(check_equiv(n, unroll(lf)).equivalent);
}

TEST_CASE("range-one loop equals its single instance") {
  LoopForm lf;
  lf.ports = {{"a", Direction::Input, 1}, {"b", Direction::Input, 1}, {"y", Direction::Output, 1}};
  lf.loops.push_back({"i", 1, {{"AND", {{"A", {"a", 0, 0}}, {"B", {"b", 0, 0}}, {"Y", {"y", 0, 0}}}}}});
  Netlist n = unroll(lf);
  REQUIRE(n.cells.size() == 1);
  CHECK(n.cells[0].instance == "and_l0_0");
  NetlistBuilder b("top");
  b.input("a").input("b").output("y");
  b.cell("AND", "and_l0_0", {{"A", bit("a")}, {"B", bit("b")}, {"Y", bit("y")}});
  CHECK(same_netlist(n, b.build()));
}

TEST_CASE("out-of-range loop index") {
  LoopForm lf;
  lf.ports = {{"a", Direction::Input, 4}, {"y", Direction::Output, 3}};
  lf.loops.push_back({"i", 3, {{"NOT", {{"A", {"a", 0, 2}}, {"Y", {"y", 0, 1}}}}}});
  try {
    unroll(lf);
    FAIL("expected an error");
  } catch (const Error &e) {
    CHECK(e.kind() == "index-out-of-range");
    std::string what = e.what();
    CHECK(what.find("loop 0") != std::string::npos);
    CHECK(what.find("i=2") != std::string::npos);
    CHECK(what.find("pin A") != std::string::npos);
  }
}

TEST_CASE("loop-form text round trip") {
  LoopForm lf = reroll(adder4_fa());
  std::string text = write_loopform(lf);
  LoopForm back = parse_loopform(text);
  CHECK(write_loopform(back) == text);
  CHECK(back.loops == lf.loops);
  CHECK(text == read_file(testing::corpus_path("adder4_fa.loop")));
  CHECK_THROWS_AS(parse_loopform("(module x)"), Error);
  CHECK_THROWS_AS(parse_loopform("(loop-netlist x (for i 0 2 (cell AND (A (bit a (+ i))))))"), Error);
}

TEST_CASE("definitions travel with the loop form") {
  auto lib = parse_library("(component Blk (inputs a b) (output Y (XOR (AND a b) (OR a b))))");
  NetlistBuilder b("blocks");
  b.input("p", 3).input("q", 3).output("r", 3);
  for (int i = 0; i < 3; ++i) {
    std::string t = std::to_string(i);
    b.wire("u" + t).wire("v" + t);
    b.cell("AND", "a" + t, {{"A", bit("p", i)}, {"B", bit("q", i)}, {"Y", bit("u" + t)}});
    b.cell("OR", "o" + t, {{"A", bit("p", i)}, {"B", bit("q", i)}, {"Y", bit("v" + t)}});
    b.cell("XOR", "x" + t, {{"A", bit("u" + t)}, {"B", bit("v" + t)}, {"Y", bit("r", i)}});
  }
  Netlist n = b.build();
  Netlist id = identify(n, lib).netlist;
  REQUIRE(id.count_kind("Blk") == 3);
  LoopForm lf = reroll(id);
  CHECK(lf.loops.size() == 1);
  LoopForm back = parse_loopform(write_loopform(lf));
  CHECK(back.definitions.size() == 1);
  CHECK(check_equiv(n, unroll(back)).equivalent);
}
