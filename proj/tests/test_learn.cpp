#include "circuits.hpp"
#include "reference.hpp"

#include "eqnet/convert.hpp"
#include "eqnet/error.hpp"
#include "eqnet/identify.hpp"
#include "eqnet/learn.hpp"
#include "eqnet/netlist_io.hpp"
#include "eqnet/oracle.hpp"

#include <doctest.h>

using namespace eqnet;

TEST_CASE("anti-unification examples") {
  CHECK(anti_unify(parse_term("(AND a b)"), parse_term("(AND a c)")).to_string() ==
        "(AND input:a:0 ?p0)");
  TermPtr t = parse_term("(XOR (AND a b) (NOT c))");
  Pattern same = anti_unify(t, t);
  CHECK(same.variables().empty());
  CHECK(term_equal(pattern_to_term(same), t));
  CHECK(anti_unify(parse_term("(XOR (AND a b) c)"), parse_term("(XOR (AND d e) f)")).to_string() ==
        "(XOR (AND ?p0 ?p1) ?p2)");
  // the same pair of differing subterms reuses its variable
  CHECK(anti_unify(parse_term("(AND (NOT a) (NOT a))"), parse_term("(AND (NOT b) (NOT b))"))
            .to_string() == "(AND (NOT ?p0) (NOT ?p0))");
}

TEST_CASE("anti-unification agrees with the reference LGG") {
  std::mt19937_64 rng(23);
  const char *ops[] = {"AND", "OR", "XOR"};
  std::function<TermPtr(int)> random_term = [&](int depth) -> TermPtr {
    if (depth == 0 || rng() % 4 == 0)
      return make_term(input_symbol(std::string(1, char('a' + rng() % 3)), 0));
    if (rng() % 5 == 0)
      return make_term("NOT", {random_term(depth - 1)});
    return make_term(ops[rng() % 3], {random_term(depth - 1), random_term(depth - 1)});
  };
  for (int i = 0; i < 300; ++i) {
    TermPtr a = random_term(4), b = random_term(4);
    CAPTURE(to_string(a));
    CAPTURE(to_string(b));
    CHECK(anti_unify(a, b) == testing::reference_lgg(a, b));
  }
}

TEST_CASE("four embedded copies rank first with score 6") {
  auto corpus = testing::embedded_cone_corpus();
  auto ranked = discover(corpus);
  REQUIRE_FALSE(ranked.empty());
  CHECK(ranked[0].name == "def_0");
  CHECK(ranked[0].body.to_string() == "(XOR (AND ?p0 ?p1) (OR ?p2 ?p3))");
  CHECK(ranked[0].matches == 4);
  CHECK(ranked[0].body.size() == 3);
  CHECK(ranked[0].arity == 4);
  CHECK(ranked[0].score == 6);
  for (std::size_t i = 1; i < ranked.size(); ++i)
    CHECK(ranked[i].score <= ranked[i - 1].score);
}

TEST_CASE("disjoint single gates give nothing") {
  NetlistBuilder b("gates");
  b.input("a").input("b").output("y", 3);
  b.cell("AND", "g0", {{"A", bit("a")}, {"B", bit("b")}, {"Y", bit("y", 0)}});
  b.cell("OR", "g1", {{"A", bit("a")}, {"B", bit("b")}, {"Y", bit("y", 1)}});
  b.cell("NOT", "g2", {{"A", bit("a")}, {"Y", bit("y", 2)}});
  CHECK(discover({b.build()}).empty());
}

TEST_CASE("8-bit adder: the carry cone matches eight times") {
  auto ranked = discover({testing::ripple_carry_adder(8)});
  REQUIRE_FALSE(ranked.empty());
  CHECK(ranked[0].body.to_string() == "(OR (AND ?p0 ?p1) (AND ?p2 (XOR ?p0 ?p1)))");
  CHECK(ranked[0].matches == 8);
}

TEST_CASE("abstraction rewrites four copies into apply cells") {
  auto corpus = testing::embedded_cone_corpus();
  auto ranked = discover(corpus);
  REQUIRE_FALSE(ranked.empty());
  auto out = abstract(corpus, ranked[0]);
  REQUIRE(out.size() == 2);
  std::size_t applies = 0, defs = 0;
  for (const auto &n : out) {
    applies += n.count_kind("def_0");
    defs += n.definitions.size();
  }
  CHECK(applies == 4);
  CHECK(defs == 2); // one per netlist file; both hold the same module
  for (std::size_t i = 0; i < out.size(); ++i) {
    CHECK(out[i].definitions[0].name == "def_0");
    CHECK(check_equiv(corpus[i], out[i]).equivalent);
    Netlist inl = inline_definitions(out[i]);
    CHECK(inl.definitions.empty());
    CHECK(check_equiv(corpus[i], inl).equivalent);
    for (auto fmt : {NetlistFormat::Json, NetlistFormat::Sexpr})
      CHECK(check_equiv(corpus[i], parse_netlist(write_netlist(out[i], fmt), fmt)).equivalent);
  }
}

TEST_CASE("abstraction without matches leaves the corpus alone") {
  Abstraction a;
  a.name = "def_9";
  a.body = parse_pattern("(MUX (NOT ?p0) ?p1 ?p0)");
  a.arity = 2;
  auto corpus = testing::embedded_cone_corpus();
  auto out = abstract(corpus, a);
  for (std::size_t i = 0; i < corpus.size(); ++i)
    CHECK(same_netlist(out[i], corpus[i]));
}

TEST_CASE("abstraction names may not collide") {
  auto corpus = testing::embedded_cone_corpus();
  auto ranked = discover(corpus);
  auto once = abstract(corpus, ranked[0]);
  CHECK_THROWS_AS(abstract(once, ranked[0]), Error);
  Abstraction bad = ranked[0];
  bad.name = "Helper";
  CHECK_THROWS_AS(abstraction_definition(bad), Error);
}

TEST_CASE("adding an instance does not lower the score") {
  auto corpus = testing::embedded_cone_corpus();
  double before = discover(corpus)[0].score;
  corpus.push_back(corpus[0]);
  corpus.back().name = "copy";
  // identical netlists deduplicate in the shared e-graph
  CHECK(discover(corpus)[0].score == before);
  NetlistBuilder b("extra");
  b.input("q", 4).output("r").wire("t0").wire("t1");
  b.cell("AND", "a", {{"A", bit("q", 3)}, {"B", bit("q", 2)}, {"Y", bit("t0")}});
  b.cell("OR", "o", {{"A", bit("q", 1)}, {"B", bit("q", 0)}, {"Y", bit("t1")}});
  b.cell("XOR", "x", {{"A", bit("t0")}, {"B", bit("t1")}, {"Y", bit("r")}});
  corpus.push_back(b.build());
  auto ranked = discover(corpus);
  CHECK(ranked[0].score >= before);
  CHECK(ranked[0].matches == 5);
}

TEST_CASE("learned library feeds identify") {
  auto corpus = testing::embedded_cone_corpus();
  auto ranked = discover(corpus);
  LibraryComponent c;
  c.name = ranked[0].name;
  for (std::size_t i = 0; i < ranked[0].arity; ++i)
    c.inputs.push_back("p" + std::to_string(i));
  c.outputs.emplace_back("Y", ranked[0].body);
  auto lib = parse_library(write_library({c}));
  auto r = identify(corpus[1], lib);
  CHECK(r.netlist.count_kind("def_0") == 2);
  CHECK(check_equiv(corpus[1], r.netlist).equivalent);
}

TEST_CASE("discover is deterministic and respects its limits") {
  auto corpus = testing::embedded_cone_corpus();
  auto a = discover(corpus), b = discover(corpus);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    CHECK(a[i].body == b[i].body);
  LearnConfig narrow;
  narrow.max_arity = 3;
  for (const auto &x : discover(corpus, narrow))
    CHECK(x.arity <= 3);
  LearnConfig strict;
  strict.min_matches = 5;
  CHECK(discover(corpus, strict).empty());
  LearnConfig beam;
  beam.max_pairs = 10;
  beam.beam_size = 4;
  CHECK_FALSE(discover({testing::ripple_carry_adder(8)}, beam).empty());
}

TEST_CASE("learn report JSON") {
  auto ranked = discover(testing::embedded_cone_corpus());
  std::string j = learn_report_json(ranked);
  CHECK(j.find("\"score\": 6.0") != std::string::npos);
  CHECK(j.find("\"matches\": 4") != std::string::npos);
}
