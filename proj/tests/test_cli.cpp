#include "circuits.hpp"
#include "cli.hpp"

#include "eqnet/netlist_io.hpp"
#include "eqnet/oracle.hpp"
#include "eqnet/retime.hpp"

#include <CLI11.hpp>
#include <doctest.h>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <sstream>

using namespace eqnet;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code;
  std::string out, err;
};

Outcome invoke(const std::vector<std::string> &args) {
  std::ostringstream out, err;
  int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("eqnet_cli_" + std::to_string(std::rand()) + "_" +
                                        std::to_string(reinterpret_cast<std::uintptr_t>(this)));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string &f) const { return (path / f).string(); }
};

std::string corpus(const std::string &f) { return testing::corpus_path(f); }

} // namespace

TEST_CASE("retime writes the netlist and a report") {
  TempDir d;
  auto r = invoke({"retime", "--in", corpus("retime_two_regs.json"), "--out", d / "min.json",
                "--report", d / "r.json"});
  CHECK(r.code == 0);
  auto rep = nlohmann::json::parse(read_file(d / "r.json"));
  CHECK(rep["stop_reason"] == "saturated");
  CHECK(rep["registers_before"] == 2);
  CHECK(rep["registers_after"] == 1);
  Netlist out = read_netlist_file(d / "min.json");
  CHECK(register_count(out) == 1);
  CHECK(check_equiv(read_netlist_file(corpus("retime_two_regs.json")), out).equivalent);
}

TEST_CASE("saturate with zero iterations returns an equivalent netlist") {
  TempDir d;
  auto r = invoke({"saturate", "--rules", testing::source_path("rules/bool.rules"), "--in",
                corpus("adder4.json"), "--iter-limit", "0", "--out", d / "x.json", "--report",
                d / "r.json"});
  CHECK(r.code == 0);
  CHECK(check_equiv(read_netlist_file(corpus("adder4.json")), read_netlist_file(d / "x.json"))
            .equivalent);
  auto rep = nlohmann::json::parse(read_file(d / "r.json"));
  CHECK(rep["run"]["iterations"] == 0);
}

TEST_CASE("check-equiv exit codes") {
  CHECK(invoke({"check-equiv", corpus("adder4.json"), corpus("adder4.json")}).code == 0);
  CHECK(invoke({"check-equiv", corpus("retime_two_regs.json"), corpus("retime_one_reg.sexpr")}).code ==
        0);
  TempDir d;
  Netlist bad = read_netlist_file(corpus("half_adder.json"));
  bad.cells[0].kind = "OR";
  write_netlist_file(bad, d / "bad.json");
  auto r = invoke({"check-equiv", corpus("half_adder.json"), d / "bad.json", "--report", d / "v.json"});
  CHECK(r.code == 1);
  CHECK(nlohmann::json::parse(read_file(d / "v.json"))["equivalent"] == false);
}

TEST_CASE("usage and input errors exit with 2 and a machine-readable line") {
  auto missing = invoke({"validate", "--in", "/nonexistent/x.json"});
  CHECK(missing.code == 2);
  CHECK(missing.err.rfind("error: io: ", 0) == 0);

  auto nosub = invoke({});
  CHECK(nosub.code == 2);
  CHECK(nosub.err.rfind("error: usage: ", 0) == 0);

  auto badflag = invoke({"retime", "--in", corpus("half_adder.json"), "--frobnicate"});
  CHECK(badflag.code == 2);

  auto badext = invoke({"retime", "--in", corpus("half_adder.json"), "--extractor", "simplex"});
  CHECK(badext.code == 2);
  CHECK(badext.err.rfind("error: usage: ", 0) == 0);

  TempDir d;
  write_file(d / "broken.json", "{\"modules\": {\"m\": {\"cells\": {\"c\": {}}}}}");
  auto broken = invoke({"validate", "--in", d / "broken.json"});
  CHECK(broken.code == 2);
  CHECK(broken.err.rfind("error: syntax: ", 0) == 0);

  write_file(d / "c.cfg", "bogus = 1\n");
  auto cfg = invoke({"validate", "--in", corpus("half_adder.json"), "--config", d / "c.cfg"});
  CHECK(cfg.code == 2);
  CHECK(cfg.err.rfind("error: config: ", 0) == 0);
}

TEST_CASE("help documents every flag") {
  auto app = cli::describe();
  std::size_t options = 0;
  std::vector<CLI::App *> apps{app.get()};
  for (auto *sub : app->get_subcommands({}))
    apps.push_back(sub);
  for (auto *a : apps) {
    CAPTURE(a->get_name());
    CHECK_FALSE(a->get_description().empty());
    std::string help = a->help();
    for (const auto *opt : a->get_options()) {
      ++options;
      CAPTURE(opt->get_name());
      CHECK_FALSE(opt->get_description().empty());
      for (const auto &l : opt->get_lnames())
        CHECK(help.find("--" + l) != std::string::npos);
    }
  }
  CHECK(options > 60);
  auto h = invoke({"--help"});
  CHECK(h.code == 0);
  for (const char *sub : {"validate", "saturate", "extract", "retime", "source-retime", "identify",
                          "learn", "reroll", "unroll", "check-equiv", "export-lp"})
    CHECK(h.out.find(sub) != std::string::npos);
  auto sh = invoke({"retime", "--help"});
  CHECK(sh.code == 0);
  CHECK(sh.out.find("--register-weight") != std::string::npos);
}

TEST_CASE("pipeline by files: source-retime, identify, reroll, unroll") {
  TempDir d;
  CHECK(invoke({"source-retime", "--in", corpus("adder4.json"), "--out", d / "a.json"}).code == 0);
  CHECK(invoke({"identify", "--in", d / "a.json", "--out", d / "b.sexpr", "--report", d / "i.json"})
            .code == 0);
  auto rep = nlohmann::json::parse(read_file(d / "i.json"));
  CHECK(rep["instances"].size() == 4);
  CHECK(invoke({"reroll", "--in", d / "b.sexpr", "--out", d / "c.loop", "--report", d / "r.json"})
            .code == 0);
  CHECK(nlohmann::json::parse(read_file(d / "r.json"))["loops"].size() == 1);
  CHECK(invoke({"unroll", "--in", d / "c.loop", "--out", d / "d.json"}).code == 0);
  CHECK(invoke({"check-equiv", corpus("adder4.json"), d / "d.json"}).code == 0);
}

TEST_CASE("several inputs in parallel go to an output directory") {
  TempDir d;
  std::vector<std::string> args{"extract", "--out-dir", d / "out", "--jobs", "3", "--format", "sexpr"};
  std::vector<std::string> files{"adder4.json", "half_adder.json", "mux_chain.json", "pipeline0.json"};
  for (const auto &f : files) {
    args.push_back("--in");
    args.push_back(corpus(f));
  }
  auto r = invoke(args);
  CHECK(r.code == 0);
  for (const auto &f : files) {
    std::string text = read_file(d / ("out/" + f));
    CHECK(text.rfind("(module", 0) == 0);
    CHECK(check_equiv(read_netlist_file(corpus(f)), parse_netlist(text, NetlistFormat::Sexpr))
              .equivalent);
  }
  // several inputs with a single --out is refused
  CHECK(invoke({"extract", "--in", corpus("adder4.json"), "--in", corpus("half_adder.json"), "--out",
             d / "one.json"})
            .code == 2);
}

TEST_CASE("learn writes a library and applies the best abstraction") {
  TempDir d;
  auto corpus_files = testing::embedded_cone_corpus();
  std::vector<std::string> args{"learn", "--top", "3", "--out", d / "learned.lib", "--apply-dir",
                                d / "applied"};
  for (const auto &n : corpus_files) {
    write_netlist_file(n, d / (n.name + ".json"));
    args.push_back("--in");
    args.push_back(d / (n.name + ".json"));
  }
  auto r = invoke(args);
  CHECK(r.code == 0);
  auto ranked = nlohmann::json::parse(r.out);
  REQUIRE(ranked.size() >= 1);
  CHECK(ranked.size() <= 3);
  CHECK(ranked[0]["score"] == 6.0);
  CHECK(ranked[0]["matches"] == 4);
  for (const auto &n : corpus_files)
    CHECK(check_equiv(n, read_netlist_file(d / ("applied/" + n.name + ".json"))).equivalent);
  auto id = invoke({"identify", "--in", d / "right.json", "--library", d / "learned.lib", "--out",
                 d / "id.json"});
  CHECK(id.code == 0);
  CHECK(read_netlist_file(d / "id.json").count_kind("def_0") == 2);
}

TEST_CASE("export-lp and config file") {
  TempDir d;
  write_file(d / "costs.txt", "HalfAdder 1.5\ninput 0\nproj 0\n");
  write_file(d / "run.cfg", "rules = " + testing::source_path("rules/identify.rules") +
                                "\ncost-model = " + (d / "costs.txt") + "\niter-limit = 4\n");
  auto r = invoke({"export-lp", "--in", corpus("half_adder.json"), "--config", d / "run.cfg", "--out",
                d / "p.lp"});
  CHECK(r.code == 0);
  std::string lp = read_file(d / "p.lp");
  CHECK(lp.find("Minimize") == lp.find('\n') + 1);
  CHECK(lp.find("Binaries") != std::string::npos);
  auto ex = invoke({"extract", "--in", corpus("half_adder.json"), "--config", d / "run.cfg", "--out",
                 d / "e.json"});
  CHECK(ex.code == 0);
  CHECK(read_netlist_file(d / "e.json").count_kind("HalfAdder") == 1);
}

TEST_CASE("outputs are deterministic") {
  TempDir d;
  for (int i = 0; i < 2; ++i)
    CHECK(invoke({"identify", "--in", corpus("adder4.json"), "--out", d / ("o" + std::to_string(i) + ".json")})
              .code == 0);
  CHECK(read_file(d / "o0.json") == read_file(d / "o1.json"));
}

TEST_CASE("the installed binary behaves like the library entry point") {
  std::string cmd = std::string(EQNET_CLI_PATH) + " check-equiv " + corpus("adder4.json") + " " +
                    corpus("adder4.sexpr") + " > /dev/null";
  CHECK(std::system(cmd.c_str()) == 0);
  std::string bad = std::string(EQNET_CLI_PATH) + " nonsense 2> /dev/null";
  int status = std::system(bad.c_str());
  CHECK(WEXITSTATUS(status) == 2);
}
