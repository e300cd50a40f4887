#include "cli.hpp"

#include "eqnet/config.hpp"
#include "eqnet/convert.hpp"
#include "eqnet/error.hpp"
#include "eqnet/extract.hpp"
#include "eqnet/identify.hpp"
#include "eqnet/learn.hpp"
#include "eqnet/netlist_io.hpp"
#include "eqnet/oracle.hpp"
#include "eqnet/reroll.hpp"
#include "eqnet/retime.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <atomic>
#include <filesystem>
#include <functional>
#include <iostream>
#include <mutex>
#include <optional>
#include <thread>

namespace eqnet::cli {

namespace {

using json = nlohmann::ordered_json;

struct Flags {
  std::string config;
  std::vector<std::string> in;
  std::string out;
  std::string out_dir;
  std::string report;
  std::vector<std::string> rules;
  std::vector<std::string> library;
  std::optional<std::size_t> iter_limit, node_limit, jobs;
  std::optional<double> time_limit, ilp_time_limit;
  std::optional<std::string> cost_model, extractor, format;
  std::optional<std::uint64_t> seed;

  bool with_bool_rules = false;
  double register_weight = 0;
  bool no_bool_rules = false;
  std::size_t max_arity = 4, min_matches = 2, top = 10;
  std::string apply_dir;
  std::size_t min_group = 3;
  std::string lp_out;
  std::string a, b;
  std::size_t samples = 256, max_exhaustive_bits = 12, cycles = 16;
};

// Options shared by the passes, registered per subcommand so each help page
// is complete.
void input_options(CLI::App *c, Flags &f, bool many) {
  if (many)
    c->add_option("--in", f.in, "Input netlist file(s) (.json or .sexpr)")->required();
  else
    c->add_option("--in", f.in, "Input file")->required()->expected(1);
  c->add_option("--out", f.out, "Output file (default: stdout)");
  if (many)
    c->add_option("--out-dir", f.out_dir, "Output directory when several inputs are given");
  c->add_option("--report", f.report, "Write a JSON report to this file");
  c->add_option("--config", f.config, "Key-value config file (flags override it)");
  c->add_option("--format", f.format, "Output netlist format: json or sexpr (default: by extension)");
  if (many)
    c->add_option("--jobs", f.jobs, "Process up to N input files in parallel");
}

void run_options(CLI::App *c, Flags &f) {
  c->add_option("--iter-limit", f.iter_limit, "Maximum saturation iterations");
  c->add_option("--node-limit", f.node_limit, "Maximum number of e-nodes");
  c->add_option("--time-limit", f.time_limit, "Saturation time limit in seconds");
  c->add_option("--extractor", f.extractor, "Extractor: greedy or ilp");
  c->add_option("--ilp-time-limit", f.ilp_time_limit, "Exact extraction time limit in seconds");
  c->add_option("--cost-model", f.cost_model, "Cost model file ('symbol cost' per line)");
}

void build(CLI::App &app, Flags &f) {
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  auto *v = app.add_subcommand("validate", "Parse and check netlists");
  input_options(v, f, true);

  auto *sat = app.add_subcommand("saturate", "Run rewrite rules, then extract a netlist");
  input_options(sat, f, true);
  sat->add_option("--rules", f.rules, "Rule file(s) (default: built-in Boolean rules)");
  run_options(sat, f);

  auto *ex = app.add_subcommand("extract", "Extract a cost-optimal netlist (rules optional)");
  input_options(ex, f, true);
  ex->add_option("--rules", f.rules, "Rule file(s) to saturate with first (default: none)");
  run_options(ex, f);
  ex->add_option("--lp", f.lp_out, "Also write the extraction problem as an LP file");

  auto *rt = app.add_subcommand("retime", "Minimise registers by saturating with retiming rules");
  input_options(rt, f, true);
  run_options(rt, f);
  rt->add_flag("--with-bool-rules", f.with_bool_rules, "Also apply the Boolean rules");
  rt->add_option("--register-weight", f.register_weight,
                 "Cost of one register (default: derived so registers dominate)");

  auto *sr = app.add_subcommand("source-retime", "Push every register towards the inputs");
  input_options(sr, f, true);

  auto *id = app.add_subcommand("identify", "Find library components (HalfAdder, ...)");
  input_options(id, f, true);
  id->add_option("--library", f.library, "Component library file(s) (default: standard library)");
  id->add_flag("--no-bool-rules", f.no_bool_rules, "Do not apply the Boolean rules");
  run_options(id, f);

  auto *ln = app.add_subcommand("learn", "Discover repeated submodules across a corpus");
  ln->add_option("--in", f.in, "Corpus netlist file(s)")->required();
  ln->add_option("--out", f.out, "Write the learned definitions as a component library");
  ln->add_option("--report", f.report, "Write the ranked candidates as JSON (default: stdout)");
  ln->add_option("--config", f.config, "Key-value config file (flags override it)");
  ln->add_option("--format", f.format, "Output netlist format for --apply-dir: json or sexpr");
  ln->add_option("--max-arity", f.max_arity, "Largest number of parameters of an abstraction");
  ln->add_option("--min-matches", f.min_matches, "Fewest matches a candidate needs");
  ln->add_option("--top", f.top, "Keep the K best candidates");
  ln->add_option("--apply-dir", f.apply_dir,
                 "Rewrite every input with the best abstraction into this directory");

  auto *rr = app.add_subcommand("reroll", "Fold repeated cells into loops");
  input_options(rr, f, false);
  rr->add_option("--min-group", f.min_group, "Smallest group turned into a loop");

  auto *ur = app.add_subcommand("unroll", "Expand a loop-form file back into a netlist");
  input_options(ur, f, false);

  auto *ce = app.add_subcommand("check-equiv", "Compare two netlists by simulation");
  ce->add_option("a", f.a, "First netlist")->required();
  ce->add_option("b", f.b, "Second netlist")->required();
  ce->add_option("--seed", f.seed, "Random seed for sampled checks");
  ce->add_option("--samples", f.samples, "Random vectors or traces when not exhaustive");
  ce->add_option("--max-exhaustive-bits", f.max_exhaustive_bits,
                 "Enumerate all input rows up to this many input bits");
  ce->add_option("--cycles", f.cycles, "Compared cycles after warm-up for sequential designs");
  ce->add_option("--report", f.report, "Write the verdict as JSON to this file");
  ce->add_option("--config", f.config, "Key-value config file (flags override it)");

  auto *lp = app.add_subcommand("export-lp", "Write the extraction ILP in LP format");
  input_options(lp, f, false);
  lp->add_option("--rules", f.rules, "Rule file(s) to saturate with first (default: none)");
  run_options(lp, f);
}

// ------------------------------------------------------------- helpers --

Config resolve(const Flags &f, Config base) {
  if (!f.config.empty())
    base = parse_config(read_file(f.config), base);
  if (!f.rules.empty())
    base.rules = f.rules;
  if (!f.library.empty())
    base.library = f.library;
  if (f.iter_limit)
    base.limits.max_iterations = *f.iter_limit;
  if (f.node_limit)
    base.limits.max_enodes = *f.node_limit;
  if (f.time_limit)
    base.limits.max_seconds = *f.time_limit;
  if (f.ilp_time_limit)
    base.ilp_seconds = *f.ilp_time_limit;
  if (f.cost_model)
    base.cost_model = *f.cost_model;
  if (f.extractor)
    base.extractor = parse_extractor(*f.extractor);
  if (f.seed)
    base.seed = *f.seed;
  if (f.format)
    base.format = parse_format(*f.format);
  if (f.jobs)
    base.jobs = std::max<std::size_t>(1, *f.jobs);
  return base;
}

std::vector<Rewrite> load_rules(const std::vector<std::string> &paths) {
  std::vector<Rewrite> rules;
  for (const auto &p : paths) {
    auto rs = parse_rules(read_file(p));
    rules.insert(rules.end(), rs.begin(), rs.end());
  }
  return rules;
}

CostModel default_costs() {
  CostModel cm(1.0);
  cm.set("input", 0).set("const", 0).set("outputs", 0).set("proj", 0);
  return cm;
}

class Io {
public:
  Io(const Flags &f, const Config &c, std::ostream &out) : f_(f), c_(c), out_(out) {
    if (f.in.size() > 1 && f.out_dir.empty() && !f.out.empty())
      throw Error("usage", "several inputs need --out-dir instead of --out");
    if (!f.out_dir.empty())
      std::filesystem::create_directories(f.out_dir);
  }

  std::string destination(std::size_t i) const {
    if (!f_.out_dir.empty())
      return (std::filesystem::path(f_.out_dir) / std::filesystem::path(f_.in[i]).filename())
          .string();
    return f_.out;
  }

  void emit_netlist(std::size_t i, const Netlist &n) {
    std::string dest = destination(i);
    NetlistFormat fmt = c_.format ? *c_.format
                                  : format_for_path(dest.empty() ? f_.in[i] : dest);
    std::string text = write_netlist(n, fmt);
    emit_text(dest, text);
  }

  void emit_text(const std::string &dest, const std::string &text) {
    if (dest.empty()) {
      std::lock_guard<std::mutex> lock(mu_);
      out_ << text;
    } else {
      write_file(dest, text);
    }
  }

  void set_report(std::size_t i, json j) {
    std::lock_guard<std::mutex> lock(mu_);
    if (reports_.size() <= i)
      reports_.resize(f_.in.size());
    reports_[i] = std::move(j);
  }

  void flush_reports() {
    if (f_.report.empty())
      return;
    json j;
    if (f_.in.size() == 1 && !reports_.empty()) {
      j = reports_[0];
    } else {
      j = json::object();
      for (std::size_t i = 0; i < reports_.size(); ++i)
        j[f_.in[i]] = reports_[i];
    }
    write_file(f_.report, j.dump(2) + "\n");
  }

private:
  const Flags &f_;
  const Config &c_;
  std::ostream &out_;
  std::mutex mu_;
  std::vector<json> reports_;
};

// Runs `fn` for every input index on up to `jobs` threads. The error of the
// lowest failing index is rethrown.
void for_each_input(std::size_t count, std::size_t jobs, const std::function<void(std::size_t)> &fn) {
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next++) < count;) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < std::min(jobs, count); ++t)
    pool.emplace_back(worker);
  worker();
  for (auto &t : pool)
    t.join();
  for (auto &e : errors)
    if (e)
      std::rethrow_exception(e);
}

json parse_json(const std::string &s) { return json::parse(s); }

// ---------------------------------------------------------- subcommands --

int cmd_validate(const Flags &f, const Config &c, std::ostream &out) {
  std::vector<std::string> lines(f.in.size());
  Io io(f, c, out);
  for_each_input(f.in.size(), c.jobs, [&](std::size_t i) {
    Netlist n = read_netlist_file(f.in[i]);
    lines[i] = "ok " + f.in[i] + " cells=" + std::to_string(n.cells.size()) +
               " nets=" + std::to_string(n.nets.size()) + "\n";
    io.set_report(i, {{"valid", true},
                      {"cells", n.cells.size()},
                      {"nets", n.nets.size()},
                      {"ports", n.ports.size()}});
  });
  for (const auto &l : lines)
    out << l;
  io.flush_reports();
  return Ok;
}

int cmd_saturate(const Flags &f, const Config &c, std::ostream &out, bool default_bool) {
  std::vector<Rewrite> rules =
      c.rules.empty() ? (default_bool ? bool_rules() : std::vector<Rewrite>{}) : load_rules(c.rules);
  CostModel cm = c.cost_model.empty() ? default_costs() : CostModel::parse(read_file(c.cost_model));
  Io io(f, c, out);
  for_each_input(f.in.size(), c.jobs, [&](std::size_t i) {
    Netlist n = read_netlist_file(f.in[i]);
    EGraph g;
    EClassId root = g.add_term(to_terms(n));
    RunReport rep = run(g, rules, c.limits);
    root = g.find(root);
    Selection s = c.extractor == ExtractorKind::Ilp
                      ? extract_ilp(g, {root}, cm, {c.ilp_seconds, true})
                      : extract_greedy(g, {root}, cm);
    validate_selection(g, s, cm);
    if (!f.lp_out.empty())
      write_file(f.in.size() == 1 ? f.lp_out : f.lp_out + "." + std::to_string(i),
                 export_lp(build_ilp(g, {root}, cm)));
    Netlist result = from_terms(selection_term(s, root), interface_of(n));
    io.emit_netlist(i, result);
    io.set_report(i, {{"run", parse_json(rep.to_json())},
                      {"cells_before", n.cells.size()},
                      {"cells_after", result.cells.size()},
                      {"cost", s.cost},
                      {"extraction_timed_out", s.timed_out}});
  });
  io.flush_reports();
  return Ok;
}

int cmd_retime(const Flags &f, const Config &c, std::ostream &out) {
  RetimeConfig rc;
  rc.limits = c.limits;
  rc.extractor = c.extractor;
  rc.ilp_seconds = c.ilp_seconds;
  rc.with_bool_rules = f.with_bool_rules;
  rc.register_weight = f.register_weight;
  Io io(f, c, out);
  for_each_input(f.in.size(), c.jobs, [&](std::size_t i) {
    Netlist n = read_netlist_file(f.in[i]);
    RetimeResult r = retime_min_registers(n, rc);
    io.emit_netlist(i, r.netlist);
    io.set_report(i, {{"run", parse_json(r.report.to_json())},
                      {"stop_reason", to_string(r.report.stop)},
                      {"registers_before", r.registers_before},
                      {"registers_after", r.registers_after},
                      {"extraction_timed_out", r.extraction_timed_out}});
  });
  io.flush_reports();
  return Ok;
}

int cmd_source_retime(const Flags &f, const Config &c, std::ostream &out) {
  Io io(f, c, out);
  for_each_input(f.in.size(), c.jobs, [&](std::size_t i) {
    Netlist n = read_netlist_file(f.in[i]);
    SourceRetimeResult r = source_retime(n);
    io.emit_netlist(i, r.netlist);
    io.set_report(i, {{"steps", r.steps},
                      {"registers_before", register_count(n)},
                      {"registers_after", register_count(r.netlist)}});
  });
  io.flush_reports();
  return Ok;
}

int cmd_identify(const Flags &f, const Config &c, std::ostream &out) {
  std::vector<LibraryComponent> lib;
  if (c.library.empty()) {
    lib = standard_library();
  } else {
    for (const auto &p : c.library) {
      auto more = parse_library(read_file(p));
      lib.insert(lib.end(), more.begin(), more.end());
    }
  }
  IdentifyConfig ic;
  ic.limits = c.limits;
  ic.extractor = c.extractor;
  ic.ilp_seconds = c.ilp_seconds;
  ic.use_bool_rules = !f.no_bool_rules;
  if (!c.cost_model.empty())
    ic.costs = CostModel::parse(read_file(c.cost_model));
  Io io(f, c, out);
  for_each_input(f.in.size(), c.jobs, [&](std::size_t i) {
    Netlist n = read_netlist_file(f.in[i]);
    IdentifyResult r = identify(n, lib, ic);
    io.emit_netlist(i, r.netlist);
    io.set_report(i, parse_json(r.report.to_json()));
  });
  io.flush_reports();
  return Ok;
}

int cmd_learn(const Flags &f, const Config &c, std::ostream &out) {
  std::vector<Netlist> corpus;
  for (const auto &p : f.in)
    corpus.push_back(read_netlist_file(p));
  LearnConfig lc;
  lc.max_arity = f.max_arity;
  lc.min_matches = f.min_matches;
  auto ranked = discover(corpus, lc);
  if (ranked.size() > f.top)
    ranked.resize(f.top);
  std::string report = learn_report_json(ranked) + "\n";
  if (f.report.empty())
    out << report;
  else
    write_file(f.report, report);
  if (!f.out.empty()) {
    std::vector<LibraryComponent> lib;
    for (const auto &a : ranked) {
      LibraryComponent comp;
      comp.name = a.name;
      for (std::size_t i = 0; i < a.arity; ++i)
        comp.inputs.push_back("p" + std::to_string(i));
      comp.outputs.emplace_back("Y", a.body);
      lib.push_back(std::move(comp));
    }
    write_file(f.out, write_library(lib));
  }
  if (!f.apply_dir.empty() && !ranked.empty()) {
    std::filesystem::create_directories(f.apply_dir);
    auto rewritten = abstract(corpus, ranked.front());
    for (std::size_t i = 0; i < rewritten.size(); ++i) {
      auto dest = (std::filesystem::path(f.apply_dir) / std::filesystem::path(f.in[i]).filename())
                      .string();
      write_file(dest, write_netlist(rewritten[i], c.format ? *c.format : format_for_path(dest)));
    }
  }
  return Ok;
}

int cmd_reroll(const Flags &f, const Config &c, std::ostream &out) {
  Io io(f, c, out);
  Netlist n = read_netlist_file(f.in[0]);
  RerollConfig rc;
  rc.min_group = f.min_group;
  RerollReport rep;
  LoopForm lf = reroll(n, rc, &rep);
  io.emit_text(f.out, write_loopform(lf));
  json loops = json::array();
  for (const auto &l : lf.loops)
    loops.push_back({{"kind", l.body.at(0).kind}, {"range", l.range}});
  io.set_report(0, {{"loops", loops},
                    {"rerolled_kinds", rep.rerolled_kinds},
                    {"unfit_kinds", rep.unfit_kinds},
                    {"residual_cells", lf.cells.size()}});
  io.flush_reports();
  return Ok;
}

int cmd_unroll(const Flags &f, const Config &c, std::ostream &out) {
  Io io(f, c, out);
  LoopForm lf = parse_loopform(read_file(f.in[0]));
  Netlist n = unroll(lf);
  io.emit_netlist(0, n);
  io.set_report(0, {{"cells", n.cells.size()}, {"loops", lf.loops.size()}});
  io.flush_reports();
  return Ok;
}

int cmd_check_equiv(const Flags &f, const Config &c, std::ostream &out) {
  Netlist a = read_netlist_file(f.a), b = read_netlist_file(f.b);
  EquivConfig ec;
  ec.seed = c.seed;
  ec.samples = f.samples;
  ec.max_exhaustive_bits = f.max_exhaustive_bits;
  ec.cycles = f.cycles;
  Verdict v = check_equiv(a, b, ec);
  std::string text = verdict_json(v, Simulator(a).input_bits()) + "\n";
  if (f.report.empty())
    out << text;
  else
    write_file(f.report, text);
  return v.equivalent ? Ok : VerdictFailure;
}

int cmd_export_lp(const Flags &f, const Config &c, std::ostream &out) {
  Io io(f, c, out);
  Netlist n = read_netlist_file(f.in[0]);
  CostModel cm = c.cost_model.empty() ? default_costs() : CostModel::parse(read_file(c.cost_model));
  EGraph g;
  EClassId root = g.add_term(to_terms(n));
  RunReport rep = run(g, load_rules(c.rules), c.limits);
  root = g.find(root);
  IlpProblem p = build_ilp(g, {root}, cm);
  io.emit_text(f.out, export_lp(p));
  io.set_report(0, {{"run", parse_json(rep.to_json())},
                    {"binaries", p.node_vars.size()},
                    {"classes", p.classes.size()}});
  io.flush_reports();
  return Ok;
}

} // namespace

std::unique_ptr<CLI::App> describe() {
  static Flags flags;
  auto app = std::make_unique<CLI::App>("eqnet: netlist rewriting with equality saturation", "eqnet");
  build(*app, flags);
  return app;
}

int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
  Flags f;
  CLI::App app("eqnet: netlist rewriting with equality saturation", "eqnet");
  build(app, f);
  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp &) {
    out << app.help();
    return Ok;
  } catch (const CLI::CallForAllHelp &) {
    out << app.help("", CLI::AppFormatMode::All);
    return Ok;
  } catch (const CLI::ParseError &e) {
    // Help requested on a subcommand surfaces as CallForHelp above; everything
    // else is a usage error.
    err << "error: usage: " << e.what() << "\n";
    return UsageError;
  }

  try {
    CLI::App *sub = app.get_subcommands().front();
    const std::string name = sub->get_name();
    Config base;
    if (name == "retime")
      base.limits = RetimeConfig{}.limits, base.ilp_seconds = RetimeConfig{}.ilp_seconds;
    else if (name == "identify")
      base.limits = IdentifyConfig{}.limits;
    Config c = resolve(f, base);

    if (name == "validate")
      return cmd_validate(f, c, out);
    if (name == "saturate")
      return cmd_saturate(f, c, out, true);
    if (name == "extract")
      return cmd_saturate(f, c, out, false);
    if (name == "retime")
      return cmd_retime(f, c, out);
    if (name == "source-retime")
      return cmd_source_retime(f, c, out);
    if (name == "identify")
      return cmd_identify(f, c, out);
    if (name == "learn")
      return cmd_learn(f, c, out);
    if (name == "reroll")
      return cmd_reroll(f, c, out);
    if (name == "unroll")
      return cmd_unroll(f, c, out);
    if (name == "check-equiv")
      return cmd_check_equiv(f, c, out);
    if (name == "export-lp")
      return cmd_export_lp(f, c, out);
    err << "error: usage: unknown subcommand " << name << "\n";
    return UsageError;
  } catch (const InvariantError &e) {
    err << "error: " << e.kind() << ": " << e.what() << "\n";
    return InternalError;
  } catch (const Error &e) {
    err << "error: " << e.kind() << ": " << e.what() << "\n";
    return UsageError;
  } catch (const std::filesystem::filesystem_error &e) {
    err << "error: io: " << e.what() << "\n";
    return UsageError;
  } catch (const std::exception &e) {
    err << "error: internal: " << e.what() << "\n";
    return InternalError;
  }
}

} // namespace eqnet::cli
