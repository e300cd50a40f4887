#include "eqnet/netlist_io.hpp"

#include "eqnet/error.hpp"
#include "eqnet/sexpr.hpp"

#include <json.hpp>

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

namespace eqnet {

using ojson = nlohmann::ordered_json;

NetlistFormat format_for_path(std::string_view path) {
  auto dot = path.rfind('.');
  if (dot != std::string_view::npos && path.substr(dot) == ".json")
    return NetlistFormat::Json;
  return NetlistFormat::Sexpr;
}

std::string read_file(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw Error("io", "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string &path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw Error("io", "cannot write '" + path + "'");
  out << contents;
}

// ---------------------------------------------------------------- JSON ----

namespace {

[[noreturn]] void json_error(const std::string &where, const std::string &what) {
  throw Error("syntax", where + ": " + what);
}

std::size_t json_bit_id(const ojson &j, const std::string &where) {
  if (!j.is_number_unsigned())
    json_error(where, "bit ids must be non-negative integers (constant bits are not supported)");
  return j.get<std::size_t>();
}

const ojson &json_member(const ojson &obj, const char *key, const std::string &where) {
  if (!obj.is_object() || !obj.contains(key))
    json_error(where, std::string("missing key '") + key + "'");
  return obj.at(key);
}

Netlist module_from_json(const std::string &name, const ojson &m) {
  const std::string where = "modules." + name;
  if (!m.is_object())
    json_error(where, "module must be an object");
  Netlist n;
  n.name = name;
  std::map<std::size_t, NetBit> bits;

  auto bind = [&](std::size_t id, NetBit nb, const std::string &ctx) {
    auto [it, fresh] = bits.emplace(id, nb);
    if (!fresh && it->second != nb)
      json_error(ctx, "bit id " + std::to_string(id) + " names both " + to_string(it->second) +
                          " and " + to_string(nb) + "; use \"assigns\" for aliases");
  };

  if (m.contains("netnames")) {
    const auto &nn = m.at("netnames");
    if (!nn.is_object())
      json_error(where + ".netnames", "must be an object");
    for (const auto &[net, entry] : nn.items()) {
      const auto &list = json_member(entry, "bits", where + ".netnames." + net);
      if (!list.is_array() || list.empty())
        json_error(where + ".netnames." + net, "bits must be a non-empty array");
      n.nets[net] = list.size();
      for (std::size_t b = 0; b < list.size(); ++b)
        bind(json_bit_id(list[b], where + ".netnames." + net), {net, b},
             where + ".netnames." + net);
    }
  }
  if (m.contains("ports")) {
    const auto &ps = m.at("ports");
    if (!ps.is_object())
      json_error(where + ".ports", "must be an object");
    for (const auto &[pname, entry] : ps.items()) {
      const std::string pw = where + ".ports." + pname;
      const auto &dir = json_member(entry, "direction", pw);
      Port p{pname, Direction::Input, 0};
      if (dir == "input")
        p.direction = Direction::Input;
      else if (dir == "output")
        p.direction = Direction::Output;
      else
        json_error(pw, "direction must be \"input\" or \"output\"");
      const auto &list = json_member(entry, "bits", pw);
      if (!list.is_array() || list.empty())
        json_error(pw, "bits must be a non-empty array");
      p.width = list.size();
      if (auto it = n.nets.find(pname); it != n.nets.end() && it->second != p.width)
        json_error(pw, "port width differs from netname '" + pname + "'");
      n.nets[pname] = p.width;
      for (std::size_t b = 0; b < list.size(); ++b)
        bind(json_bit_id(list[b], pw), {pname, b}, pw);
      n.ports.push_back(p);
    }
  }
  auto resolve = [&](std::size_t id, const std::string &ctx) -> NetBit {
    auto it = bits.find(id);
    if (it == bits.end())
      throw Error("undeclared-net", ctx + ": bit id " + std::to_string(id) + " is not in any netname");
    return it->second;
  };
  if (m.contains("cells")) {
    const auto &cs = m.at("cells");
    if (!cs.is_object())
      json_error(where + ".cells", "must be an object");
    for (const auto &[inst, entry] : cs.items()) {
      const std::string cw = where + ".cells." + inst;
      const auto &type = json_member(entry, "type", cw);
      if (!type.is_string())
        json_error(cw, "type must be a string");
      Cell c{inst, type.get<std::string>(), {}};
      const auto &conns = json_member(entry, "connections", cw);
      if (!conns.is_object())
        json_error(cw, "connections must be an object");
      for (const auto &[pin, list] : conns.items()) {
        if (!list.is_array() || list.size() != 1)
          json_error(cw + ".connections." + pin, "pins are single-bit: expected one bit id");
        c.pins[pin] = resolve(json_bit_id(list[0], cw), cw + "." + pin);
      }
      n.cells.push_back(std::move(c));
    }
  }
  if (m.contains("assigns")) {
    const auto &as = m.at("assigns");
    if (!as.is_array())
      json_error(where + ".assigns", "must be an array");
    for (const auto &pair : as) {
      if (!pair.is_array() || pair.size() != 2)
        json_error(where + ".assigns", "each assign is [sink, source]");
      n.assigns.push_back({resolve(json_bit_id(pair[0], where), where + ".assigns"),
                           resolve(json_bit_id(pair[1], where), where + ".assigns")});
    }
  }
  return n;
}

bool json_top_flag(const ojson &m) {
  if (!m.is_object() || !m.contains("attributes"))
    return false;
  const auto &a = m.at("attributes");
  if (!a.is_object() || !a.contains("top"))
    return false;
  const auto &t = a.at("top");
  if (t.is_string())
    return t != "0" && !t.get<std::string>().empty() &&
           t.get<std::string>().find_first_not_of('0') != std::string::npos;
  if (t.is_number())
    return t.get<double>() != 0;
  return t.is_boolean() && t.get<bool>();
}

Netlist parse_json(std::string_view text) {
  ojson doc;
  try {
    doc = ojson::parse(text);
  } catch (const nlohmann::json::parse_error &e) {
    throw Error("syntax", "byte " + std::to_string(e.byte) + ": " + e.what());
  }
  const auto &mods = json_member(doc, "modules", "document");
  if (!mods.is_object() || mods.empty())
    json_error("modules", "expected a non-empty object");

  std::vector<Netlist> all;
  std::optional<std::size_t> top;
  std::set<std::string> instantiated;
  for (const auto &[name, m] : mods.items()) {
    if (json_top_flag(m) && !top)
      top = all.size();
    all.push_back(module_from_json(name, m));
    for (const auto &c : all.back().cells)
      instantiated.insert(c.kind);
  }
  if (!top) {
    for (std::size_t i = 0; i < all.size() && !top; ++i)
      if (!instantiated.count(all[i].name))
        top = i;
    if (!top)
      top = 0;
  }
  Netlist result = std::move(all[*top]);
  for (std::size_t i = 0; i < all.size(); ++i)
    if (i != *top)
      result.definitions.push_back(std::move(all[i]));
  return result;
}

ojson module_to_json(const Netlist &n, bool top) {
  std::map<NetBit, std::size_t> ids;
  std::size_t next = 2;
  auto number = [&](const std::string &net, std::size_t width) {
    for (std::size_t b = 0; b < width; ++b)
      ids.emplace(NetBit{net, b}, next++);
  };
  for (const auto &p : n.ports)
    number(p.name, p.width);
  for (const auto &[net, w] : n.nets)
    if (!n.find_port(net))
      number(net, w);

  ojson m = ojson::object();
  if (top)
    m["attributes"] = {{"top", "00000000000000000000000000000001"}};
  m["ports"] = ojson::object();
  for (const auto &p : n.ports) {
    ojson bitsj = ojson::array();
    for (std::size_t b = 0; b < p.width; ++b)
      bitsj.push_back(ids.at({p.name, b}));
    m["ports"][p.name] = {{"direction", p.direction == Direction::Input ? "input" : "output"},
                          {"bits", bitsj}};
  }
  m["cells"] = ojson::object();
  for (const auto &c : n.cells) {
    ojson conns = ojson::object();
    for (const auto &[pin, nb] : c.pins)
      conns[pin] = ojson::array({ids.at(nb)});
    m["cells"][c.instance] = {{"type", c.kind}, {"connections", conns}};
  }
  m["netnames"] = ojson::object();
  for (const auto &[net, w] : n.nets) {
    ojson bitsj = ojson::array();
    for (std::size_t b = 0; b < w; ++b)
      bitsj.push_back(ids.at({net, b}));
    m["netnames"][net] = {{"bits", bitsj}};
  }
  if (!n.assigns.empty()) {
    ojson as = ojson::array();
    for (const auto &a : n.assigns)
      as.push_back(ojson::array({ids.at(a.sink), ids.at(a.source)}));
    m["assigns"] = as;
  }
  return m;
}

std::string write_json(const Netlist &n) {
  ojson doc;
  doc["creator"] = "eqnet";
  doc["modules"] = ojson::object();
  doc["modules"][n.name] = module_to_json(n, true);
  for (const auto &d : n.definitions)
    doc["modules"][d.name] = module_to_json(d, false);
  return doc.dump(2) + "\n";
}

// ------------------------------------------------------------- S-expr ----

std::size_t parse_count(const SExpr &e, const char *what) {
  std::size_t v = 0;
  if (!e.is_atom())
    syntax_error(e, std::string("expected ") + what);
  auto [ptr, ec] = std::from_chars(e.atom.data(), e.atom.data() + e.atom.size(), v);
  if (ec != std::errc{} || ptr != e.atom.data() + e.atom.size() || e.atom.empty())
    syntax_error(e, std::string("expected ") + what + ", got '" + e.atom + "'");
  return v;
}

const std::string &parse_name(const SExpr &e, const char *what) {
  if (!e.is_atom() || e.atom.empty())
    syntax_error(e, std::string("expected ") + what);
  return e.atom;
}

NetBit parse_bit(const SExpr &e) {
  if (!e.is_form("bit") || e.items.size() != 3)
    syntax_error(e, "expected (bit <net> <index>)");
  return {parse_name(e.items[1], "net name"), parse_count(e.items[2], "bit index")};
}

Netlist module_from_sexpr(const SExpr &form) {
  if (!form.is_form("module") || form.items.size() < 2)
    syntax_error(form, "expected (module <name> ...)");
  Netlist n;
  n.name = parse_name(form.items[1], "module name");
  for (std::size_t i = 2; i < form.items.size(); ++i) {
    const SExpr &s = form.items[i];
    if (s.is_form("ports")) {
      for (std::size_t j = 1; j < s.items.size(); ++j) {
        const SExpr &p = s.items[j];
        if (!p.is_list || p.items.size() != 3 ||
            !(p.items[0].is_atom("input") || p.items[0].is_atom("output")))
          syntax_error(p, "expected (input|output <name> <width>)");
        Port port{parse_name(p.items[1], "port name"),
                  p.items[0].is_atom("input") ? Direction::Input : Direction::Output,
                  parse_count(p.items[2], "port width")};
        n.nets[port.name] = port.width;
        n.ports.push_back(port);
      }
    } else if (s.is_form("nets")) {
      for (std::size_t j = 1; j < s.items.size(); ++j) {
        const SExpr &w = s.items[j];
        if (!w.is_list || w.items.size() != 2)
          syntax_error(w, "expected (<net> <width>)");
        const auto &name = parse_name(w.items[0], "net name");
        std::size_t width = parse_count(w.items[1], "net width");
        if (auto it = n.nets.find(name); it != n.nets.end() && it->second != width)
          syntax_error(w, "net '" + name + "' redeclared with a different width");
        n.nets[name] = width;
      }
    } else if (s.is_form("cell")) {
      if (s.items.size() < 3)
        syntax_error(s, "expected (cell <KIND> <instance> (<pin> (bit ...))...)");
      Cell c{parse_name(s.items[2], "instance name"), parse_name(s.items[1], "cell kind"), {}};
      for (std::size_t j = 3; j < s.items.size(); ++j) {
        const SExpr &p = s.items[j];
        if (!p.is_list || p.items.size() != 2)
          syntax_error(p, "expected (<pin> (bit <net> <index>))");
        const auto &pin = parse_name(p.items[0], "pin name");
        if (!c.pins.emplace(pin, parse_bit(p.items[1])).second)
          syntax_error(p, "pin '" + pin + "' connected twice");
      }
      n.cells.push_back(std::move(c));
    } else if (s.is_form("assign")) {
      if (s.items.size() != 3)
        syntax_error(s, "expected (assign (bit ...) (bit ...))");
      n.assigns.push_back({parse_bit(s.items[1]), parse_bit(s.items[2])});
    } else {
      syntax_error(s, "unexpected form " + s.to_string());
    }
  }
  return n;
}

Netlist parse_sexpr_netlist(std::string_view text) {
  auto forms = parse_sexprs(text);
  if (forms.empty())
    throw Error("syntax", "1:1: no module");
  Netlist top = module_from_sexpr(forms[0]);
  for (std::size_t i = 1; i < forms.size(); ++i)
    top.definitions.push_back(module_from_sexpr(forms[i]));
  return top;
}

std::string sexpr_bit(const NetBit &nb) {
  return "(bit " + nb.net + " " + std::to_string(nb.bit) + ")";
}

void module_to_sexpr(const Netlist &n, std::ostringstream &out) {
  out << "(module " << n.name << "\n  (ports";
  for (const auto &p : n.ports)
    out << " (" << (p.direction == Direction::Input ? "input" : "output") << " " << p.name << " "
        << p.width << ")";
  out << ")\n  (nets";
  for (const auto &[net, w] : n.nets)
    if (!n.find_port(net))
      out << " (" << net << " " << w << ")";
  out << ")";
  for (const auto &c : n.cells) {
    out << "\n  (cell " << c.kind << " " << c.instance;
    for (const auto &[pin, nb] : c.pins)
      out << " (" << pin << " " << sexpr_bit(nb) << ")";
    out << ")";
  }
  for (const auto &a : n.assigns)
    out << "\n  (assign " << sexpr_bit(a.sink) << " " << sexpr_bit(a.source) << ")";
  out << ")\n";
}

std::string write_sexpr(const Netlist &n) {
  std::ostringstream out;
  module_to_sexpr(n, out);
  for (const auto &d : n.definitions)
    module_to_sexpr(d, out);
  return out.str();
}

} // namespace

Netlist parse_netlist(std::string_view text, NetlistFormat format) {
  Netlist n = format == NetlistFormat::Json ? parse_json(text) : parse_sexpr_netlist(text);
  validate(n);
  return n;
}

std::string write_netlist(const Netlist &n, NetlistFormat format) {
  return format == NetlistFormat::Json ? write_json(n) : write_sexpr(n);
}

Netlist read_netlist_file(const std::string &path) {
  return parse_netlist(read_file(path), format_for_path(path));
}

void write_netlist_file(const Netlist &n, const std::string &path) {
  write_file(path, write_netlist(n, format_for_path(path)));
}

} // namespace eqnet
