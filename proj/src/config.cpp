#include "eqnet/config.hpp"

#include "eqnet/error.hpp"

#include <charconv>
#include <sstream>

namespace eqnet {

namespace {

std::string trim(std::string s) {
  s.erase(0, s.find_first_not_of(" \t\r"));
  s.erase(s.find_last_not_of(" \t\r") + 1);
  return s;
}

template <typename T> T number(const std::string &key, const std::string &v, std::size_t line) {
  T out{};
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || p != v.data() + v.size())
    throw Error("config", "line " + std::to_string(line) + ": bad value '" + v + "' for " + key);
  return out;
}

std::vector<std::string> list(const std::string &v) {
  std::vector<std::string> out;
  std::istringstream in(v);
  std::string item;
  while (std::getline(in, item, ','))
    if (auto t = trim(item); !t.empty())
      out.push_back(t);
  return out;
}

} // namespace

NetlistFormat parse_format(std::string_view s) {
  if (s == "json")
    return NetlistFormat::Json;
  if (s == "sexpr")
    return NetlistFormat::Sexpr;
  throw Error("usage", "unknown format '" + std::string(s) + "' (expected json or sexpr)");
}

Config parse_config(std::string_view text, Config c) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t no = 0;
  while (std::getline(in, line)) {
    ++no;
    if (auto h = line.find('#'); h != std::string::npos)
      line.resize(h);
    line = trim(line);
    if (line.empty())
      continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw Error("config", "line " + std::to_string(no) + ": expected key = value");
    std::string key = trim(line.substr(0, eq)), v = trim(line.substr(eq + 1));
    if (key == "rules") {
      c.rules = list(v);
    } else if (key == "library") {
      c.library = list(v);
    } else if (key == "iter-limit") {
      c.limits.max_iterations = number<std::size_t>(key, v, no);
    } else if (key == "node-limit") {
      c.limits.max_enodes = number<std::size_t>(key, v, no);
    } else if (key == "time-limit") {
      c.limits.max_seconds = number<double>(key, v, no);
    } else if (key == "ilp-time-limit") {
      c.ilp_seconds = number<double>(key, v, no);
    } else if (key == "cost-model") {
      c.cost_model = v;
    } else if (key == "extractor") {
      try {
        c.extractor = parse_extractor(v);
      } catch (const Error &e) {
        throw Error("config", "line " + std::to_string(no) + ": " + e.what());
      }
    } else if (key == "seed") {
      c.seed = number<std::uint64_t>(key, v, no);
    } else if (key == "format") {
      try {
        c.format = parse_format(v);
      } catch (const Error &e) {
        throw Error("config", "line " + std::to_string(no) + ": " + e.what());
      }
    } else if (key == "jobs") {
      c.jobs = number<std::size_t>(key, v, no);
    } else {
      throw Error("config", "line " + std::to_string(no) + ": unknown key '" + key + "'");
    }
  }
  return c;
}

std::string write_config(const Config &c) {
  auto join = [](const std::vector<std::string> &v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i)
      s += (i ? "," : "") + v[i];
    return s;
  };
  std::ostringstream out;
  out << "rules = " << join(c.rules) << "\n";
  out << "library = " << join(c.library) << "\n";
  out << "iter-limit = " << c.limits.max_iterations << "\n";
  out << "node-limit = " << c.limits.max_enodes << "\n";
  out << "time-limit = " << c.limits.max_seconds << "\n";
  out << "ilp-time-limit = " << c.ilp_seconds << "\n";
  out << "cost-model = " << c.cost_model << "\n";
  out << "extractor = " << (c.extractor == ExtractorKind::Ilp ? "ilp" : "greedy") << "\n";
  out << "seed = " << c.seed << "\n";
  if (c.format)
    out << "format = " << (*c.format == NetlistFormat::Json ? "json" : "sexpr") << "\n";
  out << "jobs = " << c.jobs << "\n";
  return out.str();
}

} // namespace eqnet
