#include "eqnet/lp.hpp"

#include "eqnet/error.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

namespace eqnet {

std::optional<std::size_t> LinearProgram::find(std::string_view name) const {
  for (std::size_t i = 0; i < vars.size(); ++i)
    if (vars[i].name == name)
      return i;
  return std::nullopt;
}

namespace {

std::string lower(std::string s) {
  for (auto &c : s)
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

bool parse_number(const std::string &tok, double &out) {
  if (tok.empty())
    return false;
  const char *b = tok.data();
  if (*b == '+')
    ++b;
  auto [ptr, ec] = std::from_chars(b, tok.data() + tok.size(), out);
  return ec == std::errc{} && ptr == tok.data() + tok.size();
}

bool is_sense(const std::string &t) { return t == "<=" || t == ">=" || t == "=" || t == "<" || t == ">" || t == "=<" || t == "=>"; }

LinearProgram::Sense to_sense(const std::string &t) {
  if (t == "<=" || t == "<" || t == "=<")
    return LinearProgram::Sense::Le;
  if (t == ">=" || t == ">" || t == "=>")
    return LinearProgram::Sense::Ge;
  return LinearProgram::Sense::Eq;
}

class LpReader {
public:
  explicit LpReader(LinearProgram &lp) : lp_(lp) {}

  std::size_t var(const std::string &name) {
    if (auto i = lp_.find(name))
      return *i;
    lp_.vars.push_back({name});
    return lp_.vars.size() - 1;
  }

  // Parses `[+|-] [coef] var ...` tokens until a sense or the end. Returns
  // the constant part (bare numbers) separately.
  std::vector<LinearProgram::Term> expression(const std::vector<std::string> &toks, std::size_t &i,
                                              double &constant, std::size_t line) {
    std::vector<LinearProgram::Term> terms;
    double sign = 1;
    std::optional<double> coef;
    bool dangling = false, any = false;
    for (; i < toks.size() && !is_sense(toks[i]); ++i) {
      const auto &t = toks[i];
      double v = 0;
      dangling = t == "+" || t == "-";
      if (t == "+") {
        continue;
      } else if (t == "-") {
        sign = -sign;
      } else if (parse_number(t, v)) {
        any = true;
        if (coef)
          fail(line, "two numbers in a row");
        coef = v;
      } else {
        any = true;
        terms.push_back({sign * coef.value_or(1.0), var(t)});
        sign = 1;
        coef.reset();
      }
    }
    if (dangling)
      fail(line, "expression ends with an operator");
    if (!any)
      fail(line, "empty expression");
    if (coef) {
      constant += sign * *coef;
    }
    return terms;
  }

  [[noreturn]] static void fail(std::size_t line, const std::string &what) {
    throw Error("syntax", "LP line " + std::to_string(line) + ": " + what);
  }

private:
  LinearProgram &lp_;
};

std::vector<std::string> tokenize(const std::string &line) {
  std::vector<std::string> toks;
  std::size_t i = 0;
  while (i < line.size()) {
    char c = line[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
    } else if (c == '<' || c == '>' || c == '=') {
      std::size_t j = i + 1;
      if (j < line.size() && (line[j] == '=' || line[j] == '<' || line[j] == '>'))
        ++j;
      toks.push_back(line.substr(i, j - i));
      i = j;
    } else if (c == '+' || c == '-') {
      toks.emplace_back(1, c);
      ++i;
    } else {
      std::size_t j = i;
      while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j])) &&
             line[j] != '<' && line[j] != '>' && line[j] != '=' &&
             !((line[j] == '+' || line[j] == '-') && j > i &&
               !(line[j - 1] == 'e' || line[j - 1] == 'E')))
        ++j;
      toks.push_back(line.substr(i, j - i));
      i = j;
    }
  }
  return toks;
}

} // namespace

LinearProgram parse_lp(std::string_view text) {
  LinearProgram lp;
  LpReader reader(lp);
  enum class Section { None, Objective, Constraints, Bounds, Binaries, Generals, End } sec = Section::None;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto bs = line.find('\\'); bs != std::string::npos)
      line.resize(bs);
    std::string key = lower(line);
    key.erase(0, key.find_first_not_of(" \t\r"));
    key.erase(key.find_last_not_of(" \t\r") + 1);
    if (key.empty())
      continue;
    if (key == "minimize" || key == "minimise" || key == "min") {
      sec = Section::Objective;
      continue;
    }
    if (key == "maximize" || key == "maximise" || key == "max")
      LpReader::fail(line_no, "only minimisation is supported");
    if (key == "subject to" || key == "st" || key == "s.t.") {
      sec = Section::Constraints;
      continue;
    }
    if (key == "bounds") {
      sec = Section::Bounds;
      continue;
    }
    if (key == "binaries" || key == "binary" || key == "bin") {
      sec = Section::Binaries;
      continue;
    }
    if (key == "generals" || key == "general" || key == "gen") {
      sec = Section::Generals;
      continue;
    }
    if (key == "end") {
      sec = Section::End;
      continue;
    }

    std::string body = line;
    std::string name;
    if (auto colon = body.find(':'); colon != std::string::npos &&
                                     (sec == Section::Objective || sec == Section::Constraints)) {
      name = body.substr(0, colon);
      name.erase(0, name.find_first_not_of(" \t"));
      name.erase(name.find_last_not_of(" \t") + 1);
      body = body.substr(colon + 1);
    }
    auto toks = tokenize(body);
    std::size_t i = 0;
    switch (sec) {
    case Section::Objective: {
      double c = 0;
      auto terms = reader.expression(toks, i, c, line_no);
      if (i != toks.size())
        LpReader::fail(line_no, "unexpected relation in objective");
      lp.objective.insert(lp.objective.end(), terms.begin(), terms.end());
      lp.objective_constant += c;
      break;
    }
    case Section::Constraints: {
      double c = 0;
      LinearProgram::Constraint con;
      con.name = name;
      con.terms = reader.expression(toks, i, c, line_no);
      if (i >= toks.size())
        LpReader::fail(line_no, "missing relation");
      con.sense = to_sense(toks[i++]);
      double rhs_const = 0;
      auto rhs_terms = reader.expression(toks, i, rhs_const, line_no);
      if (!rhs_terms.empty() || i != toks.size())
        LpReader::fail(line_no, "right-hand side must be a constant");
      con.rhs = rhs_const - c;
      lp.constraints.push_back(std::move(con));
      break;
    }
    case Section::Bounds: {
      // `lo <= v <= hi`, `v <= hi`, `v >= lo`, `v = c`
      std::vector<std::string> t = toks;
      // glue unary minus onto numbers
      std::vector<std::string> glued;
      for (std::size_t k = 0; k < t.size(); ++k) {
        if ((t[k] == "-" || t[k] == "+") && k + 1 < t.size()) {
          double v;
          if (parse_number(t[k + 1], v)) {
            glued.push_back(t[k] + t[k + 1]);
            ++k;
            continue;
          }
        }
        glued.push_back(t[k]);
      }
      double v = 0;
      auto setb = [&](std::size_t var, LinearProgram::Sense s, double val, bool var_on_left) {
        auto &x = lp.vars[var];
        bool upper = (s == LinearProgram::Sense::Le) == var_on_left;
        if (s == LinearProgram::Sense::Eq) {
          x.lower = x.upper = val;
        } else if (upper) {
          x.upper = val;
        } else {
          x.lower = val;
        }
      };
      auto numeric = [&](const std::string &s, double &out) {
        if (lower(s) == "inf" || lower(s) == "+inf" || lower(s) == "infinity") {
          out = std::numeric_limits<double>::infinity();
          return true;
        }
        if (lower(s) == "-inf" || lower(s) == "-infinity") {
          out = -std::numeric_limits<double>::infinity();
          return true;
        }
        return parse_number(s, out);
      };
      if (glued.size() == 5 && numeric(glued[0], v) && is_sense(glued[1]) && is_sense(glued[3])) {
        double hi = 0;
        if (!numeric(glued[4], hi))
          LpReader::fail(line_no, "bad bound");
        auto var = reader.var(glued[2]);
        setb(var, to_sense(glued[1]), v, false);
        setb(var, to_sense(glued[3]), hi, true);
      } else if (glued.size() == 3 && is_sense(glued[1]) && numeric(glued[2], v)) {
        setb(reader.var(glued[0]), to_sense(glued[1]), v, true);
      } else if (glued.size() == 3 && is_sense(glued[1]) && numeric(glued[0], v)) {
        setb(reader.var(glued[2]), to_sense(glued[1]), v, false);
      } else if (glued.size() == 2 && lower(glued[1]) == "free") {
        auto var = reader.var(glued[0]);
        lp.vars[var].lower = -std::numeric_limits<double>::infinity();
      } else {
        LpReader::fail(line_no, "unrecognised bound");
      }
      break;
    }
    case Section::Binaries:
      for (const auto &t : toks) {
        auto var = reader.var(t);
        lp.vars[var].binary = true;
        lp.vars[var].integer = true;
        lp.vars[var].lower = 0;
        lp.vars[var].upper = 1;
      }
      break;
    case Section::Generals:
      for (const auto &t : toks)
        lp.vars[reader.var(t)].integer = true;
      break;
    case Section::None:
    case Section::End:
      LpReader::fail(line_no, "content outside of a section");
    }
  }
  return lp;
}

// ---------------------------------------------------------------- solve --

namespace {

struct DiffConstraint {
  // level[u] - level[v] >= rhs0 - Σ coef·x  (u or v may be npos)
  std::size_t u = SIZE_MAX, v = SIZE_MAX;
  double rhs = 0;
  std::vector<LinearProgram::Term> binary_terms;
};

class LpSolver {
public:
  explicit LpSolver(const LinearProgram &lp) : lp_(lp) {
    for (std::size_t i = 0; i < lp.vars.size(); ++i) {
      const auto &v = lp.vars[i];
      if (v.binary) {
        bin_index_.push_back(i);
      } else if (v.integer) {
        if (!std::isfinite(v.lower) || !std::isfinite(v.upper))
          throw Error("unsupported", "integer variable '" + v.name + "' must be bounded");
        int_index_.push_back(i);
      } else {
        throw Error("unsupported", "continuous variable '" + v.name + "' is not supported");
      }
    }
    obj_.assign(lp.vars.size(), 0.0);
    for (const auto &t : lp.objective) {
      if (!lp.vars[t.var].binary)
        throw Error("unsupported", "objective may only use binaries");
      obj_[t.var] += t.coef;
    }
    for (const auto &c : lp.constraints) {
      std::vector<LinearProgram::Term> ints, bins;
      for (const auto &t : c.terms)
        (lp.vars[t.var].binary ? bins : ints).push_back(t);
      if (ints.empty()) {
        pure_.push_back(c);
        continue;
      }
      // Normalise to `a·u − a·v + bins ≥ rhs` (Eq split in two).
      auto add = [&](double sign) {
        DiffConstraint d;
        double a = 0;
        for (const auto &t : ints) {
          double cf = sign * t.coef;
          if (a == 0)
            a = std::abs(cf);
          if (std::abs(std::abs(cf) - a) > 1e-12)
            throw Error("unsupported", "constraint '" + c.name + "' is not a difference constraint");
          if (cf > 0) {
            if (d.u != SIZE_MAX)
              throw Error("unsupported", "constraint '" + c.name + "' is not a difference constraint");
            d.u = t.var;
          } else {
            if (d.v != SIZE_MAX)
              throw Error("unsupported", "constraint '" + c.name + "' is not a difference constraint");
            d.v = t.var;
          }
        }
        d.rhs = sign * c.rhs / a;
        for (auto t : bins) {
          t.coef = sign * t.coef / a;
          d.binary_terms.push_back(t);
        }
        diffs_.push_back(std::move(d));
      };
      if (c.sense == LinearProgram::Sense::Ge || c.sense == LinearProgram::Sense::Eq)
        add(1.0);
      if (c.sense == LinearProgram::Sense::Le || c.sense == LinearProgram::Sense::Eq)
        add(-1.0);
    }
    value_.assign(lp.vars.size(), -1);
  }

  std::optional<LpSolution> solve() {
    dfs(0, lp_.objective_constant);
    if (!best_)
      return std::nullopt;
    return best_;
  }

private:
  bool pure_feasible() const {
    for (const auto &c : pure_) {
      double lo = 0, hi = 0;
      for (const auto &t : c.terms) {
        int x = value_[t.var];
        if (x >= 0) {
          lo += t.coef * x;
          hi += t.coef * x;
        } else {
          lo += std::min(0.0, t.coef);
          hi += std::max(0.0, t.coef);
        }
      }
      const double tol = 1e-9;
      switch (c.sense) {
      case LinearProgram::Sense::Ge:
        if (hi < c.rhs - tol)
          return false;
        break;
      case LinearProgram::Sense::Le:
        if (lo > c.rhs + tol)
          return false;
        break;
      case LinearProgram::Sense::Eq:
        if (hi < c.rhs - tol || lo > c.rhs + tol)
          return false;
        break;
      }
    }
    return true;
  }

  // Bellman-Ford on difference constraints with the binaries fixed.
  std::optional<std::vector<double>> levels() const {
    // node 0..k-1 integer vars, node k = zero reference
    std::map<std::size_t, std::size_t> id;
    for (auto v : int_index_)
      id.emplace(v, id.size());
    const std::size_t z = id.size();
    struct Edge {
      std::size_t from, to;
      double w;
    };
    // x_to - x_from <= w
    std::vector<Edge> edges;
    for (auto v : int_index_) {
      edges.push_back({z, id[v], std::floor(lp_.vars[v].upper + 1e-9)});
      edges.push_back({id[v], z, -std::ceil(lp_.vars[v].lower - 1e-9)});
    }
    for (const auto &d : diffs_) {
      double r = d.rhs;
      for (const auto &t : d.binary_terms)
        r -= t.coef * value_[t.var];
      r = std::ceil(r - 1e-9);
      // u - v >= r  ⇔  v - u <= -r
      std::size_t u = d.u == SIZE_MAX ? z : id.at(d.u);
      std::size_t v = d.v == SIZE_MAX ? z : id.at(d.v);
      if (u == v) {
        if (0 < r)
          return std::nullopt;
        continue;
      }
      edges.push_back({u, v, -r});
    }
    std::vector<double> dist(z + 1, 0.0);
    for (std::size_t it = 0; it <= z + 1; ++it) {
      bool changed = false;
      for (const auto &e : edges)
        if (dist[e.from] + e.w < dist[e.to] - 1e-9) {
          dist[e.to] = dist[e.from] + e.w;
          changed = true;
        }
      if (!changed) {
        std::vector<double> out(lp_.vars.size(), 0.0);
        for (auto v : int_index_)
          out[v] = dist[id[v]] - dist[z];
        return out;
      }
    }
    return std::nullopt;
  }

  void dfs(std::size_t i, double cost) {
    if (best_ && cost >= best_->objective - 1e-9)
      return;
    if (!pure_feasible())
      return;
    if (i == bin_index_.size()) {
      auto lv = levels();
      if (!lv)
        return;
      LpSolution s;
      s.objective = cost;
      s.values = *lv;
      for (auto b : bin_index_)
        s.values[b] = value_[b];
      best_ = std::move(s);
      return;
    }
    auto var = bin_index_[i];
    // Try the cheaper value first.
    int first = obj_[var] < 0 ? 1 : 0;
    for (int x : {first, 1 - first}) {
      value_[var] = x;
      dfs(i + 1, cost + obj_[var] * x);
    }
    value_[var] = -1;
  }

  const LinearProgram &lp_;
  std::vector<std::size_t> bin_index_, int_index_;
  std::vector<double> obj_;
  std::vector<LinearProgram::Constraint> pure_;
  std::vector<DiffConstraint> diffs_;
  std::vector<int> value_;
  std::optional<LpSolution> best_;
};

} // namespace

std::optional<LpSolution> solve_lp(const LinearProgram &lp) { return LpSolver(lp).solve(); }

} // namespace eqnet
