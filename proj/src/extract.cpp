#include "eqnet/extract.hpp"

#include "eqnet/error.hpp"
#include "eqnet/kinds.hpp"

#include <algorithm>
#include <functional>
#include <charconv>
#include <chrono>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>
#include <unordered_map>

namespace eqnet {

namespace {
constexpr double kEps = 1e-9;
constexpr double kInf = std::numeric_limits<double>::infinity();
} // namespace

// ---------------------------------------------------------- CostModel ----

CostModel &CostModel::set(std::string_view op, double cost) {
  if (!(cost >= 0) || !std::isfinite(cost))
    throw Error("bad-cost", "cost of '" + std::string(op) + "' must be finite and non-negative");
  costs_[std::string(op)] = cost;
  return *this;
}

double CostModel::cost(Symbol op) const {
  const std::string &s = op.str();
  if (auto it = costs_.find(s); it != costs_.end())
    return it->second;
  std::string_view family;
  if (s.rfind("input:", 0) == 0)
    family = "input";
  else if (proj_index(s))
    family = "proj";
  else if (is_learned_name(s))
    family = "def";
  else if (s == "CONST0" || s == "CONST1")
    family = "const";
  if (!family.empty())
    if (auto it = costs_.find(family); it != costs_.end())
      return it->second;
  return default_;
}

CostModel CostModel::parse(std::string_view text) {
  CostModel cm;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos)
      line.resize(hash);
    std::istringstream ls(line);
    std::string sym, value, extra;
    if (!(ls >> sym))
      continue;
    double c = 0;
    if (!(ls >> value) || (ls >> extra))
      throw Error("syntax", "line " + std::to_string(line_no) + ": expected '<symbol> <cost>'");
    auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), c);
    if (ec != std::errc{} || ptr != value.data() + value.size())
      throw Error("syntax", "line " + std::to_string(line_no) + ": bad cost '" + value + "'");
    if (sym == "default") {
      if (!(c >= 0) || !std::isfinite(c))
        throw Error("bad-cost", "default cost must be finite and non-negative");
      cm.default_ = c;
    } else {
      cm.set(sym, c);
    }
  }
  return cm;
}

// ---------------------------------------------------------- Selection ----

void validate_selection(const EGraph &g, const Selection &s, const CostModel &cm) {
  double total = 0;
  for (const auto &[cls, node] : s.chosen) {
    if (g.find(cls) != cls)
      throw InvariantError("selection key " + std::to_string(cls) + " is not canonical");
    const auto &ns = g.nodes(cls);
    if (std::find(ns.begin(), ns.end(), node) == ns.end())
      throw InvariantError("selected node is not in class " + std::to_string(cls));
    for (auto ch : node.children)
      if (!s.chosen.count(g.find(ch)))
        throw InvariantError("selection not closed: class " + std::to_string(ch) + " missing");
    total += cm.cost(node.op);
  }
  for (auto r : s.roots)
    if (!s.chosen.count(g.find(r)))
      throw InvariantError("root class " + std::to_string(r) + " not selected");
  if (std::abs(total - s.cost) > 1e-6 * std::max(1.0, std::abs(total)))
    throw InvariantError("selection cost mismatch");
  // acyclicity: Kahn over chosen nodes
  std::map<EClassId, std::size_t> indeg;
  for (const auto &[cls, node] : s.chosen)
    indeg.emplace(cls, 0);
  for (const auto &[cls, node] : s.chosen) {
    std::set<EClassId> kids(node.children.begin(), node.children.end());
    for (auto ch : kids)
      ++indeg[ch];
  }
  std::vector<EClassId> ready;
  for (const auto &[c, d] : indeg)
    if (d == 0)
      ready.push_back(c);
  std::size_t seen = 0;
  while (!ready.empty()) {
    auto c = ready.back();
    ready.pop_back();
    ++seen;
    const auto &node = s.chosen.at(c);
    std::set<EClassId> kids(node.children.begin(), node.children.end());
    for (auto ch : kids)
      if (--indeg[ch] == 0)
        ready.push_back(ch);
  }
  if (seen != s.chosen.size())
    throw InvariantError("selection is cyclic");
}

TermPtr selection_term(const Selection &s, EClassId root) {
  std::unordered_map<EClassId, TermPtr> memo;
  std::function<TermPtr(EClassId)> build = [&](EClassId c) -> TermPtr {
    if (auto it = memo.find(c); it != memo.end())
      return it->second;
    const ENode &n = s.chosen.at(c);
    std::vector<TermPtr> kids;
    for (auto ch : n.children)
      kids.push_back(build(ch));
    auto t = make_term(n.op, std::move(kids));
    memo.emplace(c, t);
    return t;
  };
  return build(root);
}

namespace {

std::vector<EClassId> reachable(const EGraph &g, const std::vector<EClassId> &roots) {
  std::set<EClassId> seen;
  std::vector<EClassId> stack;
  for (auto r : roots)
    stack.push_back(g.find(r));
  while (!stack.empty()) {
    auto c = stack.back();
    stack.pop_back();
    if (!seen.insert(c).second)
      continue;
    for (const auto &n : g.nodes(c))
      for (auto ch : n.children)
        stack.push_back(ch);
  }
  return {seen.begin(), seen.end()};
}

Selection close_selection(const EGraph &g, const std::vector<EClassId> &roots,
                          const std::map<EClassId, const ENode *> &pick, const CostModel &cm) {
  Selection s;
  for (auto r : roots)
    s.roots.push_back(g.find(r));
  std::vector<EClassId> stack(s.roots.begin(), s.roots.end());
  while (!stack.empty()) {
    auto c = stack.back();
    stack.pop_back();
    if (s.chosen.count(c))
      continue;
    const ENode &n = *pick.at(c);
    s.chosen.emplace(c, n);
    s.cost += cm.cost(n.op);
    for (auto ch : n.children)
      stack.push_back(ch);
  }
  return s;
}

/// Per-class best tree cost (bottom-up fixpoint) over the given classes.
std::map<EClassId, std::pair<double, const ENode *>>
tree_costs(const EGraph &g, const std::vector<EClassId> &classes, const CostModel &cm) {
  std::map<EClassId, std::pair<double, const ENode *>> best;
  for (auto c : classes)
    best[c] = {kInf, nullptr};
  bool changed = true;
  while (changed) {
    changed = false;
    for (auto c : classes) {
      for (const auto &n : g.nodes(c)) {
        double t = cm.cost(n.op);
        for (auto ch : n.children)
          t += best.at(ch).first;
        if (t < best[c].first - kEps * std::max(1.0, std::abs(t))) {
          best[c] = {t, &n};
          changed = true;
        }
      }
    }
  }
  return best;
}

} // namespace

Selection extract_greedy(const EGraph &g, const std::vector<EClassId> &roots, const CostModel &cm) {
  auto classes = reachable(g, roots);
  auto best = tree_costs(g, classes, cm);
  std::map<EClassId, const ENode *> pick;
  for (const auto &[c, b] : best)
    if (b.second)
      pick[c] = b.second;
  for (auto r : roots)
    if (!pick.count(g.find(r)))
      throw Error("infeasible", "class " + std::to_string(r) + " has no finite-cost term");
  return close_selection(g, roots, pick, cm);
}

// -------------------------------------------------------- branch & bound --

namespace {

struct BnbNode {
  std::size_t pos; // index in g.nodes(class)
  double cost;
  std::vector<std::size_t> kids; // distinct child class indices
  double order_key;
};

class BranchAndBound {
public:
  BranchAndBound(const EGraph &g, const std::vector<EClassId> &roots, const CostModel &cm,
                 const IlpOptions &opt)
      : g_(g), cm_(cm), opt_(opt) {
    for (auto r : roots)
      roots_.push_back(g.find(r));
    prepare();
  }

  Selection solve() {
    start_ = std::chrono::steady_clock::now();
    // Greedy incumbent as the initial upper bound.
    Selection greedy = extract_greedy(g_, roots_, cm_);
    best_cost_ = greedy.cost;
    best_count_ = greedy.chosen.size();
    best_key_.assign(classes_.size(), -1);
    for (const auto &[c, n] : greedy.chosen) {
      const auto &ns = g_.nodes(c);
      best_key_[index_.at(c)] =
          static_cast<int>(std::find(ns.begin(), ns.end(), n) - ns.begin());
    }
    have_best_ = true;

    choice_.assign(classes_.size(), -1);
    needed_.assign(classes_.size(), 0);
    std::vector<std::size_t> frontier;
    double lb = 0;
    for (auto r : roots_) {
      auto k = index_.at(r);
      if (needed_[k]++ == 0) {
        frontier.push_back(k);
        lb += min_cost_[k];
      }
    }
    std::sort(frontier.begin(), frontier.end(), std::greater<>());
    search(frontier, 0.0, lb, 0);

    std::map<EClassId, const ENode *> pick;
    for (std::size_t k = 0; k < classes_.size(); ++k)
      if (best_key_[k] >= 0)
        pick[classes_[k]] = &g_.nodes(classes_[k])[static_cast<std::size_t>(best_key_[k])];
    Selection s = close_selection(g_, roots_, pick, cm_);
    s.timed_out = timed_out_;
    return s;
  }

private:
  void prepare() {
    classes_ = reachable(g_, roots_);
    for (std::size_t i = 0; i < classes_.size(); ++i)
      index_[classes_[i]] = i;
    auto tree = tree_costs(g_, classes_, cm_);
    for (auto r : roots_)
      if (!tree.at(r).second)
        throw Error("infeasible", "class " + std::to_string(r) + " has no finite-cost term");

    nodes_.resize(classes_.size());
    for (std::size_t k = 0; k < classes_.size(); ++k) {
      const auto &ns = g_.nodes(classes_[k]);
      for (std::size_t p = 0; p < ns.size(); ++p) {
        BnbNode b{p, cm_.cost(ns[p].op), {}, 0};
        bool viable = true;
        double key = b.cost;
        for (auto ch : ns[p].children) {
          if (ch == classes_[k] || !std::isfinite(tree.at(ch).first)) {
            viable = false;
            break;
          }
          key += tree.at(ch).first;
          b.kids.push_back(index_.at(ch));
        }
        if (!viable)
          continue;
        std::sort(b.kids.begin(), b.kids.end());
        b.kids.erase(std::unique(b.kids.begin(), b.kids.end()), b.kids.end());
        b.order_key = key;
        nodes_[k].push_back(std::move(b));
      }
      if (opt_.prune_dominated)
        prune(nodes_[k]);
      std::stable_sort(nodes_[k].begin(), nodes_[k].end(), [](const BnbNode &a, const BnbNode &b) {
        if (a.order_key != b.order_key)
          return a.order_key < b.order_key;
        return a.pos < b.pos;
      });
    }
    min_cost_.assign(classes_.size(), kInf);
    for (std::size_t k = 0; k < classes_.size(); ++k)
      for (const auto &b : nodes_[k])
        min_cost_[k] = std::min(min_cost_[k], b.cost);

    // Parent-class counts and a children-first order for the share bound.
    std::vector<std::set<std::size_t>> parents(classes_.size());
    for (std::size_t k = 0; k < classes_.size(); ++k)
      for (const auto &b : nodes_[k])
        for (auto ch : b.kids)
          parents[ch].insert(k);
    inv_parents_.assign(classes_.size(), 1.0);
    for (std::size_t k = 0; k < classes_.size(); ++k)
      if (!parents[k].empty())
        inv_parents_[k] = 1.0 / static_cast<double>(parents[k].size());
    std::vector<char> state(classes_.size(), 0);
    for (std::size_t r = 0; r < classes_.size(); ++r) {
      if (state[r])
        continue;
      std::vector<std::pair<std::size_t, std::size_t>> stack{{r, 0}};
      state[r] = 1;
      while (!stack.empty()) {
        auto &[k, i] = stack.back();
        std::vector<std::size_t> kids;
        for (const auto &b : nodes_[k])
          kids.insert(kids.end(), b.kids.begin(), b.kids.end());
        if (i < kids.size()) {
          auto ch = kids[i++];
          if (!state[ch]) {
            state[ch] = 1;
            stack.emplace_back(ch, 0);
          }
        } else {
          post_order_.push_back(k);
          stack.pop_back();
        }
      }
    }
    share_.assign(classes_.size(), kInf);
  }

  // Lower bound on the cost still to pay for the pending classes: each
  // pending class pays for one node plus a 1/parents share of every class
  // below it that is neither chosen nor pending. A class with p parent
  // classes receives at most p shares, each of weight at most one, so no
  // class is over-counted.
  double share_bound(const std::vector<std::size_t> &frontier) {
    auto stop = [&](std::size_t k) { return choice_[k] >= 0 || needed_[k] > 0; };
    auto eval = [&](std::size_t k) {
      double best = kInf;
      for (const auto &b : nodes_[k]) {
        double v = b.cost;
        for (auto ch : b.kids)
          if (!stop(ch))
            v += share_[ch] * inv_parents_[ch];
        best = std::min(best, v);
      }
      return best;
    };
    std::fill(share_.begin(), share_.end(), kInf);
    for (bool changed = true; changed;) {
      changed = false;
      for (auto k : post_order_) {
        if (stop(k))
          continue;
        double v = eval(k);
        if (v < share_[k] - kEps) {
          share_[k] = v;
          changed = true;
        }
      }
    }
    double total = 0;
    for (auto k : frontier)
      total += eval(k);
    return total;
  }

  static void prune(std::vector<BnbNode> &ns) {
    std::vector<bool> dead(ns.size(), false);
    for (std::size_t i = 0; i < ns.size(); ++i)
      for (std::size_t j = 0; j < ns.size() && !dead[i]; ++j) {
        if (i == j || dead[j])
          continue;
        const auto &m = ns[j], &n = ns[i];
        if (m.cost > n.cost + kEps)
          continue;
        if (!std::includes(n.kids.begin(), n.kids.end(), m.kids.begin(), m.kids.end()))
          continue;
        if (m.cost < n.cost - kEps || m.pos < n.pos)
          dead[i] = true;
      }
    std::vector<BnbNode> kept;
    for (std::size_t i = 0; i < ns.size(); ++i)
      if (!dead[i])
        kept.push_back(std::move(ns[i]));
    ns = std::move(kept);
  }

  bool reaches(std::size_t from, std::size_t target) {
    // Depth-first over chosen edges only.
    ++visit_epoch_;
    if (visit_mark_.size() != classes_.size())
      visit_mark_.assign(classes_.size(), 0);
    std::vector<std::size_t> stack{from};
    while (!stack.empty()) {
      auto c = stack.back();
      stack.pop_back();
      if (c == target)
        return true;
      if (visit_mark_[c] == visit_epoch_ || choice_[c] < 0)
        continue;
      visit_mark_[c] = visit_epoch_;
      for (auto ch : nodes_[c][static_cast<std::size_t>(choice_[c])].kids)
        stack.push_back(ch);
    }
    return false;
  }

  bool out_of_time() {
    if ((++ticks_ & 1023) == 0) {
      double secs =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
      if (secs > opt_.time_limit_seconds)
        timed_out_ = true;
    }
    return timed_out_;
  }

  int compare_to_best(double cost, std::size_t count, const std::vector<int> &key) const {
    double tol = kEps * std::max(1.0, std::abs(best_cost_));
    if (cost < best_cost_ - tol)
      return -1;
    if (cost > best_cost_ + tol)
      return 1;
    if (count != best_count_)
      return count < best_count_ ? -1 : 1;
    return key < best_key_ ? -1 : (key == best_key_ ? 0 : 1);
  }

  void record(double cost, std::size_t count) {
    std::vector<int> key(classes_.size(), -1);
    for (std::size_t k = 0; k < classes_.size(); ++k)
      if (choice_[k] >= 0)
        key[k] = static_cast<int>(nodes_[k][static_cast<std::size_t>(choice_[k])].pos);
    if (!have_best_ || compare_to_best(cost, count, key) < 0) {
      best_cost_ = cost;
      best_count_ = count;
      best_key_ = std::move(key);
      have_best_ = true;
    }
  }

  void search(std::vector<std::size_t> &frontier, double cost, double lb, std::size_t chosen) {
    if (out_of_time())
      return;
    if (frontier.empty()) {
      record(cost, chosen);
      return;
    }
    {
      double bound = cost + share_bound(frontier);
      double tol = kEps * std::max(1.0, std::abs(best_cost_));
      if (bound > best_cost_ + tol)
        return;
    }
    const std::size_t k = frontier.back();
    frontier.pop_back();
    const double lb_rest = lb - min_cost_[k];
    for (std::size_t a = 0; a < nodes_[k].size(); ++a) {
      const BnbNode &b = nodes_[k][a];
      bool cyclic = false;
      for (auto ch : b.kids)
        if (choice_[ch] >= 0 && reaches(ch, k)) {
          cyclic = true;
          break;
        }
      if (cyclic)
        continue;
      double new_lb = lb_rest;
      std::size_t pushed = 0;
      for (auto ch : b.kids)
        if (needed_[ch] == 0 && choice_[ch] < 0)
          new_lb += min_cost_[ch];
      double new_cost = cost + b.cost;
      double bound = new_cost + new_lb;
      double tol = kEps * std::max(1.0, std::abs(best_cost_));
      if (bound > best_cost_ + tol)
        continue;
      std::size_t new_pending = frontier.size();
      for (auto ch : b.kids)
        if (needed_[ch] == 0 && choice_[ch] < 0)
          ++new_pending;
      if (bound >= best_cost_ - tol && chosen + 1 + new_pending > best_count_)
        continue;

      choice_[k] = static_cast<int>(a);
      for (auto ch : b.kids)
        if (needed_[ch]++ == 0 && choice_[ch] < 0) {
          frontier.push_back(ch);
          ++pushed;
        }
      search(frontier, new_cost, new_lb, chosen + 1);
      for (std::size_t i = 0; i < pushed; ++i)
        frontier.pop_back();
      for (auto ch : b.kids)
        --needed_[ch];
      choice_[k] = -1;
      if (timed_out_)
        break;
    }
    frontier.push_back(k);
  }

  const EGraph &g_;
  const CostModel &cm_;
  IlpOptions opt_;
  std::vector<EClassId> roots_;
  std::vector<EClassId> classes_;
  std::unordered_map<EClassId, std::size_t> index_;
  std::vector<std::vector<BnbNode>> nodes_;
  std::vector<double> min_cost_;
  std::vector<double> inv_parents_;
  std::vector<std::size_t> post_order_;
  std::vector<double> share_;

  std::vector<int> choice_;
  std::vector<std::size_t> needed_;
  std::vector<unsigned> visit_mark_;
  unsigned visit_epoch_ = 0;

  bool have_best_ = false;
  double best_cost_ = kInf;
  std::size_t best_count_ = 0;
  std::vector<int> best_key_;

  std::chrono::steady_clock::time_point start_;
  std::uint64_t ticks_ = 0;
  bool timed_out_ = false;
};

} // namespace

Selection extract_ilp(const EGraph &g, const std::vector<EClassId> &roots, const CostModel &cm,
                      const IlpOptions &opt) {
  return BranchAndBound(g, roots, cm, opt).solve();
}

// ---------------------------------------------------------- LP export ----

IlpProblem build_ilp(const EGraph &g, const std::vector<EClassId> &roots, const CostModel &cm) {
  IlpProblem p;
  for (auto r : roots)
    p.roots.push_back(g.find(r));
  p.classes = reachable(g, p.roots);
  for (auto c : p.classes) {
    const auto &ns = g.nodes(c);
    for (std::size_t k = 0; k < ns.size(); ++k) {
      p.node_vars.push_back(
          {"x_" + std::to_string(c) + "_" + std::to_string(k), c, k, cm.cost(ns[k].op)});
      std::vector<EClassId> kids;
      for (auto ch : ns[k].children)
        kids.push_back(g.find(ch));
      std::sort(kids.begin(), kids.end());
      kids.erase(std::unique(kids.begin(), kids.end()), kids.end());
      p.children.push_back(std::move(kids));
    }
  }
  return p;
}

namespace {

std::string num(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string level(EClassId c) { return "l_" + std::to_string(c); }

} // namespace

std::string export_lp(const IlpProblem &p) {
  std::map<EClassId, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < p.node_vars.size(); ++i)
    by_class[p.node_vars[i].eclass].push_back(i);
  const std::size_t n = p.level_bound();
  const std::string big_m = std::to_string(n + 1);

  std::ostringstream out;
  out << "\\ eqnet e-graph extraction\n";
  out << "Minimize\n obj:";
  bool any = false;
  for (const auto &v : p.node_vars)
    if (v.cost != 0) {
      out << (any ? " + " : " ") << num(v.cost) << " " << v.name;
      any = true;
    }
  if (!any)
    out << " 0";
  out << "\nSubject To\n";
  auto sum = [&](EClassId c, const char *sign, bool leading) {
    std::string s;
    bool first = leading;
    for (auto i : by_class[c]) {
      s += first ? std::string(" ") + (sign[0] == '-' ? "- " : "") : std::string(" ") + sign + " ";
      s += p.node_vars[i].name;
      first = false;
    }
    return s;
  };
  std::set<EClassId> root_set(p.roots.begin(), p.roots.end());
  for (auto r : root_set)
    out << " root_" << r << ":" << sum(r, "+", true) << " >= 1\n";
  for (std::size_t i = 0; i < p.node_vars.size(); ++i) {
    const auto &v = p.node_vars[i];
    for (auto ch : p.children[i]) {
      out << " cover_" << v.eclass << "_" << v.index << "_" << ch << ": " << v.name
          << sum(ch, "-", false) << " <= 0\n";
      out << " acyc_" << v.eclass << "_" << v.index << "_" << ch << ":";
      if (ch != v.eclass)
        out << " " << level(v.eclass) << " - " << level(ch);
      out << " - " << big_m << " " << v.name << " >= -" << n << "\n";
    }
  }
  out << "Bounds\n";
  for (auto c : p.classes)
    out << " 0 <= " << level(c) << " <= " << n << "\n";
  out << "Binaries\n";
  for (const auto &v : p.node_vars)
    out << " " << v.name << "\n";
  out << "Generals\n";
  for (auto c : p.classes)
    out << " " << level(c) << "\n";
  out << "End\n";
  return out.str();
}

} // namespace eqnet
