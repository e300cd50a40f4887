#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace eqnet {

/// A linear integer program as read back from LP text.
struct LinearProgram {
  enum class Sense { Le, Ge, Eq };
  struct Term {
    double coef = 0;
    std::size_t var = 0;
  };
  struct Constraint {
    std::string name;
    std::vector<Term> terms;
    Sense sense = Sense::Ge;
    double rhs = 0;
  };
  struct Variable {
    std::string name;
    double lower = 0;
    double upper = std::numeric_limits<double>::infinity();
    bool binary = false;
    bool integer = false;
  };

  std::vector<Variable> vars;
  std::vector<Term> objective;
  double objective_constant = 0;
  std::vector<Constraint> constraints;

  std::optional<std::size_t> find(std::string_view name) const;
};

/// Parses the subset of the CPLEX LP format written by `export_lp`.
/// Errors: "syntax".
LinearProgram parse_lp(std::string_view text);

struct LpSolution {
  double objective = 0;
  std::vector<double> values;
};

/// Exact solver for programs whose binaries carry the objective and whose
/// bounded integer variables only appear in difference constraints
/// (a·u − a·v + Σ c·x {≥,≤} r). Binaries are branched depth first;
/// integer feasibility of each leaf is decided by Bellman-Ford.
/// Returns nullopt when infeasible. Throws Error("unsupported") otherwise.
std::optional<LpSolution> solve_lp(const LinearProgram &lp);

} // namespace eqnet
