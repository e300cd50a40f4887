#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace eqnet {

/// A parsed S-expression: either an atom or a list. Every node remembers the
/// line/column it started at so that format errors can point at the source.
struct SExpr {
  bool is_list = false;
  std::string atom;
  std::vector<SExpr> items;
  std::size_t line = 1;
  std::size_t column = 1;

  bool is_atom() const { return !is_list; }
  bool is_atom(std::string_view s) const { return !is_list && atom == s; }
  /// True when this is a list whose first item is the atom `head`.
  bool is_form(std::string_view head) const {
    return is_list && !items.empty() && items.front().is_atom(head);
  }
  std::string where() const;
  std::string to_string() const;
};

/// Parses every top-level form in `text`. Comments start with `;` or `#` and
/// run to the end of the line. Throws Error("syntax") with a position.
std::vector<SExpr> parse_sexprs(std::string_view text);

/// Parses exactly one form.
SExpr parse_sexpr(std::string_view text);

[[noreturn]] void syntax_error(const SExpr &at, const std::string &what);

} // namespace eqnet
