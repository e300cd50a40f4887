#include "eqnet/sexpr.hpp"

#include "eqnet/error.hpp"

#include <cctype>

namespace eqnet {

std::string SExpr::where() const {
  return std::to_string(line) + ":" + std::to_string(column);
}

std::string SExpr::to_string() const {
  if (!is_list)
    return atom;
  std::string out = "(";
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i)
      out += ' ';
    out += items[i].to_string();
  }
  return out + ")";
}

void syntax_error(const SExpr &at, const std::string &what) {
  throw Error("syntax", at.where() + ": " + what);
}

namespace {

class Reader {
public:
  explicit Reader(std::string_view text) : text_(text) {}

  bool at_end() {
    skip();
    return pos_ >= text_.size();
  }

  SExpr read() {
    skip();
    SExpr e;
    e.line = line_;
    e.column = col_;
    if (pos_ >= text_.size())
      fail("unexpected end of input");
    char c = text_[pos_];
    if (c == ')')
      fail("unexpected ')'");
    if (c == '(') {
      advance();
      e.is_list = true;
      for (;;) {
        skip();
        if (pos_ >= text_.size())
          throw Error("syntax", e.where() + ": unterminated list");
        if (text_[pos_] == ')') {
          advance();
          break;
        }
        e.items.push_back(read());
      }
      return e;
    }
    std::size_t start = pos_;
    while (pos_ < text_.size() && !std::isspace(static_cast<unsigned char>(text_[pos_])) &&
           text_[pos_] != '(' && text_[pos_] != ')' && text_[pos_] != ';')
      advance();
    e.atom = std::string(text_.substr(start, pos_ - start));
    return e;
  }

private:
  void advance() {
    if (text_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  void skip() {
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (c == ';' || c == '#') {
        while (pos_ < text_.size() && text_[pos_] != '\n')
          advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        break;
      }
    }
  }

  [[noreturn]] void fail(const std::string &what) const {
    throw Error("syntax", std::to_string(line_) + ":" + std::to_string(col_) + ": " + what);
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t col_ = 1;
};

} // namespace

std::vector<SExpr> parse_sexprs(std::string_view text) {
  Reader r(text);
  std::vector<SExpr> out;
  while (!r.at_end())
    out.push_back(r.read());
  return out;
}

SExpr parse_sexpr(std::string_view text) {
  Reader r(text);
  if (r.at_end())
    throw Error("syntax", "1:1: empty input");
  SExpr e = r.read();
  if (!r.at_end())
    throw Error("syntax", "trailing input after " + e.where());
  return e;
}

} // namespace eqnet
