#pragma once

#include <cctype>
#include <charconv>
#include <optional>
#include <string>
#include <string_view>

#include "p3/expr.hpp"

namespace p3 {

struct ParseError : std::runtime_error {
  std::size_t offset;
  ParseError(const std::string& what, std::size_t off)
      : std::runtime_error(what + " at offset " + std::to_string(off)), offset(off) {}
};

namespace detail {

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  Expr run() {
    Expr e = parse_expr();
    skip_ws();
    if (pos_ != text_.size()) fail("unexpected trailing input");
    return e;
  }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;

  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError("syntax error: " + msg, pos_);
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool eat(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  char peek() {
    skip_ws();
    return pos_ < text_.size() ? text_[pos_] : '\0';
  }

  // expr := term (('+'|'-') term)*
  Expr parse_expr() {
    Expr e = parse_term();
    while (true) {
      if (eat('+'))
        e = e + parse_term();
      else if (eat('-'))
        e = e - parse_term();
      else
        return e;
    }
  }

  // term := factor (('*'|'/') factor)*
  Expr parse_term() {
    Expr e = parse_factor();
    while (true) {
      if (eat('*'))
        e = e * parse_factor();
      else if (eat('/'))
        e = e / parse_factor();
      else
        return e;
    }
  }

  // factor := base ('^' factor)?
  Expr parse_factor() {
    Expr base = parse_base();
    if (eat('^')) return pow(std::move(base), parse_factor());
    return base;
  }

  // base := number | ident | '(' expr ')' | func '(' expr ')' | '-' base
  Expr parse_base() {
    skip_ws();
    if (pos_ >= text_.size()) fail("expected expression");
    char c = text_[pos_];
    if (c == '-') {
      ++pos_;
      return -parse_base();
    }
    if (c == '(') {
      ++pos_;
      Expr e = parse_expr();
      if (!eat(')')) fail("expected ')'");
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_ident();
    fail(std::string("unexpected character '") + c + "'");
  }

  Expr parse_number() {
    const char* begin = text_.data() + pos_;
    const char* end = text_.data() + text_.size();
    double value = 0.0;
    auto [p, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{}) fail("malformed number");
    pos_ = static_cast<std::size_t>(p - text_.data());
    return Expr::num(value);
  }

  Expr parse_ident() {
    std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
      ++pos_;
    std::string name(text_.substr(start, pos_ - start));

    if (peek() == '(') {
      std::optional<Op> fn;
      if (name == "exp") fn = Op::Exp;
      else if (name == "ln") fn = Op::Ln;
      else if (name == "sin") fn = Op::Sin;
      else if (name == "cos") fn = Op::Cos;
      else if (name == "abs") fn = Op::Abs;
      if (!fn) {
        pos_ = start;
        fail("unknown function '" + name + "' (allowed: exp, ln, sin, cos, abs)");
      }
      eat('(');
      Expr arg = parse_expr();
      if (!eat(')')) fail("expected ')'");
      return Expr::unary(*fn, std::move(arg));
    }

    if (name.size() == 2 && name[0] == 'x' && name[1] >= '1' && name[1] <= '3')
      return Expr::var(name[1] - '0');
    return Expr::param(std::move(name));
  }
};

}  // namespace detail

inline Expr parse(std::string_view text) { return detail::Parser(text).run(); }

}  // namespace p3
