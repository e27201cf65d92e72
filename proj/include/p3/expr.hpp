#pragma once

#include <array>
#include <charconv>
#include <cmath>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace p3 {

using Point = std::array<double, 3>;
using Params = std::map<std::string, double>;

struct EvalError : std::runtime_error {
  explicit EvalError(const std::string& what) : std::runtime_error(what) {}
};

enum class Op {
  Num,
  Var,
  Param,
  Neg,
  Add,
  Sub,
  Mul,
  Div,
  Pow,
  Exp,
  Ln,
  Sin,
  Cos,
  Abs,
};

inline bool is_function(Op op) {
  return op == Op::Exp || op == Op::Ln || op == Op::Sin || op == Op::Cos ||
         op == Op::Abs;
}

/// Immutable symbolic expression over x1,x2,x3 and named parameters.
/// Copying an Expr copies a shared pointer; all operations build new trees.
class Expr {
  struct Node {
    Op op;
    double num = 0.0;
    int axis = 0;  // 1..3 for Op::Var
    std::string name;
    std::vector<Expr> kids;
  };
  std::shared_ptr<const Node> n_;

  explicit Expr(std::shared_ptr<const Node> n) : n_(std::move(n)) {}

  static Expr make(Node&& n) {
    return Expr(std::make_shared<const Node>(std::move(n)));
  }

 public:
  Expr() : Expr(num(0.0)) {}

  static Expr num(double v) { return make({Op::Num, v, 0, {}, {}}); }
  static Expr var(int axis) {
    if (axis < 1 || axis > 3) throw std::invalid_argument("axis must be 1..3");
    return make({Op::Var, 0.0, axis, {}, {}});
  }
  static Expr param(std::string name) {
    return make({Op::Param, 0.0, 0, std::move(name), {}});
  }
  static Expr unary(Op op, Expr a) { return make({op, 0.0, 0, {}, {std::move(a)}}); }
  static Expr binary(Op op, Expr a, Expr b) {
    return make({op, 0.0, 0, {}, {std::move(a), std::move(b)}});
  }

  Op op() const { return n_->op; }
  double num_value() const { return n_->num; }
  int axis() const { return n_->axis; }
  const std::string& name() const { return n_->name; }
  const Expr& child(std::size_t i) const { return n_->kids[i]; }
  std::size_t arity() const { return n_->kids.size(); }

  bool is_num() const { return n_->op == Op::Num; }
  bool is_num(double v) const { return is_num() && n_->num == v; }

  bool same(const Expr& o) const {
    if (n_ == o.n_) return true;
    if (n_->op != o.n_->op) return false;
    switch (n_->op) {
      case Op::Num:
        return n_->num == o.n_->num;
      case Op::Var:
        return n_->axis == o.n_->axis;
      case Op::Param:
        return n_->name == o.n_->name;
      default:
        break;
    }
    if (arity() != o.arity()) return false;
    for (std::size_t i = 0; i < arity(); ++i)
      if (!child(i).same(o.child(i))) return false;
    return true;
  }

  bool depends_on(int axis) const {
    if (n_->op == Op::Var) return n_->axis == axis;
    for (const auto& k : n_->kids)
      if (k.depends_on(axis)) return true;
    return false;
  }

  bool has_any_var() const {
    if (n_->op == Op::Var) return true;
    for (const auto& k : n_->kids)
      if (k.has_any_var()) return true;
    return false;
  }

  void collect_params(std::vector<std::string>& out) const {
    if (n_->op == Op::Param) {
      for (const auto& s : out)
        if (s == n_->name) return;
      out.push_back(n_->name);
    }
    for (const auto& k : n_->kids) k.collect_params(out);
  }

  double eval(const Point& x, const Params& params = {}) const {
    switch (n_->op) {
      case Op::Num:
        return n_->num;
      case Op::Var:
        return x[static_cast<std::size_t>(n_->axis - 1)];
      case Op::Param: {
        auto it = params.find(n_->name);
        if (it == params.end())
          throw EvalError("unbound parameter: " + n_->name);
        return it->second;
      }
      case Op::Neg:
        return -child(0).eval(x, params);
      case Op::Add:
        return child(0).eval(x, params) + child(1).eval(x, params);
      case Op::Sub:
        return child(0).eval(x, params) - child(1).eval(x, params);
      case Op::Mul:
        return child(0).eval(x, params) * child(1).eval(x, params);
      case Op::Div: {
        double a = child(0).eval(x, params);
        double b = child(1).eval(x, params);
        if (b == 0.0) throw EvalError("division by zero");
        return a / b;
      }
      case Op::Pow: {
        double a = child(0).eval(x, params);
        double b = child(1).eval(x, params);
        if (a == 0.0 && b <= 0.0) throw EvalError("zero base with nonpositive exponent");
        if (a < 0.0 && b != std::floor(b))
          throw EvalError("negative base with non-integer exponent");
        return std::pow(a, b);
      }
      case Op::Exp:
        return std::exp(child(0).eval(x, params));
      case Op::Ln: {
        double a = child(0).eval(x, params);
        if (a <= 0.0) throw EvalError("ln of non-positive argument");
        return std::log(a);
      }
      case Op::Sin:
        return std::sin(child(0).eval(x, params));
      case Op::Cos:
        return std::cos(child(0).eval(x, params));
      case Op::Abs: {
        double a = child(0).eval(x, params);
        return std::fabs(a);
      }
    }
    throw EvalError("corrupt expression node");
  }

  Expr diff(int axis) const;
  Expr simplified() const;
  Expr with_params(const Params& params) const;
  std::string str() const;
};

inline Expr operator+(Expr a, Expr b) { return Expr::binary(Op::Add, std::move(a), std::move(b)); }
inline Expr operator-(Expr a, Expr b) { return Expr::binary(Op::Sub, std::move(a), std::move(b)); }
inline Expr operator*(Expr a, Expr b) { return Expr::binary(Op::Mul, std::move(a), std::move(b)); }
inline Expr operator/(Expr a, Expr b) { return Expr::binary(Op::Div, std::move(a), std::move(b)); }
inline Expr operator-(Expr a) {
  if (a.is_num()) return Expr::num(-a.num_value());
  return Expr::unary(Op::Neg, std::move(a));
}
inline Expr pow(Expr a, Expr b) { return Expr::binary(Op::Pow, std::move(a), std::move(b)); }
inline Expr pow(Expr a, double b) { return pow(std::move(a), Expr::num(b)); }
inline Expr exp(Expr a) { return Expr::unary(Op::Exp, std::move(a)); }
inline Expr ln(Expr a) { return Expr::unary(Op::Ln, std::move(a)); }
inline Expr sin(Expr a) { return Expr::unary(Op::Sin, std::move(a)); }
inline Expr cos(Expr a) { return Expr::unary(Op::Cos, std::move(a)); }
inline Expr abs(Expr a) { return Expr::unary(Op::Abs, std::move(a)); }

inline Expr Expr::diff(int axis) const {
  switch (op()) {
    case Op::Num:
    case Op::Param:
      return Expr::num(0.0);
    case Op::Var:
      return Expr::num(this->axis() == axis ? 1.0 : 0.0);
    case Op::Neg:
      return -child(0).diff(axis);
    case Op::Add:
      return child(0).diff(axis) + child(1).diff(axis);
    case Op::Sub:
      return child(0).diff(axis) - child(1).diff(axis);
    case Op::Mul:
      return child(0).diff(axis) * child(1) + child(0) * child(1).diff(axis);
    case Op::Div:
      return (child(0).diff(axis) * child(1) - child(0) * child(1).diff(axis)) /
             (child(1) * child(1));
    case Op::Pow: {
      const Expr& u = child(0);
      const Expr& v = child(1);
      if (!v.depends_on(axis)) {
        // d/dx u^c = c * u^(c-1) * u'
        return v * pow(u, v - Expr::num(1.0)) * u.diff(axis);
      }
      // general u^v = exp(v ln u)
      return pow(u, v) * (v.diff(axis) * ln(u) + v * u.diff(axis) / u);
    }
    case Op::Exp:
      return Expr(*this) * child(0).diff(axis);
    case Op::Ln:
      return child(0).diff(axis) / child(0);
    case Op::Sin:
      return cos(child(0)) * child(0).diff(axis);
    case Op::Cos:
      return -(sin(child(0)) * child(0).diff(axis));
    case Op::Abs:
      // sign(u) * u'; evaluation exactly at u=0 raises a division error
      return child(0) / abs(child(0)) * child(0).diff(axis);
  }
  throw std::logic_error("corrupt expression node");
}

inline Expr Expr::with_params(const Params& params) const {
  if (op() == Op::Param) {
    auto it = params.find(name());
    if (it != params.end()) return Expr::num(it->second);
    return *this;
  }
  if (arity() == 0) return *this;
  if (arity() == 1) {
    Expr c = child(0).with_params(params);
    if (op() == Op::Neg && c.is_num()) return Expr::num(-c.num_value());
    return Expr::unary(op(), std::move(c));
  }
  return Expr::binary(op(), child(0).with_params(params), child(1).with_params(params));
}

namespace detail {

inline std::string format_double(double v) {
  char buf[32];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, p);
}

// precedence: Add/Sub 1, Mul/Div 2, unary minus 3, Pow 4, atoms 5
inline int precedence(Op op) {
  switch (op) {
    case Op::Add:
    case Op::Sub:
      return 1;
    case Op::Mul:
    case Op::Div:
      return 2;
    case Op::Neg:
      return 3;
    case Op::Pow:
      return 4;
    default:
      return 5;
  }
}

inline void print_expr(const Expr& e, std::string& out, int parent_prec, bool right_side);

inline void print_child(const Expr& e, std::string& out, int prec, bool right) {
  int p = precedence(e.op());
  if (e.is_num() && e.num_value() < 0) p = 3;  // prints with a leading '-'
  bool parens = p < prec || (p == prec && right);
  if (parens) out += '(';
  print_expr(e, out, 0, false);
  if (parens) out += ')';
}

inline void print_expr(const Expr& e, std::string& out, int, bool) {
  switch (e.op()) {
    case Op::Num:
      out += format_double(e.num_value());
      return;
    case Op::Var:
      out += 'x';
      out += static_cast<char>('0' + e.axis());
      return;
    case Op::Param:
      out += e.name();
      return;
    case Op::Neg:
      // grammar: base := '-' base, so the operand must print as a base
      out += '-';
      print_child(e.child(0), out, 5, false);
      return;
    case Op::Add:
    case Op::Sub:
      print_child(e.child(0), out, 1, false);
      out += (e.op() == Op::Add) ? " + " : " - ";
      print_child(e.child(1), out, 1, true);
      return;
    case Op::Mul:
    case Op::Div:
      print_child(e.child(0), out, 2, false);
      out += (e.op() == Op::Mul) ? '*' : '/';
      print_child(e.child(1), out, 2, true);
      return;
    case Op::Pow:
      // grammar: factor := base ('^' factor)?, so the base must be atomic
      print_child(e.child(0), out, 5, false);
      out += '^';
      print_child(e.child(1), out, 4, true);
      return;
    case Op::Exp:
      out += "exp(";
      break;
    case Op::Ln:
      out += "ln(";
      break;
    case Op::Sin:
      out += "sin(";
      break;
    case Op::Cos:
      out += "cos(";
      break;
    case Op::Abs:
      out += "abs(";
      break;
  }
  print_expr(e.child(0), out, 0, false);
  out += ')';
}

}  // namespace detail

inline std::string Expr::str() const {
  std::string out;
  detail::print_expr(*this, out, 0, false);
  return out;
}

}  // namespace p3

#include "p3/simplify.hpp"  // defines Expr::simplified
