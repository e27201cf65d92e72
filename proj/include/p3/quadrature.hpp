#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <vector>

#include "p3/expr.hpp"

namespace p3 {

struct QuadratureError : std::runtime_error {
  explicit QuadratureError(const std::string& what) : std::runtime_error(what) {}
};

namespace detail {

inline double simpson(double a, double fa, double b, double fb, double fm) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

inline double adaptive_simpson_rec(const std::function<double(double)>& f, double a,
                                   double fa, double b, double fb, double m, double fm,
                                   double whole, double tol, int depth) {
  double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  double flm = f(lm), frm = f(rm);
  double left = simpson(a, fa, m, fm, flm);
  double right = simpson(m, fm, b, fb, frm);
  double delta = left + right - whole;
  if (depth <= 0 || std::fabs(delta) <= 15.0 * tol)
    return left + right + delta / 15.0;
  return adaptive_simpson_rec(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
         adaptive_simpson_rec(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
}

inline double adaptive_simpson(const std::function<double(double)>& f, double a,
                               double b, double rel_tol = 1e-10, int max_depth = 20) {
  if (a == b) return 0.0;
  double fa = f(a), fb = f(b), m = 0.5 * (a + b), fm = f(m);
  double whole = simpson(a, fa, b, fb, fm);
  double tol = rel_tol * std::max(1.0, std::fabs(whole));
  return adaptive_simpson_rec(f, a, fa, b, fb, m, fm, whole, tol, max_depth);
}

// ---- symbolic antiderivatives for the table patterns -------------------

inline Expr axis_var(int axis) { return Expr::var(axis); }

// constant slope of a linear-in-axis expression, or nullopt
inline std::optional<Expr> linear_slope(const Expr& u, int axis) {
  Expr d = u.diff(axis).simplified();
  if (d.has_any_var()) return std::nullopt;
  if (d.is_num(0.0)) return std::nullopt;
  return d;
}

inline std::optional<Expr> anti_rec(const Expr& e, int axis, int depth);

// a single axis-dependent unit: Var, Pow, Exp, Sin, Cos
inline std::optional<Expr> anti_unit(const Expr& h, int axis) {
  Expr x = axis_var(axis);
  switch (h.op()) {
    case Op::Var:
      if (h.axis() != axis) return std::nullopt;
      return x * x / Expr::num(2.0);
    case Op::Pow: {
      const Expr& b = h.child(0);
      const Expr& p = h.child(1);
      if (p.depends_on(axis) || !p.is_num()) return std::nullopt;
      auto m = linear_slope(b, axis);
      if (!m) return std::nullopt;
      if (p.num_value() == -1.0) return ln(abs(b)) / *m;
      Expr p1 = Expr::num(p.num_value() + 1.0);
      return pow(b, p1) / (p1 * *m);
    }
    case Op::Exp: {
      auto m = linear_slope(h.child(0), axis);
      if (!m) return std::nullopt;
      return h / *m;
    }
    case Op::Sin: {
      auto m = linear_slope(h.child(0), axis);
      if (!m) return std::nullopt;
      return -(cos(h.child(0)) / *m);
    }
    case Op::Cos: {
      auto m = linear_slope(h.child(0), axis);
      if (!m) return std::nullopt;
      return sin(h.child(0)) / *m;
    }
    default:
      return std::nullopt;
  }
}

struct PFactor {
  Expr e;
  bool inverted;
};

inline void flatten_pfactors(const Expr& e, bool inv, std::vector<PFactor>& out) {
  if (e.op() == Op::Mul) {
    flatten_pfactors(e.child(0), inv, out);
    flatten_pfactors(e.child(1), inv, out);
  } else if (e.op() == Op::Div) {
    flatten_pfactors(e.child(0), inv, out);
    flatten_pfactors(e.child(1), !inv, out);
  } else {
    out.push_back({e, inv});
  }
}

inline std::optional<Expr> anti_product(const Expr& e, int axis, int depth) {
  std::vector<PFactor> fs;
  flatten_pfactors(e, false, fs);

  // distribute a sum factor and integrate term by term
  for (std::size_t i = 0; i < fs.size(); ++i) {
    const Expr& f = fs[i].e;
    if (fs[i].inverted || !(f.op() == Op::Add || f.op() == Op::Sub || f.op() == Op::Neg))
      continue;
    if (!f.depends_on(axis)) continue;
    std::vector<std::pair<double, Expr>> terms;
    flatten_sum(f, 1.0, terms);
    if (terms.size() < 2 && f.op() != Op::Neg) continue;
    std::optional<Expr> total;
    for (auto& [sign, t] : terms) {
      Expr rebuilt = Expr::num(sign) * t;
      for (std::size_t j = 0; j < fs.size(); ++j) {
        if (j == i) continue;
        rebuilt = fs[j].inverted ? rebuilt / fs[j].e : rebuilt * fs[j].e;
      }
      auto part = anti_rec(rebuilt.simplified(), axis, depth + 1);
      if (!part) return std::nullopt;
      total = total ? *total + *part : *part;
    }
    return total;
  }

  Expr coeff = Expr::num(1.0);
  std::optional<Expr> dep;
  for (auto& f : fs) {
    if (!f.e.depends_on(axis)) {
      coeff = f.inverted ? coeff / f.e : coeff * f.e;
      continue;
    }
    Expr unit = f.inverted ? pow(f.e, Expr::num(-1.0)) : f.e;
    if (f.inverted && f.e.op() == Op::Pow && f.e.child(1).is_num())
      unit = pow(f.e.child(0), Expr::num(-f.e.child(1).num_value()));
    if (dep) return std::nullopt;  // more than one dependent factor
    dep = unit;
  }
  if (!dep) return std::nullopt;  // handled by the constant case upstream
  auto F = anti_unit(dep->simplified(), axis);
  if (!F) {
    auto Fr = anti_rec(dep->simplified(), axis, depth + 1);
    if (!Fr) return std::nullopt;
    F = Fr;
  }
  return (coeff * *F).simplified();
}

inline std::optional<Expr> anti_rec(const Expr& e, int axis, int depth) {
  // the rewrite search can cycle through equivalent forms; cap it and let
  // callers fall back to numeric quadrature
  if (depth > 32) return std::nullopt;
  if (!e.depends_on(axis)) return e * axis_var(axis);
  switch (e.op()) {
    case Op::Neg: {
      auto r = anti_rec(e.child(0), axis, depth + 1);
      if (!r) return std::nullopt;
      return -*r;
    }
    case Op::Add:
    case Op::Sub: {
      auto a = anti_rec(e.child(0), axis, depth + 1);
      auto b = anti_rec(e.child(1), axis, depth + 1);
      if (!a || !b) return std::nullopt;
      return Expr::binary(e.op(), *a, *b);
    }
    case Op::Mul:
    case Op::Div:
      return anti_product(e, axis, depth);
    default:
      return anti_unit(e, axis);
  }
}

}  // namespace detail

/// Symbolic antiderivative for table patterns (polynomials, powers,
/// 1/x, exp/sin/cos of linear arguments, and products/sums thereof).
inline std::optional<Expr> symbolic_antiderivative(const Expr& f, int axis) {
  auto F = detail::anti_rec(f.simplified(), axis, 0);
  if (F) return F->simplified();
  return std::nullopt;
}

/// Strictly monotone antiderivative F(x) = int_anchor^x f(s) ds of a
/// univariate integrand with constant nonzero sign on the open interval.
/// Uses a closed form when the integrand matches the table, adaptive
/// Simpson (rel. tol. 1e-10) otherwise.
class Antiderivative {
 public:
  Antiderivative(Expr f, int axis, double lo, double hi, double anchor,
                 Params params = {})
      : Antiderivative(make_scalar_fn(f.with_params(params).simplified(), axis), lo,
                       hi, anchor) {
    Expr bound = f.with_params(params).simplified();
    integrand_expr_ = bound;
    if (auto F = symbolic_antiderivative(bound, axis)) {
      Expr Fs = *F;
      double base = eval_scalar(Fs, axis, anchor);
      closed_ = Fs;
      closed_axis_ = axis;
      closed_base_ = base;
    }
  }

  Antiderivative(std::function<double(double)> f, double lo, double hi, double anchor)
      : f_(std::move(f)), lo_(lo), hi_(hi), anchor_(anchor),
        cache_(std::make_shared<Cache>()) {
    if (!(lo < anchor && anchor < hi))
      throw QuadratureError("anchor must be interior to the interval");
    check_sign();
  }

  double operator()(double x) const {
    if (closed_)
      return eval_scalar(*closed_, closed_axis_, x) - closed_base_;
    {
      std::lock_guard<std::mutex> lock(cache_->m);
      auto it = cache_->values.find(x);
      if (it != cache_->values.end()) return it->second;
    }
    double v = detail::adaptive_simpson(f_, anchor_, x, 1e-10, 20);
    std::lock_guard<std::mutex> lock(cache_->m);
    cache_->values.emplace(x, v);
    return v;
  }

  double deriv(double x) const { return f_(x); }
  int sign() const { return sign_; }
  double lo() const { return lo_; }
  double hi() const { return hi_; }
  double anchor() const { return anchor_; }
  const std::optional<Expr>& closed_form() const { return closed_; }
  const std::optional<Expr>& integrand_expr() const { return integrand_expr_; }

  /// Inverse of the monotone map: x with F(x) = target. Bisection
  /// bracketed by the interval, Newton-refined with f as derivative.
  double invert(double target) const {
    const double pad = 1e-9 * (hi_ - lo_);
    double a = lo_ + pad, b = hi_ - pad;
    double fa = (*this)(a), fb = (*this)(b);
    if (sign_ < 0) {
      std::swap(a, b);
      std::swap(fa, fb);
    }
    if (target < fa - 1e-9 || target > fb + 1e-9)
      throw QuadratureError("inverse target outside the image interval");
    for (int it = 0; it < 60; ++it) {
      double m = 0.5 * (a + b);
      double fm = (*this)(m);
      if (fm < target)
        a = m;
      else
        b = m;
      if (std::fabs(b - a) < 1e-6 * (1.0 + std::fabs(a))) break;
    }
    double x = 0.5 * (a + b);
    for (int it = 0; it < 30; ++it) {
      double g = (*this)(x) - target;
      double d = f_(x);
      if (d == 0.0) break;
      double step = g / d;
      x -= step;
      double left = std::min(a, b), right = std::max(a, b);
      if (x < left) x = left;
      if (x > right) x = right;
      if (std::fabs(step) <= 1e-12 * (1.0 + std::fabs(x))) break;
    }
    return x;
  }

 private:
  struct Cache {
    std::mutex m;
    std::map<double, double> values;
  };

  static std::function<double(double)> make_scalar_fn(Expr f, int axis) {
    return [f, axis](double s) { return eval_scalar(f, axis, s); };
  }

  static double eval_scalar(const Expr& e, int, double s) {
    return e.eval(Point{s, s, s});
  }

  void check_sign() {
    const int n = 256;
    sign_ = 0;
    for (int k = 0; k < n; ++k) {
      double t = (k + 0.5) / n;
      double x = lo_ + t * (hi_ - lo_);
      double v;
      try {
        v = f_(x);
      } catch (const EvalError&) {
        continue;
      }
      if (v == 0.0 || !std::isfinite(v))
        throw QuadratureError("integrand vanishes on the interval; antiderivative not monotone");
      int s = v > 0.0 ? 1 : -1;
      if (sign_ == 0) sign_ = s;
      if (s != sign_)
        throw QuadratureError("integrand changes sign on the interval; antiderivative not monotone");
    }
    if (sign_ == 0) throw QuadratureError("integrand not evaluable on the interval");
  }

  std::function<double(double)> f_;
  double lo_, hi_, anchor_;
  int sign_ = 0;
  std::optional<Expr> closed_;
  std::optional<Expr> integrand_expr_;
  int closed_axis_ = 1;
  double closed_base_ = 0.0;
  std::shared_ptr<Cache> cache_;
};

}  // namespace p3
