#pragma once

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "p3/expr.hpp"

namespace p3 {
namespace detail {

inline Expr simplify_rec(const Expr& e);

struct Term {
  double coeff;
  Expr core;  // Num(1) when the term is a pure constant
  std::string key;
};

// Splits a (simplified) expression into coefficient * core.
inline Term split_term(const Expr& e) {
  if (e.is_num()) return {e.num_value(), Expr::num(1.0), "1"};
  if (e.op() == Op::Neg) {
    Term t = split_term(e.child(0));
    t.coeff = -t.coeff;
    return t;
  }
  if (e.op() == Op::Mul && e.child(0).is_num())
    return {e.child(0).num_value(), e.child(1), e.child(1).str()};
  return {1.0, e, e.str()};
}

inline void flatten_sum(const Expr& e, double sign,
                        std::vector<std::pair<double, Expr>>& out) {
  if (e.op() == Op::Add) {
    flatten_sum(e.child(0), sign, out);
    flatten_sum(e.child(1), sign, out);
  } else if (e.op() == Op::Sub) {
    flatten_sum(e.child(0), sign, out);
    flatten_sum(e.child(1), -sign, out);
  } else if (e.op() == Op::Neg) {
    flatten_sum(e.child(0), -sign, out);
  } else {
    out.emplace_back(sign, e);
  }
}

// children are already simplified
inline Expr simplify_sum(const Expr& e) {
  std::vector<std::pair<double, Expr>> raw;
  flatten_sum(e, 1.0, raw);
  double constant = 0.0;
  std::vector<Term> terms;
  for (auto& [sign, sub] : raw) {
    Term t = split_term(sub);
    t.coeff *= sign;
    if (t.core.is_num(1.0)) {
      constant += t.coeff;
      continue;
    }
    bool merged = false;
    for (auto& u : terms) {
      if (u.key == t.key) {
        u.coeff += t.coeff;
        merged = true;
        break;
      }
    }
    if (!merged) terms.push_back(std::move(t));
  }

  std::sort(terms.begin(), terms.end(),
            [](const Term& a, const Term& b) { return a.key < b.key; });
  Expr acc;
  bool have = false;
  for (const auto& t : terms) {
    if (t.coeff == 0.0) continue;
    if (!have) {
      acc = (t.coeff == 1.0) ? t.core
          : (t.coeff == -1.0) ? -t.core
                              : Expr::num(t.coeff) * t.core;
      have = true;
    } else if (t.coeff == 1.0) {
      acc = acc + t.core;
    } else if (t.coeff == -1.0) {
      acc = acc - t.core;
    } else if (t.coeff < 0.0) {
      acc = acc - Expr::num(-t.coeff) * t.core;
    } else {
      acc = acc + Expr::num(t.coeff) * t.core;
    }
  }
  if (!have) return Expr::num(constant);
  if (constant > 0.0) acc = acc + Expr::num(constant);
  if (constant < 0.0) acc = acc - Expr::num(-constant);
  return acc;
}

struct Factor {
  Expr e;
  bool inverted;
  std::string key;
};

inline void flatten_product(const Expr& e, bool inverted, double& coeff,
                            bool& zero, std::vector<Factor>& factors) {
  if (e.op() == Op::Mul) {
    flatten_product(e.child(0), inverted, coeff, zero, factors);
    flatten_product(e.child(1), inverted, coeff, zero, factors);
  } else if (e.op() == Op::Div) {
    flatten_product(e.child(0), inverted, coeff, zero, factors);
    flatten_product(e.child(1), !inverted, coeff, zero, factors);
  } else if (e.op() == Op::Neg) {
    coeff = -coeff;
    flatten_product(e.child(0), inverted, coeff, zero, factors);
  } else if (e.is_num()) {
    if (e.num_value() == 0.0 && inverted) {
      factors.push_back({e, true, e.str()});  // keep 1/0 so evaluation raises
    } else if (inverted) {
      coeff /= e.num_value();
    } else {
      coeff *= e.num_value();
      if (coeff == 0.0) zero = true;
    }
  } else {
    factors.push_back({e, inverted, e.str()});
  }
}

inline Expr simplify_product(const Expr& e) {
  double coeff = 1.0;
  bool zero = false;
  std::vector<Factor> factors;
  flatten_product(e, false, coeff, zero, factors);
  if (zero) return Expr::num(0.0);

  // cancel structurally equal numerator/denominator pairs
  for (std::size_t i = 0; i < factors.size(); ++i) {
    for (std::size_t j = i + 1; j < factors.size(); ++j) {
      if (factors[i].inverted != factors[j].inverted &&
          factors[i].key == factors[j].key &&
          factors[i].e.same(factors[j].e)) {
        factors.erase(factors.begin() + static_cast<long>(j));
        factors.erase(factors.begin() + static_cast<long>(i));
        --i;
        break;
      }
    }
  }

  std::stable_sort(factors.begin(), factors.end(),
                   [](const Factor& a, const Factor& b) {
                     if (a.inverted != b.inverted) return !a.inverted;
                     return a.key < b.key;
                   });

  Expr numer = Expr::num(1.0);
  bool have_numer = false;
  Expr denom = Expr::num(1.0);
  bool have_denom = false;
  for (const auto& f : factors) {
    Expr& dst = f.inverted ? denom : numer;
    bool& have = f.inverted ? have_denom : have_numer;
    dst = have ? dst * f.e : f.e;
    have = true;
  }

  if (!have_numer && !have_denom) return Expr::num(coeff);
  if (coeff == 0.0 && !have_denom) return Expr::num(0.0);

  Expr top = numer;
  if (coeff == -1.0 && have_numer) {
    top = -numer;
  } else if (coeff != 1.0) {
    top = have_numer ? Expr::num(coeff) * numer : Expr::num(coeff);
  } else if (!have_numer) {
    top = Expr::num(1.0);
  }
  return have_denom ? top / denom : top;
}

inline Expr simplify_pow(const Expr& base, const Expr& ex) {
  if (ex.is_num(0.0)) return Expr::num(1.0);
  if (ex.is_num(1.0)) return base;
  if (base.is_num(1.0)) return Expr::num(1.0);
  if (base.is_num() && ex.is_num()) {
    double b = base.num_value(), p = ex.num_value();
    if (b > 0.0 || p == std::floor(p)) {
      double v = std::pow(b, p);
      if (std::isfinite(v)) return Expr::num(v);
    }
  }
  return pow(base, ex);
}

inline Expr simplify_rec(const Expr& e) {
  switch (e.op()) {
    case Op::Num:
    case Op::Var:
    case Op::Param:
      return e;
    case Op::Neg: {
      Expr c = simplify_rec(e.child(0));
      if (c.is_num()) return Expr::num(-c.num_value());
      if (c.op() == Op::Neg) return c.child(0);
      return -c;
    }
    case Op::Add:
    case Op::Sub:
      return simplify_sum(Expr::binary(e.op(), simplify_rec(e.child(0)),
                                       simplify_rec(e.child(1))));
    case Op::Mul:
    case Op::Div:
      return simplify_product(Expr::binary(e.op(), simplify_rec(e.child(0)),
                                           simplify_rec(e.child(1))));
    case Op::Pow:
      return simplify_pow(simplify_rec(e.child(0)), simplify_rec(e.child(1)));
    case Op::Exp: {
      Expr c = simplify_rec(e.child(0));
      if (c.is_num(0.0)) return Expr::num(1.0);
      if (c.is_num()) return Expr::num(std::exp(c.num_value()));
      return exp(c);
    }
    case Op::Ln: {
      Expr c = simplify_rec(e.child(0));
      if (c.is_num(1.0)) return Expr::num(0.0);
      if (c.is_num() && c.num_value() > 0.0) return Expr::num(std::log(c.num_value()));
      return ln(c);
    }
    case Op::Sin: {
      Expr c = simplify_rec(e.child(0));
      if (c.is_num()) return Expr::num(std::sin(c.num_value()));
      return sin(c);
    }
    case Op::Cos: {
      Expr c = simplify_rec(e.child(0));
      if (c.is_num()) return Expr::num(std::cos(c.num_value()));
      return cos(c);
    }
    case Op::Abs: {
      Expr c = simplify_rec(e.child(0));
      if (c.is_num()) return Expr::num(std::fabs(c.num_value()));
      if (c.op() == Op::Neg) return abs(c.child(0));
      if (c.op() == Op::Abs) return c;
      return abs(c);
    }
  }
  throw std::logic_error("corrupt expression node");
}

}  // namespace detail

inline Expr Expr::simplified() const { return detail::simplify_rec(*this); }

}  // namespace p3
