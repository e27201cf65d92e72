#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <string>

#include "p3/families.hpp"
#include "p3/quadrature.hpp"
#include "p3/structure.hpp"

namespace p3 {

struct ReductionError : std::runtime_error {
  explicit ReductionError(const std::string& what) : std::runtime_error(what) {}
};

struct NotSeparableError : ReductionError {
  explicit NotSeparableError(const std::string& what) : ReductionError(what) {}
};

/// Casimir invariant C with J grad C = 0, defined up to an additive
/// constant (antiderivatives are anchored at the domain-box center).
struct CasimirFn {
  std::function<double(const Point&)> value;
  std::function<Point(const Point&)> grad;
  std::string provenance;
};

struct ChartReport {
  double max_deviation = 0.0;
  double max_roundtrip_error = 0.0;
  int sample_count = 0;
  bool pass = false;
};

/// Global Darboux chart: forward/inverse coordinate maps plus the
/// reparametrization factor mu_hat such that J' = mu_hat * target in the
/// new coordinates.
struct DarbouxChart {
  CoordinateMap forward;
  std::function<Point(const Point&)> inverse;
  std::function<double(const Point&)> mu_hat;  // argument is a point in new coords
  Mat3 target{};
  int casimir_slot = 0;  // 0-based index of the distinguished coordinate
  std::string kind;
  std::string mu_description;  // closed-form string or "numeric"
};

inline Mat3 darboux_target_pq() {
  // canonical pair in slots (1,2), Casimir in slot 3
  return {{{0, 1, 0}, {-1, 0, 0}, {0, 0, 0}}};
}

inline Mat3 darboux_target_gamma() {
  // Casimir in slot 1, canonical pair in slots (2,3)
  return {{{0, 0, 0}, {0, 0, 1}, {0, -1, 0}}};
}

namespace detail {

inline Antiderivative axis_antiderivative(const Expr& integrand, int axis,
                                          const Domain& d, const Params& params) {
  auto i = static_cast<std::size_t>(axis - 1);
  double anchor = 0.5 * (d.lo[i] + d.hi[i]);
  return Antiderivative(integrand, axis, d.lo[i], d.hi[i], anchor, params);
}

inline std::array<Expr, 3> delta_integrands(const DeltaSpec& s) {
  std::array<Expr, 3> g;
  for (std::size_t i = 0; i < 3; ++i)
    g[i] = (s.phi[i] / s.psi[i]).with_params(s.params).simplified();
  return g;
}

// gradient integrands of the gamma-pair Casimir on the two shape axes.
// For the v=0 slot the Jacobi identity forces the reciprocal orientation:
// with zeta = num(x1)/den(x3), grad C = (1/num, 0, 1/den).
struct GammaPairParts {
  Antiderivative first;   // along the first shape axis
  Antiderivative second;  // along the second shape axis
  std::function<double(double)> g_first;
  std::function<double(double)> g_second;
};

inline GammaPairParts gamma_pair_parts(const GammaPairSpec& s) {
  auto [axis_a, axis_b] = s.shape_axes();
  const bool reciprocal = (s.zero == ZeroSlot::V);

  if (s.shape_num && s.shape_den) {
    Expr num = *s.shape_num, den = *s.shape_den;
    Expr ga = reciprocal ? (Expr::num(1.0) / num).simplified() : num;
    Expr gb = reciprocal ? (Expr::num(1.0) / den).simplified() : den;
    Antiderivative Fa = axis_antiderivative(ga, axis_a, s.domain, s.params);
    Antiderivative Fb = axis_antiderivative(gb, axis_b, s.domain, s.params);
    auto fa = [Fa](double t) { return Fa.deriv(t); };
    auto fb = [Fb](double t) { return Fb.deriv(t); };
    return {Fa, Fb, fa, fb};
  }

  if (!is_separable(s.shape, s.domain, axis_a, axis_b, s.params))
    throw NotSeparableError("shape function is not separable on the domain");
  Separation sep = separate(s.shape, s.domain, axis_a, axis_b, s.params);
  auto ga = [sep, reciprocal](double t) {
    double v = sep.num(t);
    return reciprocal ? 1.0 / v : v;
  };
  auto gb = [sep, reciprocal](double t) {
    double v = sep.den(t);
    return reciprocal ? 1.0 / v : v;
  };
  auto ia = static_cast<std::size_t>(axis_a - 1);
  auto ib = static_cast<std::size_t>(axis_b - 1);
  Antiderivative Fa(ga, s.domain.lo[ia], s.domain.hi[ia],
                    0.5 * (s.domain.lo[ia] + s.domain.hi[ia]));
  Antiderivative Fb(gb, s.domain.lo[ib], s.domain.hi[ib],
                    0.5 * (s.domain.lo[ib] + s.domain.hi[ib]));
  return {Fa, Fb, ga, gb};
}

}  // namespace detail

/// C = sum_i int phi_i/psi_i dx_i  (Pfaffian integration of the
/// factorized family; eta drops out).
inline CasimirFn casimir_delta(const DeltaSpec& s) {
  auto g = detail::delta_integrands(s);
  std::array<Antiderivative, 3> F = {
      detail::axis_antiderivative(g[0], 1, s.domain, s.params),
      detail::axis_antiderivative(g[1], 2, s.domain, s.params),
      detail::axis_antiderivative(g[2], 3, s.domain, s.params)};
  CasimirFn c;
  c.provenance = "delta: C = sum_i int phi_i/psi_i dx_i";
  c.value = [F](const Point& x) { return F[0](x[0]) + F[1](x[1]) + F[2](x[2]); };
  c.grad = [F](const Point& x) {
    return Point{F[0].deriv(x[0]), F[1].deriv(x[1]), F[2].deriv(x[2])};
  };
  return c;
}

/// Casimir of a separable gamma-pair structure: the sum of the two
/// one-dimensional antiderivatives on the shape axes.
inline CasimirFn casimir_gamma_pair(const GammaPairSpec& s) {
  auto parts = detail::gamma_pair_parts(s);
  auto [axis_a, axis_b] = s.shape_axes();
  auto ia = static_cast<std::size_t>(axis_a - 1);
  auto ib = static_cast<std::size_t>(axis_b - 1);
  CasimirFn c;
  c.provenance = std::string("gamma_pair(") + to_string(s.zero) +
                 "=0): C = int g_a dx_a + int g_b dx_b";
  Antiderivative Fa = parts.first, Fb = parts.second;
  auto ga = parts.g_first, gb = parts.g_second;
  c.value = [Fa, Fb, ia, ib](const Point& x) { return Fa(x[ia]) + Fb(x[ib]); };
  c.grad = [ga, gb, ia, ib](const Point& x) {
    Point g{0.0, 0.0, 0.0};
    g[ia] = ga(x[ia]);
    g[ib] = gb(x[ib]);
    return g;
  };
  return c;
}

/// Trivial Casimir of a one-entry structure: the coordinate not touched
/// by the only nonzero bracket.
inline CasimirFn casimir_gamma_singleton(const GammaSingletonSpec& s) {
  std::size_t slot;
  switch (s.nonzero) {
    case ZeroSlot::U: slot = 2; break;  // {x1,x2} bracket, x3 Casimir
    case ZeroSlot::V: slot = 1; break;  // {x3,x1} bracket, x2 Casimir
    default: slot = 0; break;           // {x2,x3} bracket, x1 Casimir
  }
  CasimirFn c;
  c.provenance = "gamma_singleton: coordinate Casimir";
  c.value = [slot](const Point& x) { return x[slot]; };
  c.grad = [slot](const Point&) {
    Point g{0.0, 0.0, 0.0};
    g[slot] = 1.0;
    return g;
  };
  return c;
}

/// Step-1 map of the factorized-family reduction, y_i = int phi_i/psi_i,
/// together with the factor eta_tilde; the transformed matrix equals
/// eta_tilde * [[0,1,-1],[-1,0,1],[1,-1,0]].
struct DeltaStep1 {
  CoordinateMap map;
  std::function<double(const Point&)> eta_tilde;  // evaluated at original x
  Mat3 pattern{{{0, 1, -1}, {-1, 0, 1}, {1, -1, 0}}};
};

inline DeltaStep1 darboux_delta_step1(const DeltaSpec& s) {
  auto g = detail::delta_integrands(s);
  std::array<Antiderivative, 3> F = {
      detail::axis_antiderivative(g[0], 1, s.domain, s.params),
      detail::axis_antiderivative(g[1], 2, s.domain, s.params),
      detail::axis_antiderivative(g[2], 3, s.domain, s.params)};
  CoordinateMap map;
  map.forward = [F](const Point& x) {
    return Point{F[0](x[0]), F[1](x[1]), F[2](x[2])};
  };
  map.jacobian = [F](const Point& x) {
    return Mat3{{{F[0].deriv(x[0]), 0, 0},
                 {0, F[1].deriv(x[1]), 0},
                 {0, 0, F[2].deriv(x[2])}}};
  };
  Expr factor = (s.eta * s.phi[0] * s.phi[1] * s.phi[2]).simplified();
  Params params = s.params;
  auto eta_tilde = [factor, params](const Point& x) { return factor.eval(x, params); };
  return {map, eta_tilde, {{{0, 1, -1}, {-1, 0, 1}, {1, -1, 0}}}};
}

/// Global Darboux chart for the factorized family:
/// z1 = F1(x1), z2 = F2(x2), z3 = F1+F2+F3, mu_hat = eta phi1 phi2 phi3.
inline DarbouxChart darboux_delta(const DeltaSpec& s) {
  auto g = detail::delta_integrands(s);
  std::array<Antiderivative, 3> F = {
      detail::axis_antiderivative(g[0], 1, s.domain, s.params),
      detail::axis_antiderivative(g[1], 2, s.domain, s.params),
      detail::axis_antiderivative(g[2], 3, s.domain, s.params)};

  DarbouxChart chart;
  chart.kind = "per-axis-antiderivative";
  chart.forward.forward = [F](const Point& x) {
    double z1 = F[0](x[0]), z2 = F[1](x[1]);
    return Point{z1, z2, z1 + z2 + F[2](x[2])};
  };
  chart.forward.jacobian = [F](const Point& x) {
    double g1 = F[0].deriv(x[0]), g2 = F[1].deriv(x[1]), g3 = F[2].deriv(x[2]);
    return Mat3{{{g1, 0, 0}, {0, g2, 0}, {g1, g2, g3}}};
  };
  chart.inverse = [F](const Point& z) {
    double x1 = F[0].invert(z[0]);
    double x2 = F[1].invert(z[1]);
    double x3 = F[2].invert(z[2] - z[0] - z[1]);
    return Point{x1, x2, x3};
  };

  Expr factor = (s.eta * s.phi[0] * s.phi[1] * s.phi[2]).simplified();
  Params params = s.params;
  auto inv = chart.inverse;
  chart.mu_hat = [factor, params, inv](const Point& z) {
    return factor.eval(inv(z), params);
  };
  chart.target = darboux_target_pq();
  chart.casimir_slot = 2;
  chart.mu_description = "eta*phi1*phi2*phi3 at x(z): " + factor.str();
  return chart;
}

/// Global Darboux chart for a separable gamma-pair structure. The first
/// new coordinate is the Casimir; the remaining two are kept coordinates.
/// With alternative=true (u=0 slot only) the Casimir is placed second,
/// following the chart {y1=x1, y2=C, y3=x3}.
inline DarbouxChart darboux_gamma_pair(const GammaPairSpec& s, bool alternative = false) {
  auto parts = detail::gamma_pair_parts(s);
  auto [axis_a, axis_b] = s.shape_axes();
  auto ia = static_cast<std::size_t>(axis_a - 1);
  auto ib = static_cast<std::size_t>(axis_b - 1);
  Antiderivative Fa = parts.first, Fb = parts.second;
  auto ga = parts.g_first, gb = parts.g_second;

  Expr mu_expr;  // in original coordinates
  switch (s.zero) {
    case ZeroSlot::U:
      mu_expr = (s.eta * s.shape).simplified();  // = w
      break;
    default:
      mu_expr = s.eta.simplified();
      break;
  }
  Params params = s.params;

  DarbouxChart chart;
  chart.kind = "casimir-plus-kept-axes";

  if (alternative) {
    if (s.zero != ZeroSlot::U)
      throw ReductionError("alternative chart is defined for the u=0 slot");
    // y = (x1, C(x1,x2), x3); J' = -eta * [[0,0,1],[0,0,0],[-1,0,0]]
    chart.forward.forward = [Fa, Fb](const Point& x) {
      return Point{x[0], Fa(x[0]) + Fb(x[1]), x[2]};
    };
    chart.forward.jacobian = [ga, gb](const Point& x) {
      return Mat3{{{1, 0, 0}, {ga(x[0]), gb(x[1]), 0}, {0, 0, 1}}};
    };
    chart.inverse = [Fa, Fb](const Point& y) {
      double x1 = y[0];
      double x2 = Fb.invert(y[1] - Fa(x1));
      return Point{x1, x2, y[2]};
    };
    Expr neg_eta = (-s.eta).simplified();
    auto inv = chart.inverse;
    chart.mu_hat = [neg_eta, params, inv](const Point& y) {
      return neg_eta.eval(inv(y), params);
    };
    chart.target = {{{0, 0, 1}, {0, 0, 0}, {-1, 0, 0}}};
    chart.casimir_slot = 1;
    chart.mu_description = "-eta at x(y): " + neg_eta.str();
    return chart;
  }

  // kept axes per slot: u=0 -> (x2,x3); v=0 -> (x2,x3); w=0 -> (x1,x2)
  std::size_t keep1, keep2;
  switch (s.zero) {
    case ZeroSlot::U:
    case ZeroSlot::V:
      keep1 = 1;
      keep2 = 2;
      break;
    default:
      keep1 = 0;
      keep2 = 1;
      break;
  }
  // the axis recovered by inverting an antiderivative
  const bool invert_first = (keep1 != ia && keep2 != ia);

  chart.forward.forward = [Fa, Fb, ia, ib, keep1, keep2](const Point& x) {
    return Point{Fa(x[ia]) + Fb(x[ib]), x[keep1], x[keep2]};
  };
  chart.forward.jacobian = [ga, gb, ia, ib, keep1, keep2](const Point& x) {
    Mat3 m{};
    m[0][ia] = ga(x[ia]);
    m[0][ib] = gb(x[ib]);
    m[1][keep1] = 1.0;
    m[2][keep2] = 1.0;
    return m;
  };
  chart.inverse = [Fa, Fb, ia, ib, keep1, keep2, invert_first](const Point& y) {
    Point x{0.0, 0.0, 0.0};
    x[keep1] = y[1];
    x[keep2] = y[2];
    if (invert_first)
      x[ia] = Fa.invert(y[0] - Fb(x[ib]));
    else
      x[ib] = Fb.invert(y[0] - Fa(x[ia]));
    return x;
  };
  auto inv = chart.inverse;
  chart.mu_hat = [mu_expr, params, inv](const Point& y) {
    return mu_expr.eval(inv(y), params);
  };
  chart.target = darboux_target_gamma();
  chart.casimir_slot = 0;
  chart.mu_description = "at x(y): " + mu_expr.str();
  return chart;
}

/// Charts for one-entry structures: a coordinate permutation moving the
/// nonzero bracket into the (2,3) slot, with mu_hat = eta.
inline DarbouxChart darboux_gamma_singleton(const GammaSingletonSpec& s) {
  DarbouxChart chart;
  Params params = s.params;
  Expr eta = s.eta.simplified();

  std::array<std::size_t, 3> fwd_idx;  // y_i = x[fwd_idx[i]]
  switch (s.nonzero) {
    case ZeroSlot::W:
      fwd_idx = {0, 1, 2};
      chart.kind = "identity";
      break;
    case ZeroSlot::U:
      fwd_idx = {2, 0, 1};  // y = (x3, x1, x2)
      chart.kind = "permutation";
      break;
    default:
      fwd_idx = {1, 2, 0};  // y = (x2, x3, x1)
      chart.kind = "permutation";
      break;
  }
  std::array<std::size_t, 3> inv_idx{};
  for (std::size_t i = 0; i < 3; ++i) inv_idx[fwd_idx[i]] = i;

  chart.forward.forward = [fwd_idx](const Point& x) {
    return Point{x[fwd_idx[0]], x[fwd_idx[1]], x[fwd_idx[2]]};
  };
  chart.forward.jacobian = [fwd_idx](const Point&) {
    Mat3 m{};
    for (std::size_t i = 0; i < 3; ++i) m[i][fwd_idx[i]] = 1.0;
    return m;
  };
  chart.inverse = [inv_idx](const Point& y) {
    return Point{y[inv_idx[0]], y[inv_idx[1]], y[inv_idx[2]]};
  };
  auto inv = chart.inverse;
  chart.mu_hat = [eta, params, inv](const Point& y) { return eta.eval(inv(y), params); };
  chart.target = darboux_target_gamma();
  chart.casimir_slot = 0;
  chart.mu_description = "eta at x(y): " + eta.str();
  return chart;
}

/// Tensor-rule verification: max deviation of J'(y)/mu_hat(y) from the
/// constant target over sampled interior points, plus the inverse
/// round-trip error.
inline ChartReport verify_chart(const StructureMatrix& J, const DarbouxChart& chart,
                                int n_samples = 100, double tol = 1e-8,
                                std::uint64_t seed = 42) {
  TransformedStructure T = transform(J, chart.forward);
  Sampler sampler(J.domain, seed);
  ChartReport rep;
  rep.sample_count = n_samples;
  for (int k = 0; k < n_samples; ++k) {
    Point x = sampler.next();
    Mat3 Jp = T.matrix_at_x(x);
    Point y = chart.forward.forward(x);
    double mu = chart.mu_hat(y);
    if (mu == 0.0) throw ReductionError("mu_hat vanishes at a sample point");
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j) {
        double dev = std::fabs(Jp[i][j] / mu - chart.target[i][j]);
        rep.max_deviation = std::max(rep.max_deviation, dev);
      }
    Point xr = chart.inverse(y);
    for (std::size_t i = 0; i < 3; ++i)
      rep.max_roundtrip_error = std::max(rep.max_roundtrip_error, std::fabs(xr[i] - x[i]));
  }
  rep.pass = rep.max_deviation <= tol;
  return rep;
}

}  // namespace p3
