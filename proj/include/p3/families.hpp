#pragma once

#include <array>
#include <functional>
#include <optional>
#include <string>

#include "p3/structure.hpp"

namespace p3 {

struct FamilyError : std::runtime_error {
  explicit FamilyError(const std::string& what) : std::runtime_error(what) {}
};

enum class ZeroSlot { U, V, W };

inline const char* to_string(ZeroSlot s) {
  switch (s) {
    case ZeroSlot::U: return "u";
    case ZeroSlot::V: return "v";
    default: return "w";
  }
}

/// Fully factorized family: u = eta psi1 psi2 phi3, v = eta psi1 phi2 psi3,
/// w = eta phi1 psi2 psi3, with psi_i, phi_i univariate in x_i and all
/// seven factors nonvanishing.
struct DeltaSpec {
  Expr eta;
  std::array<Expr, 3> psi;
  std::array<Expr, 3> phi;
  Params params;
  Domain domain;
};

/// One entry identically zero; the other two are eta and eta*shape, where
/// the shape function is independent of the axis excluded for its case.
struct GammaPairSpec {
  ZeroSlot zero;
  Expr eta;
  Expr shape;  // xi(x1,x2) for u=0, zeta(x1,x3) for v=0, chi(x2,x3) for w=0
  std::optional<Expr> shape_num;  // separable parts, when known:
  std::optional<Expr> shape_den;  // shape = num(first axis)/den(second axis)
  Params params;
  Domain domain;

  /// the two axes the shape may depend on, in spec order
  std::pair<int, int> shape_axes() const {
    switch (zero) {
      case ZeroSlot::U: return {1, 2};
      case ZeroSlot::V: return {1, 3};
      default: return {2, 3};
    }
  }
  int excluded_axis() const {
    switch (zero) {
      case ZeroSlot::U: return 3;
      case ZeroSlot::V: return 2;
      default: return 1;
    }
  }
};

/// Two entries identically zero; the remaining one is an arbitrary
/// nonvanishing eta.
struct GammaSingletonSpec {
  ZeroSlot nonzero;
  Expr eta;
  Params params;
  Domain domain;
};

enum class FamilyTag {
  DeltaCandidate,
  DeltaVerified,
  GammaPair,
  GammaSingleton,
  ZeroMatrix,
  Unclassified,
};

inline const char* to_string(FamilyTag t) {
  switch (t) {
    case FamilyTag::DeltaCandidate: return "Delta-candidate";
    case FamilyTag::DeltaVerified: return "Delta(verified)";
    case FamilyTag::GammaPair: return "GammaPair";
    case FamilyTag::GammaSingleton: return "GammaSingleton";
    case FamilyTag::ZeroMatrix: return "ZeroMatrix";
    default: return "Unclassified";
  }
}

struct Classification {
  FamilyTag tag = FamilyTag::Unclassified;
  std::optional<ZeroSlot> slot;  // zero slot (GammaPair) or nonzero slot (GammaSingleton)
  std::array<ZeroVerdict, 3> zero_pattern{};  // verdicts for u, v, w
  std::string notes;
};

namespace detail {

inline void require_univariate(const Expr& e, int axis, const Domain& d,
                               const Params& params, const char* what) {
  for (int other = 1; other <= 3; ++other) {
    if (other == axis) continue;
    if (is_identically_zero(e.diff(other).simplified(), d, params) == ZeroVerdict::NonZero)
      throw FamilyError(std::string(what) + " must depend only on x" +
                        std::to_string(axis));
  }
}

inline void require_nonvanishing(const Expr& e, const Domain& d, const Params& params,
                                 const char* what) {
  if (!is_nonvanishing(e, d, params))
    throw FamilyError(std::string(what) + " must be nonvanishing on the domain");
}

}  // namespace detail

inline StructureMatrix build_delta(const DeltaSpec& s) {
  detail::require_nonvanishing(s.eta, s.domain, s.params, "eta");
  for (int i = 0; i < 3; ++i) {
    auto idx = static_cast<std::size_t>(i);
    detail::require_univariate(s.psi[idx], i + 1, s.domain, s.params, "psi");
    detail::require_univariate(s.phi[idx], i + 1, s.domain, s.params, "phi");
    detail::require_nonvanishing(s.psi[idx], s.domain, s.params, "psi");
    detail::require_nonvanishing(s.phi[idx], s.domain, s.params, "phi");
  }
  Expr u = (s.eta * s.psi[0] * s.psi[1] * s.phi[2]).simplified();
  Expr v = (s.eta * s.psi[0] * s.phi[1] * s.psi[2]).simplified();
  Expr w = (s.eta * s.phi[0] * s.psi[1] * s.psi[2]).simplified();
  return {u, v, w, s.params, s.domain};
}

inline StructureMatrix build_gamma_pair(const GammaPairSpec& s) {
  detail::require_nonvanishing(s.eta, s.domain, s.params, "eta");
  detail::require_nonvanishing(s.shape, s.domain, s.params, "shape");
  if (s.shape.depends_on(s.excluded_axis()))
    throw FamilyError("shape function depends on the excluded axis x" +
                      std::to_string(s.excluded_axis()));
  Expr prod = (s.eta * s.shape).simplified();
  Expr zero = Expr::num(0.0);
  switch (s.zero) {
    case ZeroSlot::U:  // {0, eta, eta*xi}
      return {zero, s.eta.simplified(), prod, s.params, s.domain};
    case ZeroSlot::V:  // {eta*zeta, 0, eta}
      return {prod, zero, s.eta.simplified(), s.params, s.domain};
    default:  // {eta, eta*chi, 0}
      return {s.eta.simplified(), prod, zero, s.params, s.domain};
  }
}

inline StructureMatrix build_gamma_singleton(const GammaSingletonSpec& s) {
  detail::require_nonvanishing(s.eta, s.domain, s.params, "eta");
  Expr zero = Expr::num(0.0);
  Expr eta = s.eta.simplified();
  switch (s.nonzero) {
    case ZeroSlot::U: return {eta, zero, zero, s.params, s.domain};
    case ZeroSlot::V: return {zero, eta, zero, s.params, s.domain};
    default: return {zero, zero, eta, s.params, s.domain};
  }
}

/// Ratio-based membership test in the factorized family: v/u independent
/// of x1, u/w independent of x2, w/v independent of x3.
inline bool delta_ratio_conditions_hold(const StructureMatrix& J, std::uint64_t seed = 42) {
  struct Check {
    Expr ratio;
    int axis;
  };
  Check checks[3] = {
      {(J.v / J.u).simplified(), 1},
      {(J.u / J.w).simplified(), 2},
      {(J.w / J.v).simplified(), 3},
  };
  for (const auto& c : checks) {
    Expr d = c.ratio.diff(c.axis).simplified();
    if (is_identically_zero(d, J.domain, J.params, seed) == ZeroVerdict::NonZero)
      return false;
  }
  return true;
}

inline Classification classify(const StructureMatrix& J, std::uint64_t seed = 42) {
  Classification c;
  c.zero_pattern = {is_identically_zero(J.u, J.domain, J.params, seed),
                    is_identically_zero(J.v, J.domain, J.params, seed),
                    is_identically_zero(J.w, J.domain, J.params, seed)};
  int zeros = 0, undet = 0;
  for (auto v : c.zero_pattern) {
    if (v == ZeroVerdict::Zero) ++zeros;
    if (v == ZeroVerdict::Undetermined) ++undet;
  }
  if (undet > 0) {
    c.tag = FamilyTag::Unclassified;
    c.notes = "zero verdict undetermined for at least one entry";
    return c;
  }
  switch (zeros) {
    case 0:
      if (delta_ratio_conditions_hold(J, seed)) {
        c.tag = FamilyTag::DeltaVerified;
        c.notes = "all three ratio conditions hold on samples";
      } else {
        c.tag = FamilyTag::DeltaCandidate;
        c.notes = "no entry vanishes; factorized membership not established";
      }
      break;
    case 1:
      c.tag = FamilyTag::GammaPair;
      c.slot = c.zero_pattern[0] == ZeroVerdict::Zero   ? ZeroSlot::U
               : c.zero_pattern[1] == ZeroVerdict::Zero ? ZeroSlot::V
                                                        : ZeroSlot::W;
      break;
    case 2:
      c.tag = FamilyTag::GammaSingleton;
      c.slot = c.zero_pattern[0] == ZeroVerdict::NonZero   ? ZeroSlot::U
               : c.zero_pattern[1] == ZeroVerdict::NonZero ? ZeroSlot::V
                                                           : ZeroSlot::W;
      break;
    default:
      c.tag = FamilyTag::ZeroMatrix;
      break;
  }
  return c;
}

/// Cross-ratio separability test over the two given axes:
/// f(a,c) f(b,d) = f(a,d) f(b,c) for separable f = f1(xa)/f2(xb).
inline bool is_separable(const Expr& f, const Domain& d, int axis_a, int axis_b,
                         const Params& params = {}, double tol = 1e-9,
                         std::uint64_t seed = 42) {
  Sampler sampler(d, seed);
  int checked = 0;
  for (int k = 0; k < 64 && checked < 64; ++k) {
    Point p = sampler.next();
    Point q = sampler.next();
    auto at = [&](double a, double b) {
      Point r = p;
      r[static_cast<std::size_t>(axis_a - 1)] = a;
      r[static_cast<std::size_t>(axis_b - 1)] = b;
      return f.eval(r, params);
    };
    double a = p[static_cast<std::size_t>(axis_a - 1)];
    double b = q[static_cast<std::size_t>(axis_a - 1)];
    double c = p[static_cast<std::size_t>(axis_b - 1)];
    double dd = q[static_cast<std::size_t>(axis_b - 1)];
    try {
      double lhs = at(a, c) * at(b, dd);
      double rhs = at(a, dd) * at(b, c);
      double scale = std::max({std::fabs(lhs), std::fabs(rhs), 1.0});
      if (std::fabs(lhs - rhs) > tol * scale) return false;
      ++checked;
    } catch (const EvalError&) {
    }
  }
  return checked > 0;
}

/// Anchored separable decomposition f = num(xa)/den(xb):
///   num(s) = f(s, c),  den(s) = f(a, c)/f(a, s)
/// with (a, c) the reference point. Unique up to a constant rescaling.
struct Separation {
  std::function<double(double)> num;
  std::function<double(double)> den;
};

inline Separation separate(const Expr& f, const Domain& d, int axis_a, int axis_b,
                           const Params& params = {},
                           std::optional<std::pair<double, double>> ref = {}) {
  Point c = d.center();
  double a0 = ref ? ref->first : c[static_cast<std::size_t>(axis_a - 1)];
  double b0 = ref ? ref->second : c[static_cast<std::size_t>(axis_b - 1)];
  Point base = c;
  base[static_cast<std::size_t>(axis_a - 1)] = a0;
  base[static_cast<std::size_t>(axis_b - 1)] = b0;
  double f_ref = f.eval(base, params);
  if (f_ref == 0.0) throw FamilyError("shape vanishes at the reference point");

  auto num = [f, params, base, axis_a](double s) {
    Point r = base;
    r[static_cast<std::size_t>(axis_a - 1)] = s;
    return f.eval(r, params);
  };
  auto den = [f, params, base, axis_b, f_ref](double s) {
    Point r = base;
    r[static_cast<std::size_t>(axis_b - 1)] = s;
    double v = f.eval(r, params);
    if (v == 0.0) throw FamilyError("shape vanishes on the reference slice");
    return f_ref / v;
  };
  return {num, den};
}

namespace detail {

inline void require_same_family(const StructureMatrix& A, const StructureMatrix& B) {
  if (!(A.domain == B.domain))
    throw FamilyError("superposition requires matching domains");
  Classification ca = classify(A), cb = classify(B);
  if (ca.tag == FamilyTag::DeltaVerified) ca.tag = FamilyTag::DeltaCandidate;
  if (cb.tag == FamilyTag::DeltaVerified) cb.tag = FamilyTag::DeltaCandidate;
  if (ca.tag != cb.tag || ca.slot != cb.slot)
    throw FamilyError("superposition requires operands from the same family");
}

inline Expr entry_product(const Expr& a, const Expr& b) {
  if (a.is_num(0.0) || b.is_num(0.0)) return Expr::num(0.0);
  return (a * b).simplified();
}

}  // namespace detail

/// Componentwise product; zero components stay zero. Closed within each
/// family (abelian group law).
inline StructureMatrix oplus(const StructureMatrix& A, const StructureMatrix& B) {
  detail::require_same_family(A, B);
  Params merged = A.params;
  for (const auto& [k, v] : B.params) merged.emplace(k, v);
  return {detail::entry_product(A.u, B.u), detail::entry_product(A.v, B.v),
          detail::entry_product(A.w, B.w), merged, A.domain};
}

/// Componentwise real power; requires positive entries (vector-space law
/// on the positive cone).
inline StructureMatrix otimes(double a, const StructureMatrix& A) {
  auto raise = [&](const Expr& e) -> Expr {
    if (e.is_num(0.0)) return e;
    if (!is_positive(e, A.domain, A.params))
      throw FamilyError("otimes requires positive structure entries");
    return pow(e, Expr::num(a)).simplified();
  };
  return {raise(A.u), raise(A.v), raise(A.w), A.params, A.domain};
}

}  // namespace p3
