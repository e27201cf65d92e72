#pragma once

#include <cmath>
#include <cstdint>

#include "p3/domain.hpp"
#include "p3/expr.hpp"

namespace p3 {

enum class ZeroVerdict { Zero, NonZero, Undetermined };

inline const char* to_string(ZeroVerdict v) {
  switch (v) {
    case ZeroVerdict::Zero: return "Zero";
    case ZeroVerdict::NonZero: return "NonZero";
    default: return "Undetermined";
  }
}

/// Decides whether e vanishes identically on d: symbolic simplification
/// first, then 256 quasi-random interior samples against a relative
/// threshold of 1e-12.
inline ZeroVerdict is_identically_zero(const Expr& e, const Domain& d,
                                       const Params& params = {},
                                       std::uint64_t seed = 42) {
  if (e.simplified().is_num(0.0)) return ZeroVerdict::Zero;

  const int n = 256;
  Sampler sampler(d, seed);
  int failures = 0;
  bool exceeded = false;
  for (int k = 0; k < n; ++k) {
    Point p = sampler.next();
    double scale = std::max({std::fabs(p[0]), std::fabs(p[1]), std::fabs(p[2])});
    try {
      double v = e.eval(p, params);
      if (std::fabs(v) > 1e-12 * (1.0 + scale)) exceeded = true;
    } catch (const EvalError&) {
      ++failures;
    }
  }
  if (failures > n / 2) return ZeroVerdict::Undetermined;
  return exceeded ? ZeroVerdict::NonZero : ZeroVerdict::Zero;
}

/// True when e keeps a single nonzero sign over the sampled interior:
/// no symbolic zero and no sign change across 256 samples.
inline bool is_nonvanishing(const Expr& e, const Domain& d, const Params& params = {},
                            std::uint64_t seed = 42) {
  if (is_identically_zero(e, d, params, seed) != ZeroVerdict::NonZero) return false;
  Sampler sampler(d, seed);
  int sign = 0;
  for (int k = 0; k < 256; ++k) {
    Point p = sampler.next();
    double scale = std::max({std::fabs(p[0]), std::fabs(p[1]), std::fabs(p[2])});
    try {
      double v = e.eval(p, params);
      if (std::fabs(v) <= 1e-12 * (1.0 + scale)) return false;
      int s = v > 0.0 ? 1 : -1;
      if (sign == 0) sign = s;
      if (s != sign) return false;  // intermediate value: a zero exists
    } catch (const EvalError&) {
      // skipped, consistent with is_identically_zero
    }
  }
  return sign != 0;
}

/// Strictly positive over the sampled interior.
inline bool is_positive(const Expr& e, const Domain& d, const Params& params = {},
                        std::uint64_t seed = 42) {
  if (!is_nonvanishing(e, d, params, seed)) return false;
  Sampler sampler(d, seed);
  for (int k = 0; k < 256; ++k) {
    Point p = sampler.next();
    try {
      if (e.eval(p, params) < 0.0) return false;
    } catch (const EvalError&) {
    }
  }
  return true;
}

}  // namespace p3
