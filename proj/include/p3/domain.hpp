#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>

#include "p3/expr.hpp"

namespace p3 {

/// Axis-aligned open box in R^3.
struct Domain {
  std::array<double, 3> lo{0.0, 0.0, 0.0};
  std::array<double, 3> hi{1.0, 1.0, 1.0};

  Domain() = default;
  Domain(double l, double h) : lo{l, l, l}, hi{h, h, h} { validate(); }
  Domain(std::array<double, 3> l, std::array<double, 3> h) : lo(l), hi(h) { validate(); }

  void validate() const {
    for (int i = 0; i < 3; ++i)
      if (!(lo[static_cast<std::size_t>(i)] < hi[static_cast<std::size_t>(i)]))
        throw std::invalid_argument("domain requires lo < hi on every axis");
  }

  bool contains(const Point& p) const {
    for (std::size_t i = 0; i < 3; ++i)
      if (!(p[i] > lo[i] && p[i] < hi[i])) return false;
    return true;
  }

  Point center() const {
    return {0.5 * (lo[0] + hi[0]), 0.5 * (lo[1] + hi[1]), 0.5 * (lo[2] + hi[2])};
  }

  bool operator==(const Domain& o) const { return lo == o.lo && hi == o.hi; }
};

namespace detail {

inline double halton(std::uint64_t index, std::uint32_t base) {
  double f = 1.0, r = 0.0;
  while (index > 0) {
    f /= base;
    r += f * static_cast<double>(index % base);
    index /= base;
  }
  return r;
}

}  // namespace detail

/// Deterministic low-discrepancy interior sampler (Halton, bases 2/3/5).
/// The seed offsets the sequence start, so a fixed seed reproduces the
/// exact same points.
class Sampler {
 public:
  Sampler(Domain d, std::uint64_t seed = 42)
      : d_(d), index_(seed * 7919 + 1) {}

  Point next() {
    // shrink slightly toward the interior so boundary values never appear
    const double margin = 1e-3;
    Point p;
    static constexpr std::uint32_t bases[3] = {2, 3, 5};
    for (std::size_t i = 0; i < 3; ++i) {
      double t = margin + (1.0 - 2.0 * margin) * detail::halton(index_, bases[i]);
      p[i] = d_.lo[i] + t * (d_.hi[i] - d_.lo[i]);
    }
    ++index_;
    return p;
  }

 private:
  Domain d_;
  std::uint64_t index_;
};

}  // namespace p3
