#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <string>

#include "p3/domain.hpp"
#include "p3/expr.hpp"
#include "p3/zero_test.hpp"

namespace p3 {

using Mat3 = std::array<std::array<double, 3>, 3>;

struct StructureError : std::runtime_error {
  explicit StructureError(const std::string& what) : std::runtime_error(what) {}
};

/// Skew-symmetric 3x3 structure matrix encoded by its three independent
/// entries u = J12, v = J31, w = J23. Skew-symmetry is structural: the
/// full matrix is always assembled with the fixed sign pattern.
struct StructureMatrix {
  Expr u, v, w;
  Params params;
  Domain domain;

  Mat3 matrix_at(const Point& p) const {
    double uu = u.eval(p, params);
    double vv = v.eval(p, params);
    double ww = w.eval(p, params);
    return {{{0.0, uu, -vv}, {-uu, 0.0, ww}, {vv, -ww, 0.0}}};
  }

  std::array<Expr, 6> partials() const {
    return {u.diff(1), u.diff(2), v.diff(1), v.diff(3), w.diff(2), w.diff(3)};
  }
};

struct JacobiReport {
  double max_absolute_residual = 0.0;
  double max_relative_residual = 0.0;
  Point argmax_point{0.0, 0.0, 0.0};
  int sample_count = 0;
  bool pass = false;
  bool reliable = true;  // false when >50% of samples failed to evaluate
};

/// Left-hand side of the compact 3D Jacobi identity
///   u d1v - v d1u + w d2u - u d2w + v d3w - w d3v
/// evaluated with exact symbolic derivatives.
inline double jacobi_residual(const StructureMatrix& J, const Point& p) {
  const Params& ps = J.params;
  double u = J.u.eval(p, ps), v = J.v.eval(p, ps), w = J.w.eval(p, ps);
  double d1u = J.u.diff(1).eval(p, ps), d2u = J.u.diff(2).eval(p, ps);
  double d1v = J.v.diff(1).eval(p, ps), d3v = J.v.diff(3).eval(p, ps);
  double d2w = J.w.diff(2).eval(p, ps), d3w = J.w.diff(3).eval(p, ps);
  return u * d1v - v * d1u + w * d2u - u * d2w + v * d3w - w * d3v;
}

inline JacobiReport check_jacobi(const StructureMatrix& J, int n_samples = 1000,
                                 double tol = 1e-9, std::uint64_t seed = 42) {
  if (n_samples < 1) throw std::invalid_argument("n_samples must be >= 1");
  // differentiate once, evaluate many times
  Expr d1u = J.u.diff(1).simplified(), d2u = J.u.diff(2).simplified();
  Expr d1v = J.v.diff(1).simplified(), d3v = J.v.diff(3).simplified();
  Expr d2w = J.w.diff(2).simplified(), d3w = J.w.diff(3).simplified();

  JacobiReport rep;
  rep.sample_count = n_samples;
  Sampler sampler(J.domain, seed);
  int failures = 0;
  for (int k = 0; k < n_samples; ++k) {
    Point p = sampler.next();
    double terms[6];
    double residual;
    try {
      const Params& ps = J.params;
      double u = J.u.eval(p, ps), v = J.v.eval(p, ps), w = J.w.eval(p, ps);
      terms[0] = u * d1v.eval(p, ps);
      terms[1] = -v * d1u.eval(p, ps);
      terms[2] = w * d2u.eval(p, ps);
      terms[3] = -u * d2w.eval(p, ps);
      terms[4] = v * d3w.eval(p, ps);
      terms[5] = -w * d3v.eval(p, ps);
      residual = terms[0] + terms[1] + terms[2] + terms[3] + terms[4] + terms[5];
    } catch (const EvalError&) {
      ++failures;
      continue;
    }
    double scale = 0.0;
    for (double t : terms) scale = std::max(scale, std::fabs(t));
    double abs_r = std::fabs(residual);
    double rel_r = abs_r / (1.0 + scale);
    if (abs_r > rep.max_absolute_residual) rep.max_absolute_residual = abs_r;
    if (rel_r > rep.max_relative_residual) {
      rep.max_relative_residual = rel_r;
      rep.argmax_point = p;
    }
  }
  rep.reliable = failures <= n_samples / 2;
  rep.pass = rep.reliable && rep.max_relative_residual <= tol;
  return rep;
}

/// Theorem: multiplying a 3D solution by any C1 factor gives a solution.
/// The factor must be nonvanishing so the scaled matrix keeps full rank.
inline StructureMatrix scale(const StructureMatrix& J, const Expr& mu) {
  if (!is_nonvanishing(mu, J.domain, J.params))
    throw StructureError("scaling factor vanishes (or changes sign) on the domain");
  return {(mu * J.u).simplified(), (mu * J.v).simplified(), (mu * J.w).simplified(),
          J.params, J.domain};
}

/// rank of a nonzero 3x3 skew matrix is always 2
inline int rank_at(const StructureMatrix& J, const Point& p) {
  double scale_p = std::max({std::fabs(p[0]), std::fabs(p[1]), std::fabs(p[2])});
  double thr = 1e-12 * (1.0 + scale_p);
  double u = J.u.eval(p, J.params);
  double v = J.v.eval(p, J.params);
  double w = J.w.eval(p, J.params);
  if (std::fabs(u) <= thr && std::fabs(v) <= thr && std::fabs(w) <= thr) return 0;
  return 2;
}

/// Differentiable coordinate map y(x) with an exact Jacobian.
struct CoordinateMap {
  std::function<Point(const Point&)> forward;
  std::function<Mat3(const Point&)> jacobian;  // J[i][k] = dy_i/dx_k

  static CoordinateMap identity() {
    return {[](const Point& x) { return x; },
            [](const Point&) {
              return Mat3{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};
            }};
  }

  static CoordinateMap from_exprs(std::array<Expr, 3> y, Params params = {}) {
    std::array<std::array<Expr, 3>, 3> dy;
    for (std::size_t i = 0; i < 3; ++i)
      for (int k = 1; k <= 3; ++k)
        dy[i][static_cast<std::size_t>(k - 1)] = y[i].diff(k).simplified();
    auto fwd = [y, params](const Point& x) {
      return Point{y[0].eval(x, params), y[1].eval(x, params), y[2].eval(x, params)};
    };
    auto jac = [dy, params](const Point& x) {
      Mat3 m;
      for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t k = 0; k < 3; ++k) m[i][k] = dy[i][k].eval(x, params);
      return m;
    };
    return {fwd, jac};
  }

  /// composition g after f
  static CoordinateMap compose(const CoordinateMap& g, const CoordinateMap& f) {
    auto fwd = [g, f](const Point& x) { return g.forward(f.forward(x)); };
    auto jac = [g, f](const Point& x) {
      Point y = f.forward(x);
      Mat3 A = g.jacobian(y), B = f.jacobian(x), m{};
      for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t k = 0; k < 3; ++k) {
          double s = 0.0;
          for (std::size_t l = 0; l < 3; ++l) s += A[i][l] * B[l][k];
          m[i][k] = s;
        }
      return m;
    };
    return {fwd, jac};
  }
};

inline double det3(const Mat3& m) {
  return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
         m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
         m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
}

/// Numeric evaluator for the transformed structure J'(y(x)) under the
/// tensor rule J'_ij = sum_kl (dy_i/dx_k) J_kl (dy_j/dx_l). Only the
/// upper triangle is computed; the mirror sign makes skew-symmetry exact.
class TransformedStructure {
 public:
  TransformedStructure(StructureMatrix J, CoordinateMap map)
      : J_(std::move(J)), map_(std::move(map)) {}

  /// matrix in the new coordinates, evaluated at the original point x
  Mat3 matrix_at_x(const Point& x) const {
    Mat3 T = map_.jacobian(x);
    if (det3(T) == 0.0) throw StructureError("singular Jacobian of coordinate map");
    Mat3 M = J_.matrix_at(x);
    Mat3 out{};
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = i + 1; j < 3; ++j) {
        double s = 0.0;
        for (std::size_t k = 0; k < 3; ++k)
          for (std::size_t l = 0; l < 3; ++l) s += T[i][k] * M[k][l] * T[j][l];
        out[i][j] = s;
        out[j][i] = -s;
      }
    return out;
  }

  const StructureMatrix& base() const { return J_; }
  const CoordinateMap& map() const { return map_; }

 private:
  StructureMatrix J_;
  CoordinateMap map_;
};

inline TransformedStructure transform(const StructureMatrix& J, const CoordinateMap& map) {
  return TransformedStructure(J, map);
}

}  // namespace p3
