#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "p3/reduction.hpp"
#include "p3/structure.hpp"

namespace p3 {

struct DynamicsError : std::runtime_error {
  explicit DynamicsError(const std::string& what) : std::runtime_error(what) {}
};

/// dx/dt = J(x) grad H(x) on an open box; halts cleanly on boundary exit.
struct PoissonSystem {
  StructureMatrix J;
  Expr H;

  std::array<Expr, 3> grad_h() const {
    return {H.diff(1).simplified(), H.diff(2).simplified(), H.diff(3).simplified()};
  }
};

inline Point vector_field(const PoissonSystem& sys, const Point& p) {
  const Params& ps = sys.J.params;
  double u = sys.J.u.eval(p, ps);
  double v = sys.J.v.eval(p, ps);
  double w = sys.J.w.eval(p, ps);
  double h1 = sys.H.diff(1).eval(p, ps);
  double h2 = sys.H.diff(2).eval(p, ps);
  double h3 = sys.H.diff(3).eval(p, ps);
  return {u * h2 - v * h3, -u * h1 + w * h3, v * h1 - w * h2};
}

enum class HaltStatus { Completed, BoundaryExit, NumericalFailure };

inline const char* to_string(HaltStatus s) {
  switch (s) {
    case HaltStatus::Completed: return "completed";
    case HaltStatus::BoundaryExit: return "boundary_exit";
    default: return "numerical_failure";
  }
}

struct Trajectory {
  std::vector<double> t;
  std::vector<Point> x;
  std::vector<double> H;
  std::vector<double> C;            // empty when no Casimir registered
  std::vector<double> tau;          // reparametrized runs only
  HaltStatus status = HaltStatus::Completed;
};

struct StepControl {
  double h = 1e-3;
  bool adaptive = false;
  double tol = 1e-10;
  int stride = 1;  // record every stride-th step
};

namespace detail {

template <typename Rhs, typename State>
State rk4_step(const Rhs& f, const State& s, double h) {
  State k1 = f(s);
  State s2, s3, s4;
  for (std::size_t i = 0; i < s.size(); ++i) s2[i] = s[i] + 0.5 * h * k1[i];
  State k2 = f(s2);
  for (std::size_t i = 0; i < s.size(); ++i) s3[i] = s[i] + 0.5 * h * k2[i];
  State k3 = f(s3);
  for (std::size_t i = 0; i < s.size(); ++i) s4[i] = s[i] + h * k3[i];
  State k4 = f(s4);
  State out;
  for (std::size_t i = 0; i < s.size(); ++i)
    out[i] = s[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  return out;
}

template <typename State>
bool finite(const State& s) {
  for (double v : s)
    if (!std::isfinite(v)) return false;
  return true;
}

}  // namespace detail

inline Trajectory integrate(const PoissonSystem& sys, const Point& x0, double t0,
                            double t1, StepControl ctl = {},
                            const CasimirFn* casimir = nullptr) {
  if (!sys.J.domain.contains(x0))
    throw DynamicsError("initial point outside the open domain");
  if (!(t1 > t0)) throw DynamicsError("t_span must have positive length");

  auto gh = sys.grad_h();
  const Params& ps = sys.J.params;
  auto rhs = [&](const Point& p) -> Point {
    double u = sys.J.u.eval(p, ps), v = sys.J.v.eval(p, ps), w = sys.J.w.eval(p, ps);
    double h1 = gh[0].eval(p, ps), h2 = gh[1].eval(p, ps), h3 = gh[2].eval(p, ps);
    return {u * h2 - v * h3, -u * h1 + w * h3, v * h1 - w * h2};
  };

  Trajectory traj;
  auto record = [&](double t, const Point& p) {
    traj.t.push_back(t);
    traj.x.push_back(p);
    traj.H.push_back(sys.H.eval(p, ps));
    if (casimir) traj.C.push_back(casimir->value(p));
  };

  Point p = x0;
  double t = t0;
  double h = ctl.h;
  long step_index = 0;
  record(t, p);
  while (t < t1 - 1e-15) {
    double hs = std::min(h, t1 - t);
    Point next;
    try {
      if (ctl.adaptive) {
        // step-doubling control
        for (;;) {
          Point full = detail::rk4_step(rhs, p, hs);
          Point half = detail::rk4_step(rhs, detail::rk4_step(rhs, p, 0.5 * hs), 0.5 * hs);
          double err = 0.0;
          for (std::size_t i = 0; i < 3; ++i)
            err = std::max(err, std::fabs(full[i] - half[i]));
          if (err <= ctl.tol || hs <= 1e-12) {
            next = half;
            if (err < 0.25 * ctl.tol) h = std::min(hs * 2.0, ctl.h * 1e3);
            break;
          }
          hs *= 0.5;
          if (hs < 1e-13) throw DynamicsError("step size underflow");
        }
      } else {
        next = detail::rk4_step(rhs, p, hs);
      }
    } catch (const EvalError&) {
      traj.status = HaltStatus::NumericalFailure;
      return traj;
    }
    if (!detail::finite(next)) {
      traj.status = HaltStatus::NumericalFailure;
      return traj;
    }
    if (!sys.J.domain.contains(next)) {
      traj.status = HaltStatus::BoundaryExit;
      return traj;
    }
    p = next;
    t += hs;
    ++step_index;
    if (step_index % ctl.stride == 0 || t >= t1 - 1e-15) record(t, p);
  }
  return traj;
}

/// Canonical-coordinate integration in the new time tau:
///   dz/dtau = J_target grad_z H(x(z)),  dt/dtau = 1/mu_hat(z)
/// so the physical time is recovered alongside. The distinguished
/// coordinate is exactly constant (its right-hand side is a hard zero).
inline Trajectory integrate_reparam(const PoissonSystem& sys, const DarbouxChart& chart,
                                    const Point& z0, double tau0, double tau1,
                                    StepControl ctl = {}) {
  if (!(tau1 > tau0)) throw DynamicsError("tau_span must have positive length");
  auto gh = sys.grad_h();
  const Params& ps = sys.J.params;

  auto grad_z = [&](const Point& z) -> Point {
    Point x = chart.inverse(z);
    Mat3 T = chart.forward.jacobian(x);  // dz_i/dx_k
    // invert via adjugate
    double det = det3(T);
    if (det == 0.0) throw DynamicsError("singular chart Jacobian");
    Mat3 inv;
    inv[0][0] = (T[1][1] * T[2][2] - T[1][2] * T[2][1]) / det;
    inv[0][1] = (T[0][2] * T[2][1] - T[0][1] * T[2][2]) / det;
    inv[0][2] = (T[0][1] * T[1][2] - T[0][2] * T[1][1]) / det;
    inv[1][0] = (T[1][2] * T[2][0] - T[1][0] * T[2][2]) / det;
    inv[1][1] = (T[0][0] * T[2][2] - T[0][2] * T[2][0]) / det;
    inv[1][2] = (T[0][2] * T[1][0] - T[0][0] * T[1][2]) / det;
    inv[2][0] = (T[1][0] * T[2][1] - T[1][1] * T[2][0]) / det;
    inv[2][1] = (T[0][1] * T[2][0] - T[0][0] * T[2][1]) / det;
    inv[2][2] = (T[0][0] * T[1][1] - T[0][1] * T[1][0]) / det;
    Point gx{gh[0].eval(x, ps), gh[1].eval(x, ps), gh[2].eval(x, ps)};
    // dH/dz_i = sum_k dx_k/dz_i dH/dx_k, with dx_k/dz_i = inv[k][i]
    Point gz;
    for (std::size_t i = 0; i < 3; ++i) {
      double s = 0.0;
      for (std::size_t k = 0; k < 3; ++k) s += inv[k][i] * gx[k];
      gz[i] = s;
    }
    return gz;
  };

  using State4 = std::array<double, 4>;  // z1, z2, z3, t
  auto rhs = [&](const State4& s) -> State4 {
    Point z{s[0], s[1], s[2]};
    Point gz = grad_z(z);
    State4 d{};
    for (std::size_t i = 0; i < 3; ++i) {
      double acc = 0.0;
      for (std::size_t j = 0; j < 3; ++j)
        if (chart.target[i][j] != 0.0) acc += chart.target[i][j] * gz[j];
      d[i] = acc;  // exact zero row for the distinguished coordinate
    }
    double mu = chart.mu_hat(z);
    if (mu == 0.0) throw DynamicsError("mu_hat vanishes along the trajectory");
    d[3] = 1.0 / mu;
    return d;
  };

  Trajectory traj;
  auto record = [&](double tau, const State4& s) {
    Point z{s[0], s[1], s[2]};
    traj.tau.push_back(tau);
    traj.t.push_back(s[3]);
    traj.x.push_back(z);
    traj.H.push_back(sys.H.eval(chart.inverse(z), ps));
  };

  State4 s{z0[0], z0[1], z0[2], 0.0};
  double tau = tau0;
  long step_index = 0;
  record(tau, s);
  while (tau < tau1 - 1e-15) {
    double hs = std::min(ctl.h, tau1 - tau);
    State4 next;
    try {
      next = detail::rk4_step(rhs, s, hs);
    } catch (const std::exception&) {
      traj.status = HaltStatus::NumericalFailure;
      return traj;
    }
    if (!detail::finite(next)) {
      traj.status = HaltStatus::NumericalFailure;
      return traj;
    }
    s = next;
    tau += hs;
    ++step_index;
    if (step_index % ctl.stride == 0 || tau >= tau1 - 1e-15) record(tau, s);
  }
  return traj;
}

struct Drift {
  std::string name;
  double max_drift = 0.0;
  double relative_drift = 0.0;
};

inline std::vector<Drift> monitor(const Trajectory& traj,
                                  const std::vector<std::pair<std::string, std::function<double(const Point&)>>>& fns) {
  std::vector<Drift> out;
  for (const auto& [name, f] : fns) {
    Drift d;
    d.name = name;
    if (!traj.x.empty()) {
      double f0 = f(traj.x.front());
      for (const auto& p : traj.x)
        d.max_drift = std::max(d.max_drift, std::fabs(f(p) - f0));
      d.relative_drift = d.max_drift / (1.0 + std::fabs(f0));
    }
    out.push_back(std::move(d));
  }
  return out;
}

}  // namespace p3
