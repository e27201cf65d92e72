// End-to-end acceptance gate: one line per criterion, nonzero exit when
// any criterion fails. Keeps its own RNG fixed so every run is identical.
#include <array>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <random>
#include <string>
#include <vector>

#include "p3/dynamics.hpp"
#include "p3/json_io.hpp"

using namespace p3;

namespace {

int g_failures = 0;

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

void report(int criterion, bool pass, const std::string& what,
            const std::string& detail = "") {
  std::printf("%s criterion %2d: %s%s%s\n", pass ? "PASS" : "FAIL", criterion,
              what.c_str(), detail.empty() ? "" : " -- ", detail.c_str());
  if (!pass) ++g_failures;
}

// -- random spec generation ------------------------------------------------

using Rng = std::mt19937_64;

double coeff(Rng& rng) {
  std::uniform_real_distribution<double> d(0.2, 2.0);
  return d(rng);
}

// univariate factor in x_axis, strictly positive on (1,2)
Expr positive_univariate(Rng& rng, int axis) {
  Expr x = Expr::var(axis);
  switch (std::uniform_int_distribution<int>(0, 5)(rng)) {
    case 0: return Expr::num(coeff(rng));
    case 1: return Expr::num(coeff(rng)) * x;
    case 2: return Expr::num(coeff(rng)) + x;
    case 3: return Expr::unary(Op::Exp, Expr::num(coeff(rng)) * x);
    case 4: return Expr::num(coeff(rng)) * x * x + Expr::num(1.0);
    default: return Expr::num(1.0) / (Expr::num(coeff(rng)) + x);
  }
}

// nonvanishing (possibly negative) univariate factor
Expr nonvanishing_univariate(Rng& rng, int axis) {
  Expr f = positive_univariate(rng, axis);
  if (std::uniform_int_distribution<int>(0, 3)(rng) == 0) return Expr::num(0.0) - f;
  return f;
}

Expr nonvanishing_multivariate(Rng& rng) {
  Expr f = nonvanishing_univariate(rng, 1);
  for (int axis = 2; axis <= 3; ++axis)
    if (std::uniform_int_distribution<int>(0, 1)(rng))
      f = f * nonvanishing_univariate(rng, axis);
  return f;
}

DeltaSpec random_delta(Rng& rng, bool positive = false) {
  DeltaSpec s;
  s.domain = Domain(1.0, 2.0);
  s.eta = positive ? positive_univariate(rng, 1) * positive_univariate(rng, 2)
                   : nonvanishing_multivariate(rng);
  for (int i = 0; i < 3; ++i) {
    auto axis = i + 1;
    s.psi[static_cast<std::size_t>(i)] =
        positive ? positive_univariate(rng, axis) : nonvanishing_univariate(rng, axis);
    s.phi[static_cast<std::size_t>(i)] =
        positive ? positive_univariate(rng, axis) : nonvanishing_univariate(rng, axis);
  }
  return s;
}

GammaPairSpec random_gamma_pair(Rng& rng, ZeroSlot slot) {
  GammaPairSpec s;
  s.zero = slot;
  s.domain = Domain(1.0, 2.0);
  s.eta = nonvanishing_multivariate(rng);
  auto [a, b] = s.shape_axes();
  Expr num = nonvanishing_univariate(rng, a);
  Expr den = positive_univariate(rng, b);
  s.shape = num / den;
  s.shape_num = num;
  s.shape_den = den;
  return s;
}

GammaSingletonSpec random_gamma_singleton(Rng& rng, ZeroSlot slot) {
  GammaSingletonSpec s;
  s.nonzero = slot;
  s.domain = Domain(1.0, 2.0);
  s.eta = nonvanishing_multivariate(rng);
  return s;
}

double max_annihilation(const StructureMatrix& m, const CasimirFn& C, int samples,
                        std::uint64_t seed = 42) {
  Sampler s(m.domain, seed);
  double worst = 0.0;
  for (int k = 0; k < samples; ++k) {
    Point p = s.next();
    Point g = C.grad(p);
    Mat3 J = m.matrix_at(p);
    double gn = std::max({std::fabs(g[0]), std::fabs(g[1]), std::fabs(g[2])});
    for (int i = 0; i < 3; ++i) {
      double r = J[i][0] * g[0] + J[i][1] * g[1] + J[i][2] * g[2];
      worst = std::max(worst, std::fabs(r) / (1.0 + gn));
    }
  }
  return worst;
}

std::string run_cli(const std::string& cli, const std::string& args, int& exit_code) {
  std::string cmd = cli + " " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) {
    exit_code = -1;
    return {};
  }
  std::string out;
  std::array<char, 4096> buf;
  while (std::size_t n = std::fread(buf.data(), 1, buf.size(), pipe)) out.append(buf.data(), n);
  exit_code = WEXITSTATUS(pclose(pipe));
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  Rng rng(20240817);
  std::vector<DeltaSpec> deltas;
  std::vector<GammaPairSpec> pairs;
  std::vector<GammaSingletonSpec> singletons;

  // ---- 1: factorized-family closure --------------------------------------
  {
    double worst = 0.0;
    for (int k = 0; k < 100; ++k) {
      DeltaSpec s = random_delta(rng);
      StructureMatrix m = build_delta(s);
      JacobiReport rep = check_jacobi(m, 1000);
      worst = std::max(worst, rep.max_relative_residual);
      deltas.push_back(std::move(s));
    }
    report(1, worst <= 1e-9, "100 randomized factorized specs close the Jacobi identity",
           "max relative residual " + sci(worst));
  }

  // ---- 2: one-zero and two-zero family closure ---------------------------
  {
    double worst = 0.0;
    for (ZeroSlot slot : {ZeroSlot::U, ZeroSlot::V, ZeroSlot::W}) {
      for (int k = 0; k < 100; ++k) {
        GammaPairSpec s = random_gamma_pair(rng, slot);
        worst = std::max(worst, check_jacobi(build_gamma_pair(s), 1000).max_relative_residual);
        pairs.push_back(std::move(s));
      }
      for (int k = 0; k < 100; ++k) {
        GammaSingletonSpec s = random_gamma_singleton(rng, slot);
        worst = std::max(worst,
                         check_jacobi(build_gamma_singleton(s), 1000).max_relative_residual);
        singletons.push_back(std::move(s));
      }
    }
    report(2, worst <= 1e-9,
           "randomized one-zero and two-zero specs close the Jacobi identity",
           "max relative residual " + sci(worst));
  }

  // ---- 3: scaling preserves closure --------------------------------------
  {
    double worst = 0.0;
    for (int k = 0; k < 50; ++k) {
      StructureMatrix m = build_delta(deltas[static_cast<std::size_t>(k)]);
      Expr mu = nonvanishing_multivariate(rng);
      worst = std::max(worst, check_jacobi(scale(m, mu), 1000).max_relative_residual);
    }
    report(3, worst <= 1e-9, "50 random nonvanishing multipliers preserve closure",
           "max relative residual " + sci(worst));
  }

  // ---- 4: Casimir annihilation -------------------------------------------
  {
    double worst = 0.0;
    for (const auto& e : catalog()) {
      StructureMatrix m = instantiate(e.id);
      CasimirFn C = e.family == "delta" ? casimir_delta(catalog_delta_spec(e))
                    : e.family == "gamma_pair"
                        ? casimir_gamma_pair(catalog_gamma_pair_spec(e))
                        : casimir_gamma_singleton(catalog_gamma_singleton_spec(e));
      worst = std::max(worst, max_annihilation(m, C, 1000));
    }
    for (const auto& s : deltas)
      worst = std::max(worst, max_annihilation(build_delta(s), casimir_delta(s), 1000));
    for (const auto& s : pairs)
      worst = std::max(worst,
                       max_annihilation(build_gamma_pair(s), casimir_gamma_pair(s), 1000));
    for (const auto& s : singletons)
      worst = std::max(worst, max_annihilation(build_gamma_singleton(s),
                                               casimir_gamma_singleton(s), 1000));
    report(4, worst <= 1e-9, "Casimirs annihilate J for catalog and randomized specs",
           "max residual " + sci(worst));
  }

  // ---- 5 & 6: Darboux charts for every catalog entry ---------------------
  {
    double worst_dev = 0.0, worst_rt = 0.0;
    bool all_pass = true;
    for (const auto& e : catalog()) {
      StructureMatrix m = instantiate(e.id);
      DarbouxChart chart = e.family == "delta" ? darboux_delta(catalog_delta_spec(e))
                           : e.family == "gamma_pair"
                               ? darboux_gamma_pair(catalog_gamma_pair_spec(e))
                               : darboux_gamma_singleton(catalog_gamma_singleton_spec(e));
      ChartReport rep = verify_chart(m, chart, 100);
      all_pass = all_pass && rep.pass;
      worst_dev = std::max(worst_dev, rep.max_deviation);
      worst_rt = std::max(worst_rt, rep.max_roundtrip_error);
    }
    // Step-1 intermediate matrix check on one factorized instance
    DeltaSpec euler = catalog_delta_spec(catalog_get("euler-top"));
    DeltaStep1 step = darboux_delta_step1(euler);
    TransformedStructure T = transform(build_delta(euler), step.map);
    Sampler sam(euler.domain, 31);
    double step_dev = 0.0;
    for (int k = 0; k < 100; ++k) {
      Point x = sam.next();
      Mat3 m = T.matrix_at_x(x);
      double et = step.eta_tilde(x);
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
          step_dev = std::max(step_dev,
                              std::fabs(m[i][j] - et * step.pattern[i][j]) /
                                  (1.0 + std::fabs(et)));
    }
    report(5, all_pass && worst_dev <= 1e-8 && step_dev <= 1e-8,
           "charts reach the canonical form on all catalog entries (incl. Step 1)",
           "max deviation " + sci(worst_dev) + ", step-1 " +
               sci(step_dev));
    report(6, worst_rt <= 1e-8, "chart inverse(forward(x)) round-trips",
           "max round-trip error " + sci(worst_rt));
  }

  // ---- 7: superposition algebra ------------------------------------------
  {
    double jacobi_worst = 0.0, axiom_worst = 0.0;
    for (int k = 0; k < 50; ++k) {
      StructureMatrix A = build_delta(random_delta(rng, /*positive=*/true));
      StructureMatrix B = build_delta(random_delta(rng, /*positive=*/true));
      StructureMatrix C = build_delta(random_delta(rng, /*positive=*/true));
      double a = std::uniform_real_distribution<double>(0.3, 2.0)(rng);
      StructureMatrix ab = oplus(A, B);
      jacobi_worst = std::max(jacobi_worst, check_jacobi(ab, 200).max_relative_residual);
      jacobi_worst =
          std::max(jacobi_worst, check_jacobi(otimes(a, A), 200).max_relative_residual);
      StructureMatrix ba = oplus(B, A);
      StructureMatrix abc1 = oplus(ab, C), abc2 = oplus(A, oplus(B, C));
      StructureMatrix d1 = otimes(a, ab), d2 = oplus(otimes(a, A), otimes(a, B));
      Sampler s(A.domain, 37);
      for (int i = 0; i < 20; ++i) {
        Point p = s.next();
        auto gap = [&](const StructureMatrix& X, const StructureMatrix& Y) {
          double g = 0.0;
          g = std::max(g, std::fabs(X.u.eval(p) - Y.u.eval(p)) / (1.0 + std::fabs(Y.u.eval(p))));
          g = std::max(g, std::fabs(X.v.eval(p) - Y.v.eval(p)) / (1.0 + std::fabs(Y.v.eval(p))));
          g = std::max(g, std::fabs(X.w.eval(p) - Y.w.eval(p)) / (1.0 + std::fabs(Y.w.eval(p))));
          return g;
        };
        axiom_worst = std::max({axiom_worst, gap(ab, ba), gap(abc1, abc2), gap(d1, d2)});
      }
    }
    report(7, jacobi_worst <= 1e-9 && axiom_worst <= 1e-10,
           "superposition closure and group/vector-space axioms",
           "jacobi " + sci(jacobi_worst) + ", axioms " +
               sci(axiom_worst));
  }

  // ---- 8: separability ----------------------------------------------------
  {
    bool ok = true;
    for (const auto& e : catalog()) {
      if (e.family != "gamma_pair") continue;
      GammaPairSpec s = catalog_gamma_pair_spec(e);
      auto [a, b] = s.shape_axes();
      ok = ok && is_separable(s.shape.with_params(s.params), s.domain, a, b);
    }
    Domain d(0.5, 3.0);
    Expr f = parse("x1 + x2");
    double lhs = f.eval({1, 1, 0}) * f.eval({2, 2, 0});
    double rhs = f.eval({1, 2, 0}) * f.eval({2, 1, 0});
    ok = ok && !is_separable(f, d, 1, 2) && lhs == 8.0 && rhs == 9.0;
    // round trip of separate()
    Expr g = parse("(1 + x1^2)/exp(x2)");
    Separation parts = separate(g, d, 1, 2);
    Sampler sam(d, 41);
    double rt = 0.0;
    for (int k = 0; k < 100; ++k) {
      Point p = sam.next();
      double got = parts.num(p[0]) / parts.den(p[1]);
      rt = std::max(rt, std::fabs(got - g.eval(p)) / std::fabs(g.eval(p)));
    }
    ok = ok && rt <= 1e-10;
    report(8, ok, "separability detection, witness 8 vs 9, and round-trip",
           "round-trip " + sci(rt));
  }

  // ---- 9: conservation under RK4 ------------------------------------------
  double slot_drift = 0.0;
  {
    StructureMatrix J{parse("x3"), parse("x2"), parse("x1"), {},
                      Domain({-2, -2, -2}, {2, 2, 2})};
    PoissonSystem sys{J, parse("x1^2/2 + x2^2/4 + x3^2/6")};
    CasimirFn C{[](const Point& p) {
                  return 0.5 * (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]);
                },
                [](const Point& p) { return Point{p[0], p[1], p[2]}; },
                "sphere"};
    StepControl ctl;
    ctl.h = 1e-3;
    ctl.stride = 10;
    Trajectory tr = integrate(sys, {1.0, 1.0, 1.0}, 0.0, 10.0, ctl, &C);
    double dH = 0.0, dC = 0.0;
    for (std::size_t i = 0; i < tr.t.size(); ++i) {
      dH = std::max(dH, std::fabs(tr.H[i] - tr.H[0]));
      dC = std::max(dC, std::fabs(tr.C[i] - tr.C[0]));
    }
    // canonical-coordinate run on the positive box: distinguished coordinate
    DeltaSpec euler = catalog_delta_spec(catalog_get("euler-top"));
    DarbouxChart chart = darboux_delta(euler);
    PoissonSystem sysp{build_delta(euler), sys.H};
    Point z0 = chart.forward.forward({1.0, 0.9, 1.1});
    Trajectory trz = integrate_reparam(sysp, chart, z0, 0.0, 0.2, ctl);
    auto slot = static_cast<std::size_t>(chart.casimir_slot);
    for (const auto& z : trz.x)
      slot_drift = std::max(slot_drift, std::fabs(z[slot] - z0[slot]));
    bool ok = tr.status == HaltStatus::Completed && dH <= 1e-8 && dC <= 1e-8 &&
              trz.status == HaltStatus::Completed && slot_drift <= 1e-10;
    report(9, ok, "rigid-body run conserves H and C; distinguished coordinate frozen",
           "dH " + sci(dH) + ", dC " + sci(dC) + ", slot drift " +
               sci(slot_drift));
  }

  // ---- 10: map-back equivalence -------------------------------------------
  {
    DeltaSpec euler = catalog_delta_spec(catalog_get("euler-top"));
    StructureMatrix J = build_delta(euler);
    DarbouxChart chart = darboux_delta(euler);
    PoissonSystem sys{J, parse("x1^2/2 + x2^2/4 + x3^2/6")};
    Point x0{1.0, 0.9, 1.1};
    StepControl ctl;
    ctl.h = 1e-4;
    Trajectory trz = integrate_reparam(sys, chart, chart.forward.forward(x0), 0.0, 0.2, ctl);
    double t_end = trz.t.back();
    double err = -1.0;
    if (trz.status == HaltStatus::Completed && t_end > 0) {
      StepControl direct;
      direct.h = t_end / 20000.0;
      direct.stride = 20000;
      Trajectory trd = integrate(sys, x0, 0.0, t_end, direct);
      if (trd.status == HaltStatus::Completed) {
        Point via = chart.inverse(trz.x.back());
        err = 0.0;
        for (std::size_t i = 0; i < 3; ++i)
          err = std::max(err, std::fabs(via[i] - trd.x.back()[i]));
      }
    }
    report(10, err >= 0 && err <= 1e-5,
           "canonical-coordinate run maps back onto direct integration",
           "max mismatch " + sci(err) + " at t " + std::to_string(t_end));
  }

  // ---- 11: derivative engine ----------------------------------------------
  {
    double worst = 0.0;
    int tested = 0;
    std::uniform_int_distribution<int> pick(0, 2);
    while (tested < 100) {
      // random three-term composite over all axes
      Expr e = positive_univariate(rng, 1);
      for (int axis = 2; axis <= 3; ++axis) {
        Expr f = positive_univariate(rng, axis);
        switch (pick(rng)) {
          case 0: e = e + f; break;
          case 1: e = e * f; break;
          default: e = e / f; break;
        }
      }
      if (pick(rng) == 0) e = Expr::unary(Op::Sin, e);
      Sampler s(Domain(1.0, 2.0), 43 + static_cast<std::uint64_t>(tested));
      bool usable = true;
      double local = 0.0;
      for (int k = 0; k < 10 && usable; ++k) {
        Point p = s.next();
        for (int axis = 1; axis <= 3; ++axis) {
          const double h = 1e-6;
          Point a = p, b = p;
          a[static_cast<std::size_t>(axis - 1)] += h;
          b[static_cast<std::size_t>(axis - 1)] -= h;
          try {
            double fd = (e.eval(a) - e.eval(b)) / (2 * h);
            double sym = e.diff(axis).eval(p);
            local = std::max(local, std::fabs(sym - fd) / (1.0 + std::fabs(fd)));
          } catch (const EvalError&) {
            usable = false;
          }
        }
      }
      if (!usable) continue;
      worst = std::max(worst, local);
      ++tested;
    }
    report(11, worst <= 1e-6, "symbolic derivatives match finite differences",
           "max relative gap " + sci(worst));
  }

  // ---- 12: CLI determinism ------------------------------------------------
  {
    if (argc < 2) {
      report(12, false, "CLI determinism", "CLI path not supplied");
    } else {
      std::string cli = argv[1];
      bool ok = true;
      for (const char* args :
           {"verify --catalog euler-top", "classify --catalog lorenz-t3",
            "darboux --catalog two-level", "catalog export",
            "integrate --catalog euler-top -H \"x1^2/2 + x2^2/4 + x3^2/6\" --x0 "
            "1,0.9,1.1 --t1 0.05 --step 0.01"}) {
        int c1 = 0, c2 = 0;
        std::string a = run_cli(cli, args, c1);
        std::string b = run_cli(cli, args, c2);
        ok = ok && c1 == c2 && !a.empty() && a == b;
      }
      report(12, ok, "repeated CLI runs with a fixed seed are byte-identical");
    }
  }

  std::printf("%s: %d criterion failure(s)\n", g_failures == 0 ? "OK" : "FAILED",
              g_failures);
  return g_failures == 0 ? 0 : 1;
}
