#include <catch_amalgamated.hpp>

#include "p3/parser.hpp"
#include "p3/reduction.hpp"

using namespace p3;

namespace {

DeltaSpec euler_spec() {
  DeltaSpec s;
  s.eta = parse("1");
  s.psi = {parse("1"), parse("1"), parse("1")};
  s.phi = {parse("x1"), parse("x2"), parse("x3")};
  s.domain = Domain(0.5, 2.0);
  return s;
}

GammaPairSpec lorenz_v_spec() {
  GammaPairSpec s;
  s.zero = ZeroSlot::V;
  s.eta = parse("-(x1/2)");
  s.shape = parse("-(1/(2*x1))");
  s.shape_num = parse("-(1/(2*x1))");
  s.shape_den = parse("1");
  s.domain = Domain(0.5, 2.0);
  return s;
}

void check_annihilation(const StructureMatrix& m, const CasimirFn& C, double tol = 1e-9) {
  Sampler s(m.domain, 17);
  for (int k = 0; k < 200; ++k) {
    Point p = s.next();
    Point g = C.grad(p);
    Mat3 J = m.matrix_at(p);
    double gn = std::max({std::fabs(g[0]), std::fabs(g[1]), std::fabs(g[2])});
    for (int i = 0; i < 3; ++i) {
      double r = J[i][0] * g[0] + J[i][1] * g[1] + J[i][2] * g[2];
      REQUIRE(std::fabs(r) <= tol * (1.0 + gn));
    }
  }
}

}  // namespace

TEST_CASE("delta Casimir is the sum of per-axis antiderivatives") {
  auto s = euler_spec();
  CasimirFn C = casimir_delta(s);
  check_annihilation(build_delta(s), C);
  // phi_i/psi_i = x_i, so C = (x1^2 + x2^2 + x3^2)/2 up to a constant
  Point p{1.3, 0.7, 1.8}, q{0.6, 1.9, 0.9};
  auto sphere = [](const Point& r) { return 0.5 * (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]); };
  CHECK_THAT(C.value(p) - C.value(q),
             Catch::Matchers::WithinAbs(sphere(p) - sphere(q), 1e-10));
}

TEST_CASE("v-zero Casimir uses the reciprocal orientation") {
  // entries u = 1/4, w = -(x1/2): the annihilation equations force
  // grad C = (2 x1, 0, 1) direction, i.e. C = -x1^2 + x3 up to sign/constant
  auto s = lorenz_v_spec();
  CasimirFn C = casimir_gamma_pair(s);
  check_annihilation(build_gamma_pair(s), C);
  Point p{1.3, 0.7, 1.8}, q{0.6, 1.9, 0.9};
  double lhs = C.value(p) - C.value(q);
  double rhs = (-p[0] * p[0] + p[2]) - (-q[0] * q[0] + q[2]);
  // the construction may fix either overall sign; compare up to it
  CHECK_THAT(std::fabs(lhs), Catch::Matchers::WithinRel(std::fabs(rhs), 1e-9));
}

TEST_CASE("u-zero and w-zero Casimirs annihilate their structures") {
  GammaPairSpec u0;
  u0.zero = ZeroSlot::U;
  u0.eta = parse("x3^2");
  u0.shape = parse("x1^2/x2");
  u0.domain = Domain(0.5, 2.0);
  check_annihilation(build_gamma_pair(u0), casimir_gamma_pair(u0));

  GammaPairSpec w0;
  w0.zero = ZeroSlot::W;
  w0.eta = parse("exp(x1)");
  w0.shape = parse("x2*x3");
  w0.domain = Domain(0.5, 2.0);
  check_annihilation(build_gamma_pair(w0), casimir_gamma_pair(w0));
}

TEST_CASE("non-separable shape raises NotSeparable") {
  GammaPairSpec s;
  s.zero = ZeroSlot::U;
  s.eta = parse("1");
  s.shape = parse("x1 + x2");
  s.domain = Domain(0.5, 2.0);
  CHECK_THROWS_AS(casimir_gamma_pair(s), NotSeparableError);
  CHECK_THROWS_AS(darboux_gamma_pair(s), NotSeparableError);
}

TEST_CASE("singleton Casimir is the untouched coordinate") {
  GammaSingletonSpec s;
  s.nonzero = ZeroSlot::W;  // only J23 nonzero: x1 is untouched
  s.eta = parse("1 + x2*x3");
  s.domain = Domain(0.5, 2.0);
  CasimirFn C = casimir_gamma_singleton(s);
  check_annihilation(build_gamma_singleton(s), C);
  CHECK(C.value({1.4, 0.6, 1.9}) == 1.4);
}

TEST_CASE("Step-1 intermediate matrix for the factorized family") {
  // y_i = integral of phi_i/psi_i gives eta-tilde times the 0/1/-1 pattern
  auto s = euler_spec();
  DeltaStep1 step = darboux_delta_step1(s);
  TransformedStructure T = transform(build_delta(s), step.map);
  Sampler sam(s.domain, 23);
  for (int k = 0; k < 50; ++k) {
    Point x = sam.next();
    Mat3 m = T.matrix_at_x(x);
    double et = step.eta_tilde(x);  // = x1 x2 x3 here
    CHECK_THAT(et, Catch::Matchers::WithinRel(x[0] * x[1] * x[2], 1e-10));
    Mat3 want{{{0, et, -et}, {-et, 0, et}, {et, -et, 0}}};
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        REQUIRE_THAT(m[i][j], Catch::Matchers::WithinAbs(want[i][j], 1e-8 * (1 + std::fabs(et))));
  }
}

TEST_CASE("delta chart reaches the canonical p-q block") {
  auto s = euler_spec();
  DarbouxChart chart = darboux_delta(s);
  CHECK(chart.casimir_slot == 2);
  ChartReport rep = verify_chart(build_delta(s), chart, 100);
  CHECK(rep.pass);
  CHECK(rep.max_deviation <= 1e-8);
  CHECK(rep.max_roundtrip_error <= 1e-8);
}

TEST_CASE("gamma-pair charts verify for all three zero slots") {
  auto sv = lorenz_v_spec();
  CHECK(verify_chart(build_gamma_pair(sv), darboux_gamma_pair(sv), 100).pass);

  GammaPairSpec u0;
  u0.zero = ZeroSlot::U;
  u0.eta = parse("x3^2");
  u0.shape = parse("x1^2/x2");
  u0.domain = Domain(0.5, 2.0);
  CHECK(verify_chart(build_gamma_pair(u0), darboux_gamma_pair(u0), 100).pass);
  // alternative chart for the u-zero case
  CHECK(verify_chart(build_gamma_pair(u0), darboux_gamma_pair(u0, true), 100).pass);

  GammaPairSpec w0;
  w0.zero = ZeroSlot::W;
  w0.eta = parse("exp(x1)");
  w0.shape = parse("x2*x3");
  w0.domain = Domain(0.5, 2.0);
  CHECK(verify_chart(build_gamma_pair(w0), darboux_gamma_pair(w0), 100).pass);
}

TEST_CASE("singleton charts are permutations with mu = eta") {
  for (ZeroSlot slot : {ZeroSlot::U, ZeroSlot::V, ZeroSlot::W}) {
    GammaSingletonSpec s;
    s.nonzero = slot;
    s.eta = parse("1 + x1 + x2*x3");
    s.domain = Domain(0.5, 2.0);
    DarbouxChart chart = darboux_gamma_singleton(s);
    CHECK(verify_chart(build_gamma_singleton(s), chart, 100).pass);
  }
}

TEST_CASE("chart verification fails for a wrong chart") {
  auto s = euler_spec();
  DarbouxChart chart = darboux_delta(s);
  chart.mu_hat = [](const Point&) { return 1.0; };  // break the multiplier
  ChartReport rep = verify_chart(build_delta(s), chart, 100);
  CHECK_FALSE(rep.pass);
}
