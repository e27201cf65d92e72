#include <catch_amalgamated.hpp>

#include "p3/parser.hpp"
#include "p3/structure.hpp"

using namespace p3;

namespace {

StructureMatrix euler() {
  return {parse("x3"), parse("x2"), parse("x1"), {}, Domain(0.5, 2.0)};
}

}  // namespace

TEST_CASE("matrix sign pattern") {
  Mat3 m = euler().matrix_at({1.0, 2.0, 3.0});
  // u = J12, v = J31, w = J23
  CHECK(m[0][1] == 3.0);
  CHECK(m[2][0] == 2.0);
  CHECK(m[1][2] == 1.0);
  for (int i = 0; i < 3; ++i) {
    CHECK(m[i][i] == 0.0);
    for (int j = 0; j < 3; ++j) CHECK(m[i][j] == -m[j][i]);
  }
}

TEST_CASE("Jacobi residual formula") {
  // u = x1*x2, v = w = 1: residual u d1v - v d1u + w d2u - u d2w + v d3w - w d3v
  //                              = -x2 + x1
  StructureMatrix bad{parse("x1*x2"), parse("1"), parse("1"), {}, Domain(0.5, 2.0)};
  for (Point p : {Point{1.0, 2.0, 1.0}, Point{0.7, 1.9, 1.1}})
    CHECK_THAT(jacobi_residual(bad, p),
               Catch::Matchers::WithinAbs(p[0] - p[1], 1e-14));
  CHECK_FALSE(check_jacobi(bad).pass);
  CHECK(check_jacobi(bad).max_relative_residual > 1e-3);
}

TEST_CASE("Jacobi passes for known solutions") {
  CHECK(check_jacobi(euler()).pass);
  // constant matrix: trivially closed
  StructureMatrix c{parse("1"), parse("2"), parse("3"), {}, Domain(0.5, 2.0)};
  CHECK(check_jacobi(c).pass);
  // single-entry matrix: any one nonzero entry solves the identity
  StructureMatrix g{parse("0"), parse("0"), parse("exp(x1*x2*x3)"), {}, Domain(0.5, 2.0)};
  CHECK(check_jacobi(g).pass);
}

TEST_CASE("scaling by a nonvanishing multiplier preserves closure") {
  StructureMatrix J = euler();
  for (const char* mu : {"x1", "exp(x2)", "1 + x1*x3", "1/(x2 + x3)"}) {
    StructureMatrix S = scale(J, parse(mu));
    INFO(mu);
    CHECK(check_jacobi(S).pass);
  }
  CHECK_THROWS_AS(scale(J, parse("x1 - 1.2")), StructureError);  // vanishing multiplier
}

TEST_CASE("rank is 0 at nothing and 2 wherever an entry is nonzero") {
  CHECK(rank_at(euler(), {1, 1, 1}) == 2);
  StructureMatrix z{parse("0"), parse("0"), parse("0"), {}, Domain(0.5, 2.0)};
  CHECK(rank_at(z, {1, 1, 1}) == 0);
}

TEST_CASE("transform follows the tensor rule and stays skew") {
  StructureMatrix J = euler();
  // y_i = x_i^2 / 2  (Jacobian diag(x1,x2,x3))
  CoordinateMap map = CoordinateMap::from_exprs(
      {parse("x1^2/2"), parse("x2^2/2"), parse("x3^2/2")}, {});
  TransformedStructure T = transform(J, map);
  Sampler s(J.domain, 5);
  for (int k = 0; k < 25; ++k) {
    Point p = s.next();
    Mat3 m = T.matrix_at_x(p);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) CHECK(m[i][j] == -m[j][i]);  // bitwise skew
    // J'_12 = x1 * u * x2 with u = x3
    CHECK_THAT(m[0][1], Catch::Matchers::WithinRel(p[0] * p[2] * p[1], 1e-12));
  }
  // identity map leaves the matrix unchanged
  TransformedStructure I = transform(J, CoordinateMap::identity());
  Point p{1.3, 0.6, 1.7};
  Mat3 a = I.matrix_at_x(p), b = J.matrix_at(p);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) CHECK_THAT(a[i][j], Catch::Matchers::WithinAbs(b[i][j], 1e-13));
}

TEST_CASE("sampling is deterministic in the seed") {
  Sampler a(Domain(0.5, 2.0), 42), b(Domain(0.5, 2.0), 42), c(Domain(0.5, 2.0), 7);
  Point pa = a.next(), pb = b.next(), pc = c.next();
  CHECK(pa == pb);
  CHECK(pa != pc);
}
