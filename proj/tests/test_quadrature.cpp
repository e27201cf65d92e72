#include <catch_amalgamated.hpp>

#include "p3/parser.hpp"
#include "p3/quadrature.hpp"

using namespace p3;

TEST_CASE("adaptive Simpson hits known integrals") {
  auto sq = [](double x) { return x * x; };
  CHECK_THAT(detail::adaptive_simpson(sq, 0, 3), Catch::Matchers::WithinAbs(9.0, 1e-10));
  auto invx = [](double x) { return 1.0 / x; };
  CHECK_THAT(detail::adaptive_simpson(invx, 1, std::exp(1.0)),
             Catch::Matchers::WithinAbs(1.0, 1e-9));
  auto g = [](double x) { return std::exp(-x) * std::sin(x); };
  double exact = 0.5 - std::exp(-1.0) * (std::sin(1.0) + std::cos(1.0)) / 2.0;
  CHECK_THAT(detail::adaptive_simpson(g, 0, 1), Catch::Matchers::WithinAbs(exact, 1e-9));
}

TEST_CASE("closed-form antiderivative table") {
  struct Row {
    const char* integrand;
    double lo, hi, anchor;  // interval chosen so the integrand keeps one sign
    double at;              // evaluate F at this point
    double expect;          // F(at) - F(anchor)
  };
  const Row rows[] = {
      {"x1^2", 0.25, 4.0, 1.0, 2.0, 7.0 / 3.0},
      {"1/x1", 0.25, 4.0, 1.0, 2.0, std::log(2.0)},
      {"exp(2*x1)", 0.25, 4.0, 1.0, 2.0, (std::exp(4.0) - std::exp(2.0)) / 2.0},
      {"sin(x1)", 0.25, 3.0, 1.0, 2.0, -std::cos(2.0) + std::cos(1.0)},
      {"cos(3*x1)", 0.05, 0.5, 0.1, 0.4, (std::sin(1.2) - std::sin(0.3)) / 3.0},
      {"2*x1 + 3", 0.25, 4.0, 1.0, 2.0, (4.0 + 6.0) - (1.0 + 3.0)},  // F = x^2 + 3x
  };
  for (const auto& r : rows) {
    Antiderivative F(parse(r.integrand), 1, r.lo, r.hi, r.anchor);
    INFO(r.integrand);
    CHECK(F.closed_form().has_value());
    CHECK_THAT(F(r.at), Catch::Matchers::WithinAbs(r.expect, 1e-12));
    CHECK_THAT(F(r.anchor), Catch::Matchers::WithinAbs(0.0, 1e-14));  // anchored
  }
}

TEST_CASE("numeric fallback agrees with the closed form") {
  auto f = [](double x) { return 1.0 / x; };
  Antiderivative F(f, 0.25, 4.0, 1.0);
  CHECK_FALSE(F.closed_form().has_value());
  CHECK_THAT(F(3.0), Catch::Matchers::WithinAbs(std::log(3.0), 1e-9));
  CHECK_THAT(F(0.5), Catch::Matchers::WithinAbs(std::log(0.5), 1e-9));
}

TEST_CASE("derivative of the antiderivative is the integrand") {
  Antiderivative F(parse("x1^2 + 1"), 1, 0.5, 2.0, 1.0);
  for (double x : {0.6, 1.0, 1.7}) CHECK(F.deriv(x) == x * x + 1.0);
}

TEST_CASE("monotone inverse round-trips") {
  Antiderivative F(parse("x1^2 + 1"), 1, 0.5, 2.0, 1.0);
  for (double x : {0.6, 0.9, 1.4, 1.9}) {
    CHECK_THAT(F.invert(F(x)), Catch::Matchers::WithinAbs(x, 1e-9));
  }
  // decreasing integrand: still invertible
  Antiderivative G(parse("-(1/x1)"), 1, 0.5, 2.0, 1.0);
  CHECK(G.sign() < 0);
  for (double x : {0.7, 1.2, 1.8})
    CHECK_THAT(G.invert(G(x)), Catch::Matchers::WithinAbs(x, 1e-9));
}

TEST_CASE("sign-changing integrand is rejected") {
  CHECK_THROWS_AS(Antiderivative(parse("x1 - 1"), 1, 0.5, 2.0, 1.0), QuadratureError);
}
