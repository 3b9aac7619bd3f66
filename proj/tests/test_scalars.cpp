#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "stableforms/diffpoly.hpp"
#include "stableforms/expr.hpp"
#include "stableforms/jet.hpp"
#include "stableforms/quadratic.hpp"
#include "support/properties.hpp"

using namespace stableforms;

namespace {

DiffPoly poly(const std::string& s) { return to_diffpoly(parse_expr(s)); }

QuadraticScalar q(long a, long b = 0, unsigned long m = 3) { return QuadraticScalar::make(a, b, m); }

}  // namespace

TEST(QuadraticScalar, DifferenceOfSquares) {
  EXPECT_EQ(q(1, 2) * q(1, -2), QuadraticScalar(-11));
}

TEST(QuadraticScalar, RadicandIsReducedToSquareFree) {
  EXPECT_EQ(QuadraticScalar::make(0, 1, 12), q(0, 2));
  EXPECT_EQ(QuadraticScalar::make(1, 1, 4), QuadraticScalar(3));
  EXPECT_EQ(QuadraticScalar::sqrt_of(Rational(27, 4)), QuadraticScalar::make(0, Rational(3, 2), 3));
}

TEST(QuadraticScalar, InverseAndSign) {
  QuadraticScalar x = q(2, 1);
  EXPECT_EQ(x * x.inverse(), QuadraticScalar(1));
  EXPECT_EQ(q(1, -1).sign(), -1);  // 1 - sqrt(3) < 0
  EXPECT_EQ(q(2, -1).sign(), 1);
  EXPECT_THROW(QuadraticScalar().inverse(), Error);
}

TEST(QuadraticScalar, MixedRadicandsAreRejected) {
  QuadraticScalar a = QuadraticScalar::make(0, 1, 2);
  QuadraticScalar b = QuadraticScalar::make(0, 1, 3);
  try {
    (void)(a + b);
    FAIL() << "expected MixedBackend";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::MixedBackend);
  }
  EXPECT_EQ(a + QuadraticScalar(1), QuadraticScalar::make(1, 1, 2));
}

TEST(QuadraticScalar, FieldAxiomsOnRandomElements) {
  std::mt19937 rng(proptest::kSeed);
  std::uniform_int_distribution<int> u(-9, 9), den(1, 5);
  auto draw = [&] { return QuadraticScalar::make(Rational(u(rng), den(rng)), Rational(u(rng), den(rng)), 3); };
  for (int trial = 0; trial < 200; ++trial) {
    QuadraticScalar a = draw(), b = draw(), c = draw();
    EXPECT_EQ(a * (b + c), a * b + a * c);
    EXPECT_EQ((a * b) * c, a * (b * c));
    EXPECT_EQ(a - a, QuadraticScalar());
    if (!b.is_zero()) EXPECT_EQ((a / b) * b, a);
    EXPECT_NEAR((a * b).to_double(), a.to_double() * b.to_double(), 1e-9 * (1 + std::fabs(a.to_double() * b.to_double())));
  }
}

TEST(Jet, ProductRule) {
  Jet p = Jet(2, 3) * Jet(5, -1);
  EXPECT_DOUBLE_EQ(p.value, 10);
  EXPECT_DOUBLE_EQ(p.deriv, 13);
}

TEST(Jet, DerivativeOfDerivativeExceedsOrder) {
  Jet x = Jet::variable(0.5);
  Jet d = derivative(x);
  EXPECT_DOUBLE_EQ(d.value, 1.0);
  try {
    (void)derivative(d);
    FAIL() << "expected JetOrderExceeded";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::JetOrderExceeded);
  }
}

TEST(Jet, DivisionByZeroThrows) { EXPECT_THROW(Jet(1.0) / Jet(0.0), Error); }

TEST(Jet, ExpMatchesFiniteDifference) {
  Jet e = eval_jet(parse_expr("2*exp(2*t)"), 0.0);
  EXPECT_NEAR(e.value, 2.0, 1e-15);
  double h = 1e-6;
  double fd = (2 * std::exp(2 * h) - 2 * std::exp(-2 * h)) / (2 * h);
  EXPECT_NEAR(e.deriv, 4.0, 1e-12);
  EXPECT_NEAR(e.deriv, fd, 1e-6);
}

TEST(Jet, MatchesFiniteDifferencesOnRandomPoints) {
  auto r = proptest::jet_vs_finite_differences(200);
  EXPECT_TRUE(r.ok()) << r.first_failure;
  EXPECT_LT(r.worst, 1e-6);
}

TEST(Expr, EvaluatesMetricCoefficient) {
  Jet v = eval_jet(parse_expr("3/2*exp(4*t)/sqrt(9+3*exp(6*t))"), 0.0);
  EXPECT_NEAR(v.value, std::sqrt(3.0) / 4.0, 1e-12);
}

TEST(Expr, TimeIsTheIdentity) {
  Jet v = eval_jet(parse_expr("t"), 5.0);
  EXPECT_DOUBLE_EQ(v.value, 5.0);
  EXPECT_DOUBLE_EQ(v.deriv, 1.0);
}

TEST(Expr, PrintParseRoundTrip) {
  for (const char* src : {"sqrt(9+3*exp(6*t))", "3/2*exp(4*t)/sqrt(9 + 3*exp(6*t))", "-(p1 - p2)^2",
                          "-1/3*(-3 + sqrt(9 + 3*exp(6*t)))*exp(-2*t)", "a/(b*c)", "a - (b - c)", "2^-1"}) {
    Expr e = parse_expr(src);
    EXPECT_TRUE(structurally_equal(parse_expr(print_expr(e)), e)) << src << " printed as " << print_expr(e);
  }
}

TEST(Expr, ParseErrorsCarryPositions) {
  for (const char* bad : {"", "1 +", "(p1", "p1 p2", "exp(", "3 $ 4"}) {
    try {
      (void)parse_expr(bad);
      ADD_FAILURE() << "parsed '" << bad << "'";
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::ParseError) << bad;
    }
  }
}

TEST(Expr, ExactEvaluation) {
  EXPECT_EQ(to_exact(parse_expr("sqrt(12)/2")), QuadraticScalar::make(0, 1, 3));
  EXPECT_EQ(to_exact(parse_expr("(1 + 2*sqrt(3))*(1 - 2*sqrt(3))")), QuadraticScalar(-11));
  EXPECT_THROW(to_exact(parse_expr("exp(t)")), Error);
}

TEST(DiffPoly, Commutativity) { EXPECT_TRUE((poly("p1*p4") - poly("p4*p1")).is_zero()); }

TEST(DiffPoly, Leibniz) { EXPECT_EQ(derivative(poly("p8*p7")), poly("p8'*p7 + p8*p7'")); }

TEST(DiffPoly, DerivativeOfConstant) { EXPECT_TRUE(derivative(poly("7/2")).is_zero()); }

TEST(DiffPoly, PrintsHighestDerivativeFirst) {
  EXPECT_EQ(poly("-2*sqrt(3)*p2 + p6'").str(), "p6' - 2*sqrt(3)*p2");
  EXPECT_EQ(poly("p10 + p2").str(), "p10 + p2");
}

TEST(DiffPoly, FactoredSquare) {
  EXPECT_EQ(factored_str(poly("(p1*p4 - p2*p3)^2")), "(p1*p4 - p2*p3)^2");
  EXPECT_EQ(factored_str(poly("-2*(p3*p8 - p4*p7)^2")), "-2*(p3*p8 - p4*p7)^2");
  EXPECT_EQ(factored_str(poly("p1 + p2")), "p2 + p1");
}

TEST(DiffPoly, SubstitutionExtendsToDerivatives) {
  std::map<Var, DiffPoly> rule = {{Var("p5"), poly("p6")}};
  EXPECT_EQ(poly("p5' + p5").substitute(rule), poly("p6' + p6"));
  std::map<Var, DiffPoly> specific = {{Var("p5"), poly("p6")}, {Var("p5", 1), poly("0")}};
  EXPECT_EQ(poly("p5' + p5").substitute(specific), poly("p6"));
}

TEST(DiffPoly, RingAxiomsAndLeibnizOnRandomPolynomials) {
  std::mt19937 rng(proptest::kSeed + 10);
  std::uniform_int_distribution<int> c(-4, 4), v(1, 4), e(0, 2), n(1, 4);
  auto draw = [&] {
    DiffPoly p;
    int terms = n(rng);
    for (int i = 0; i < terms; ++i) {
      DiffPoly t(static_cast<long>(c(rng)));
      for (int k = 0; k < 2; ++k) t *= DiffPoly(Var("f" + std::to_string(v(rng)), e(rng) % 2)).pow(e(rng));
      p += t;
    }
    return p;
  };
  for (int trial = 0; trial < 150; ++trial) {
    DiffPoly a = draw(), b = draw(), d = draw();
    EXPECT_EQ(a * (b + d), a * b + a * d);
    EXPECT_EQ(a * b, b * a);
    EXPECT_EQ(derivative(a * b), derivative(a) * b + a * derivative(b));
    std::map<Var, double> at;
    for (int i = 1; i <= 4; ++i)
      for (unsigned k = 0; k <= 2; ++k) at[Var("f" + std::to_string(i), k)] = 0.25 * i - 0.1 * k;
    EXPECT_NEAR((a * b).evaluate(at), a.evaluate(at) * b.evaluate(at), 1e-9 * (1 + std::fabs((a * b).evaluate(at))));
  }
}
