#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "stableforms/cases.hpp"
#include "stableforms/form_io.hpp"
#include "stableforms/hitchin.hpp"
#include "support/properties.hpp"

using namespace stableforms;

namespace {

DiffPoly poly(const std::string& s) { return to_diffpoly(parse_expr(s)); }
Form<DiffPoly> sform(const std::string& s) { return parse_form(s).symbolic(); }
Form<Jet> nform(const std::string& s, double t = 0.0) { return parse_form(s).at(t); }

const char* kFlatOmega = "e12 + e34 + e56";
const char* kFlatPsi = "e135 - e146 - e236 - e245";

}  // namespace

TEST(KMatrix, DecomposableFormGivesZero) {
  auto K = k_matrix(parse_form("e123").exact(), volume_form<QuadraticScalar>(1));
  EXPECT_EQ(K, Endo<QuadraticScalar>());
}

TEST(KMatrix, FirstColumnMatchesBruteForceOracle) {
  // Oracle: i_{e1} psi ^ psi expanded over all 5-forms, outside this library.
  auto K = k_matrix(sform("p1*e135 + p2*e146 + p3*e235 + p4*e246"), volume_form<DiffPoly>(1));
  EXPECT_EQ(K.at(1, 1), poly("-p1*p4 - p2*p3"));
  EXPECT_EQ(K.at(2, 1), poly("2*p1*p2"));
  for (int i = 3; i <= kDim; ++i) EXPECT_TRUE(K.at(i, 1).is_zero()) << i;
}

TEST(KMatrix, QuadraticHomogeneity) {
  auto psi = sform("p1*e135 + p2*e146 + p3*e235 + p4*e246 + p5*e123");
  auto Omega = volume_form<DiffPoly>(1);
  DiffPoly c = poly("c");
  EXPECT_EQ(k_matrix(c * psi, Omega), (c * c) * k_matrix(psi, Omega));
}

TEST(KMatrix, ZeroVolumeThrows) {
  try {
    (void)k_matrix(parse_form("e135").exact(), Form<QuadraticScalar>(6));
    FAIL() << "expected ZeroVolume";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ZeroVolume);
  }
}

TEST(Lambda, GenericFourTermAnsatz) {
  EXPECT_EQ(lambda(sform("p1*e135 + p2*e146 + p3*e235 + p4*e246"), volume_form<DiffPoly>(1)),
            poly("(p1*p4 - p2*p3)^2"));
}

TEST(Lambda, EightTermAnsatz) {
  EXPECT_EQ(lambda(sform(case_fixture("b1-onezero").psi), volume_form<DiffPoly>(1)),
            poly("(p1*p8 + p2*p7 - p3*p6 + p4*p5)^2"));
}

TEST(Lambda, FlatFormOracleValue) {
  // Oracle: brute-force K and trace from the definitions gives -4.
  EXPECT_EQ(lambda(parse_form(kFlatPsi).exact(), volume_form<QuadraticScalar>(1)), QuadraticScalar(-4));
}

TEST(Lambda, IndependentOfOrientationSign) {
  auto psi = sform(case_fixture("b1-diagonal").psi);
  EXPECT_EQ(lambda(psi, volume_form<DiffPoly>(1)), lambda(psi, volume_form<DiffPoly>(-1)));
}

TEST(Lambda, EquivarianceUnderRationalMaps) {
  auto r = proptest::lambda_equivariance(100);
  EXPECT_TRUE(r.ok()) << r.first_failure;
}

TEST(Lambda, QuarticHomogeneity) {
  auto r = proptest::lambda_homogeneity(100);
  EXPECT_TRUE(r.ok()) << r.first_failure;
}

TEST(AlmostComplex, FlatFormSquaresToMinusIdentity) {
  Endo<Jet> J = j_endo(nform(kFlatPsi), volume_form<Jet>(1));
  EXPECT_LT(proptest::max_abs(J * J + Endo<Jet>::identity()), 1e-10);
}

TEST(AlmostComplex, RandomStableFormsSquareToMinusIdentity) {
  auto r = proptest::j_squared(100);
  EXPECT_TRUE(r.ok()) << r.first_failure;
}

TEST(AlmostComplex, ScaleInvariant) {
  Form<Jet> psi = nform("e135 - e146 - e236 - e245 + 0.3*e123");
  Endo<Jet> J = j_endo(psi, volume_form<Jet>(1));
  Endo<Jet> J3 = j_endo(Jet(3.0) * psi, volume_form<Jet>(1));
  EXPECT_LT(proptest::max_abs(J - J3), 1e-12);
}

TEST(AlmostComplex, NaturalUnderOrientationPreservingMaps) {
  std::mt19937 rng(proptest::kSeed + 30);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const Form<Jet> Omega = volume_form<Jet>(1);
  int trials = 0;
  while (trials < 100) {
    Endo<Jet> A;
    for (int i = 1; i <= kDim; ++i)
      for (int j = 1; j <= kDim; ++j) A.at(i, j) = Jet(u(rng) + (i == j ? 2.0 : 0.0), 0.0);
    if (A.det().value <= 0.1) continue;
    Form<Jet> psi = proptest::random_stable_psi(rng);
    ++trials;
    // J_{A^* psi} = A^{-1} J_psi A, checked as A J_{A^* psi} = J_psi A.
    Endo<Jet> lhs = A * j_endo(pullback(A, psi), Omega);
    Endo<Jet> rhs = j_endo(psi, Omega) * A;
    EXPECT_LT(proptest::max_abs(lhs - rhs), 1e-8 * (1 + proptest::max_abs(rhs)));
  }
}

TEST(AlmostComplex, NotStableThrows) {
  try {
    (void)j_endo(nform("e135 + e146 + e235 + 2*e246"), volume_form<Jet>(1));
    FAIL() << "expected NotStable";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NotStable);
  }
}

TEST(PsiMinus, OneSlotAndTripleSlotAgree) {
  auto r = proptest::psi_minus_slots(100);
  EXPECT_TRUE(r.ok()) << r.first_failure;
}

TEST(PsiMinus, HasTheSameLambda) {
  auto r = proptest::lambda_of_psi_minus(100);
  EXPECT_TRUE(r.ok()) << r.first_failure;
}

TEST(PsiMinus, ScaledNumeratorMatchesNumericForm) {
  std::mt19937 rng(proptest::kSeed + 31);
  const Form<Jet> Omega = volume_form<Jet>(1);
  for (int trial = 0; trial < 100; ++trial) {
    Form<Jet> psi = proptest::random_stable_psi(rng);
    double root = std::sqrt(-lambda(psi, Omega).value);
    Form<Jet> scaled = Jet(1.0 / root) * psi_minus_scaled(psi, Omega).numerator;
    EXPECT_LT(proptest::max_abs(scaled - psi_minus(psi, Omega)), 1e-10);
  }
}

TEST(PsiMinus, C3CoefficientVanishesAtP1P4Zero) {
  auto psi = substitute_form(sform(case_fixture("c3").psi), {{"p1", "0"}, {"p4", "0"}});
  auto num = psi_minus_scaled(psi, volume_form<DiffPoly>(1)).numerator;
  EXPECT_TRUE(num.coeff(mask_of({2, 3, 6})).is_zero());
  EXPECT_TRUE(num.coeff(mask_of({4, 5, 6})).is_zero());
}

TEST(Metric, FlatPairGivesIdentity) {
  Endo<Jet> g = induced_metric(nform(kFlatOmega), nform(kFlatPsi), volume_form<Jet>(1));
  EXPECT_LT(proptest::max_abs(g - Endo<Jet>::identity()), 1e-12);
}

TEST(Metric, UnchangedByScalingPsi) {
  Form<Jet> omega = nform(kFlatOmega), psi = nform(kFlatPsi);
  Endo<Jet> g = induced_metric(omega, psi, volume_form<Jet>(1));
  Endo<Jet> g2 = induced_metric(omega, Jet(2.5) * psi, volume_form<Jet>(1));
  EXPECT_LT(proptest::max_abs(g - g2), 1e-12);
}

TEST(Metric, ExplicitSolutionAtTimeZero) {
  CaseFixture fx = case_fixture("a1");
  Endo<Jet> g = induced_metric(nform(fx.omega), nform(fx.psi), volume_form<Jet>(fx.orientation));
  double expected[6][6] = {{std::sqrt(3.0) / 4, 0, 0, 0, 0, 0},
                           {0, std::sqrt(3.0) / 4, 0, 0, 0, 0},
                           {0, 0, 1 + 2 / std::sqrt(3.0), 0, 1, -1},
                           {0, 0, 0, 1 + 2 / std::sqrt(3.0), 1, 1},
                           {0, 0, 1, 1, 2, 0},
                           {0, 0, -1, 1, 0, 2}};
  for (int i = 1; i <= kDim; ++i)
    for (int j = 1; j <= kDim; ++j) EXPECT_NEAR(g.at(i, j).value, expected[i - 1][j - 1], 1e-9) << i << "," << j;
}
