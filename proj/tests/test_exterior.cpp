#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "stableforms/form.hpp"
#include "stableforms/form_io.hpp"
#include "stableforms/quadratic.hpp"
#include "support/properties.hpp"

using namespace stableforms;

namespace {

using XForm = Form<QuadraticScalar>;

XForm form(const std::string& s) { return parse_form(s).exact(); }

int permutation_sign(const std::vector<int>& p) {
  int inv = 0;
  for (std::size_t i = 0; i < p.size(); ++i)
    for (std::size_t j = i + 1; j < p.size(); ++j) inv += p[i] > p[j];
  return inv % 2 ? -1 : 1;
}

/// Dense oracle: (a ^ b)(e_I) = 1/(k! l!) sum over permutations of I of
/// sign * a(first k) * b(last l), with a and b evaluated on basis vectors.
QuadraticScalar wedge_oracle(const XForm& a, const XForm& b, Mask target) {
  std::vector<int> idx = mask_indices(target);
  int k = a.degree(), l = b.degree();
  std::vector<int> perm(idx.size());
  std::iota(perm.begin(), perm.end(), 0);
  QuadraticScalar acc;
  do {
    std::vector<Vector<QuadraticScalar>> va, vb;
    for (int i = 0; i < k; ++i) va.push_back(basis_vector<QuadraticScalar>(idx[perm[i]]));
    for (int i = 0; i < l; ++i) vb.push_back(basis_vector<QuadraticScalar>(idx[perm[k + i]]));
    QuadraticScalar term = evaluate(a, va) * evaluate(b, vb);
    acc += permutation_sign(perm) > 0 ? term : -term;
  } while (std::next_permutation(perm.begin(), perm.end()));
  long fact = 1;
  for (int i = 2; i <= k; ++i) fact *= i;
  for (int i = 2; i <= l; ++i) fact *= i;
  return acc / QuadraticScalar(fact);
}

}  // namespace

TEST(Wedge, SortedIndices) { EXPECT_EQ(wedge(form("e13"), form("e5")), form("e135")); }

TEST(Wedge, OneTransposition) { EXPECT_EQ(wedge(form("e2"), form("e1")), form("-e12")); }

TEST(Wedge, Bilinearity) { EXPECT_EQ(wedge(form("2*e12 + 3*e34"), form("e56")), form("2*e1256 + 3*e3456")); }

TEST(Wedge, DegreeOverflowThrows) {
  try {
    (void)wedge(form("e1234"), form("e56 + e12"));
    (void)wedge(form("e1234"), form("e123"));
    FAIL() << "expected DegreeOverflow";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DegreeOverflow);
  }
}

TEST(Wedge, MatchesDenseOracleOnRandomForms) {
  std::mt19937 rng(proptest::kSeed + 20);
  std::uniform_int_distribution<int> deg(1, 3);
  for (int trial = 0; trial < 100; ++trial) {
    int k = deg(rng), l = std::min(deg(rng), kDim - k);
    XForm a = proptest::random_exact_form(rng, k), b = proptest::random_exact_form(rng, l);
    XForm w = wedge(a, b);
    for (Mask m : masks_of_degree(k + l)) ASSERT_EQ(w.coeff(m), wedge_oracle(a, b, m)) << "trial " << trial;
  }
}

TEST(Wedge, GradedCommutativityAndAssociativity) {
  std::mt19937 rng(proptest::kSeed + 21);
  std::uniform_int_distribution<int> deg(0, 2);
  for (int trial = 0; trial < 100; ++trial) {
    int k = deg(rng), l = deg(rng), m = deg(rng);
    XForm a = proptest::random_exact_form(rng, k), b = proptest::random_exact_form(rng, l),
          c = proptest::random_exact_form(rng, m);
    XForm ab = wedge(a, b), ba = wedge(b, a);
    EXPECT_EQ(ab, (k * l) % 2 ? -ba : ba);
    EXPECT_EQ(wedge(ab, c), wedge(a, wedge(b, c)));
  }
}

TEST(Contract, LeadingIndex) {
  EXPECT_EQ(contract(basis_vector<QuadraticScalar>(1), form("e123456")), form("e23456"));
}

TEST(Contract, OneTransposition) { EXPECT_EQ(contract(basis_vector<QuadraticScalar>(3), form("e135")), form("-e15")); }

TEST(Contract, AbsentIndex) { EXPECT_TRUE(contract(basis_vector<QuadraticScalar>(5), form("e12")).is_zero()); }

TEST(Contract, IsAnAntiderivation) {
  std::mt19937 rng(proptest::kSeed + 22);
  std::uniform_int_distribution<int> deg(1, 3), comp(-2, 2);
  for (int trial = 0; trial < 100; ++trial) {
    int k = deg(rng), l = std::min(deg(rng), kDim - k);
    XForm a = proptest::random_exact_form(rng, k), b = proptest::random_exact_form(rng, l);
    Vector<QuadraticScalar> v;
    for (auto& x : v) x = QuadraticScalar(static_cast<long>(comp(rng)));
    XForm lhs = contract(v, wedge(a, b));
    XForm rhs = wedge(contract(v, a), b);
    XForm second = wedge(a, contract(v, b));
    rhs += k % 2 ? -second : second;
    EXPECT_EQ(lhs, rhs);
  }
}

TEST(Pullback, Identity) {
  XForm a = form("3*e135 - e246 + e123");
  EXPECT_EQ(pullback(Endo<QuadraticScalar>::identity(), a), a);
}

TEST(Pullback, Scaling) {
  Endo<QuadraticScalar> A = QuadraticScalar(5) * Endo<QuadraticScalar>::identity();
  EXPECT_EQ(pullback(A, form("e123")), form("125*e123"));
}

TEST(Pullback, SwapReversesOrientation) {
  Endo<QuadraticScalar> A;
  A.at(1, 2) = QuadraticScalar(1);
  A.at(2, 1) = QuadraticScalar(1);
  for (int i = 3; i <= kDim; ++i) A.at(i, i) = QuadraticScalar(1);
  EXPECT_EQ(pullback(A, form("e12")), form("-e12"));
}

TEST(Pullback, TopFormScalesByDeterminant) {
  std::mt19937 rng(proptest::kSeed + 23);
  std::uniform_int_distribution<int> u(-3, 3);
  for (int trial = 0; trial < 100; ++trial) {
    Endo<QuadraticScalar> A;
    for (int i = 1; i <= kDim; ++i)
      for (int j = 1; j <= kDim; ++j) A.at(i, j) = QuadraticScalar(static_cast<long>(u(rng)));
    EXPECT_EQ(pullback(A, form("e123456")).coeff(kTopMask), A.det());
  }
}

TEST(TopCoeff, Examples) {
  EXPECT_EQ(top_coeff(form("5*e123456"), volume_form<QuadraticScalar>(1)), QuadraticScalar(5));
  EXPECT_EQ(top_coeff(form("e123456"), volume_form<QuadraticScalar>(-1)), QuadraticScalar(-1));
  EXPECT_EQ(top_coeff(XForm(6), volume_form<QuadraticScalar>(1)), QuadraticScalar(0));
  try {
    (void)top_coeff(form("e123456"), XForm(6));
    FAIL() << "expected ZeroVolume";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ZeroVolume);
  }
}

TEST(FormIO, ParsesUnsortedIndicesAndGroups) {
  EXPECT_EQ(form("e21"), form("-e12"));
  EXPECT_EQ(form("-sqrt(3)*(e23 + e45)").coeff(mask_of({4, 5})), QuadraticScalar::make(0, -1, 3));
  EXPECT_EQ(parse_form_json(nlohmann::json::parse(R"({"135": "p1", "641": "2"})")).symbolic(),
            parse_form("p1*e135 - 2*e146").symbolic());
}

TEST(FormIO, RejectsMixedDegrees) {
  try {
    (void)parse_form("e12 + e3");
    FAIL() << "expected DegreeMismatch";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DegreeMismatch);
  }
}

TEST(FormIO, RepeatedIndexIsZero) { EXPECT_EQ(form("e112 + e34"), form("e34")); }
