#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "stableforms/coframe.hpp"
#include "stableforms/expr.hpp"
#include "stableforms/hitchin.hpp"
#include "stableforms/invariant.hpp"

namespace stableforms::proptest {

struct PropertyResult {
  int trials = 0;
  int failures = 0;
  double worst = 0.0;
  std::string first_failure;

  bool ok() const { return trials >= 100 && failures == 0; }
  void fail(const std::string& what) {
    if (failures++ == 0) first_failure = what;
  }
};

inline constexpr unsigned kSeed = 20240613;

inline Form<QuadraticScalar> random_exact_form(std::mt19937& rng, int k, int lo = -3, int hi = 3) {
  std::uniform_int_distribution<int> u(lo, hi);
  Form<QuadraticScalar> f(k);
  for (Mask m : masks_of_degree(k)) f.add(m, QuadraticScalar(static_cast<long>(u(rng))));
  return f;
}

inline Form<Jet> random_numeric_form(std::mt19937& rng, int k) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Form<Jet> f(k);
  for (Mask m : masks_of_degree(k)) f.add(m, Jet(u(rng), 0.0));
  return f;
}

/// A random 3-form with lambda < -0.05, by rejection.
inline Form<Jet> random_stable_psi(std::mt19937& rng) {
  const Form<Jet> Omega = volume_form<Jet>(1);
  for (;;) {
    Form<Jet> psi = random_numeric_form(rng, 3);
    if (lambda(psi, Omega).value < -0.05) return psi;
  }
}

inline double max_abs(const Endo<Jet>& a) {
  double m = 0.0;
  for (int i = 1; i <= kDim; ++i)
    for (int j = 1; j <= kDim; ++j) m = std::max(m, std::fabs(a.at(i, j).value));
  return m;
}

inline double max_abs(const Form<Jet>& a) { return sup_norm(a); }

/// d(d(a)) = 0 for random forms with symbolic coefficients on every built-in
/// preset; on coframes with isotropy the forms are drawn from the invariant
/// subspace, where d is defined.
inline PropertyResult dd_zero(int trials_per_preset = 30) {
  PropertyResult r;
  std::mt19937 rng(kSeed);
  std::uniform_int_distribution<int> coef(-3, 3), deg(0, 4), sym(1, 4);
  for (const auto& name : builtin_preset_names()) {
    Coframe cf = builtin_preset(name);
    for (int trial = 0; trial < trials_per_preset; ++trial) {
      int k = deg(rng);
      std::vector<Form<QuadraticScalar>> basis;
      if (cf.isotropy().empty()) {
        for (Mask m : masks_of_degree(k)) basis.push_back(Form<QuadraticScalar>::basis(m));
      } else {
        basis = invariant_forms(cf.isotropy(), k);
      }
      Form<DiffPoly> a(k);
      for (const auto& b : basis) {
        DiffPoly c = DiffPoly(static_cast<long>(coef(rng))) * DiffPoly::symbol("f" + std::to_string(sym(rng)));
        for (const auto& [m, v] : b.terms()) a.add(m, c.scaled(v));
      }
      ++r.trials;
      Form<DiffPoly> dda = d(cf, d(cf, a));
      if (!dda.is_zero()) r.fail(name + ": d(d(" + a.str() + ")) = " + dda.str());
    }
  }
  return r;
}

/// lambda(A^* psi) = det(A)^2 lambda(psi) exactly, for rational A.
inline PropertyResult lambda_equivariance(int trials = 100) {
  PropertyResult r;
  std::mt19937 rng(kSeed + 1);
  std::uniform_int_distribution<int> num(-3, 3), den(1, 3);
  const auto Omega = volume_form<QuadraticScalar>(1);
  while (r.trials < trials) {
    Endo<QuadraticScalar> A;
    for (int i = 1; i <= kDim; ++i)
      for (int j = 1; j <= kDim; ++j) A.at(i, j) = QuadraticScalar(Rational(num(rng), den(rng)));
    QuadraticScalar det = A.det();
    if (det.is_zero()) continue;
    auto psi = random_exact_form(rng, 3, -2, 2);
    ++r.trials;
    auto lhs = lambda(pullback(A, psi), Omega);
    auto rhs = det * det * lambda(psi, Omega);
    if (!(lhs == rhs)) r.fail("lambda(A*psi) = " + lhs.str() + ", det(A)^2 lambda(psi) = " + rhs.str());
  }
  return r;
}

/// lambda(c psi) = c^4 lambda(psi) exactly.
inline PropertyResult lambda_homogeneity(int trials = 100) {
  PropertyResult r;
  std::mt19937 rng(kSeed + 2);
  std::uniform_int_distribution<int> num(-5, 5), den(1, 4);
  const auto Omega = volume_form<QuadraticScalar>(1);
  for (; r.trials < trials; ++r.trials) {
    QuadraticScalar c(Rational(num(rng), den(rng)));
    auto psi = random_exact_form(rng, 3);
    auto lhs = lambda(c * psi, Omega);
    auto rhs = c * c * c * c * lambda(psi, Omega);
    if (!(lhs == rhs)) r.fail("lambda(c psi) = " + lhs.str() + " vs " + rhs.str());
  }
  return r;
}

/// J^2 = -Id within 1e-10 for random stable psi.
inline PropertyResult j_squared(int trials = 100) {
  PropertyResult r;
  std::mt19937 rng(kSeed + 3);
  const Form<Jet> Omega = volume_form<Jet>(1);
  for (; r.trials < trials; ++r.trials) {
    Endo<Jet> J = j_endo(random_stable_psi(rng), Omega);
    double err = max_abs(J * J + Endo<Jet>::identity());
    r.worst = std::max(r.worst, err);
    if (err >= 1e-10) r.fail("|J^2 + Id| = " + std::to_string(err));
  }
  return r;
}

/// lambda(psi_-) = lambda(psi_+) within 1e-8 relative.
inline PropertyResult lambda_of_psi_minus(int trials = 100) {
  PropertyResult r;
  std::mt19937 rng(kSeed + 4);
  const Form<Jet> Omega = volume_form<Jet>(1);
  for (; r.trials < trials; ++r.trials) {
    Form<Jet> psi = random_stable_psi(rng);
    double a = lambda(psi, Omega).value;
    double b = lambda(psi_minus(psi, Omega), Omega).value;
    double err = std::fabs(a - b) / std::fabs(a);
    r.worst = std::max(r.worst, err);
    if (err >= 1e-8) r.fail("relative lambda mismatch " + std::to_string(err));
  }
  return r;
}

/// -psi(J., ., .) and psi(J., J., J.) agree within 1e-10.
inline PropertyResult psi_minus_slots(int trials = 100) {
  PropertyResult r;
  std::mt19937 rng(kSeed + 5);
  const Form<Jet> Omega = volume_form<Jet>(1);
  for (; r.trials < trials; ++r.trials) {
    Form<Jet> psi = random_stable_psi(rng);
    double err = max_abs(psi_minus(psi, Omega) - psi_minus_triple(psi, Omega));
    r.worst = std::max(r.worst, err);
    if (err >= 1e-10) r.fail("one-slot vs triple-slot mismatch " + std::to_string(err));
  }
  return r;
}

/// Jet derivatives against central finite differences within 1e-6.
inline PropertyResult jet_vs_finite_differences(int trials = 100) {
  static const char* exprs[] = {"2*exp(2*t)", "3/2*exp(4*t)/sqrt(9+3*exp(6*t))", "t^3 - 2*t",
                                "sqrt(1+t^2)*exp(-t)", "(t+2)/(t^2+1)", "exp(2*t)/(3*sqrt(1+exp(6*t)))"};
  PropertyResult r;
  std::mt19937 rng(kSeed + 6);
  std::uniform_real_distribution<double> ut(-1.0, 1.0);
  std::uniform_int_distribution<int> pick(0, std::size(exprs) - 1);
  const double h = 1e-6;
  for (; r.trials < trials; ++r.trials) {
    const char* src = exprs[pick(rng)];
    Expr e = parse_expr(src);
    double t = ut(rng);
    double fd = (eval_jet(e, t + h).value - eval_jet(e, t - h).value) / (2 * h);
    double err = std::fabs(eval_jet(e, t).deriv - fd);
    r.worst = std::max(r.worst, err);
    if (err >= 1e-6) r.fail(std::string(src) + " at t = " + std::to_string(t));
  }
  return r;
}

}  // namespace stableforms::proptest
