#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "stableforms/error.hpp"
#include "stableforms/form.hpp"

namespace stableforms {

/// Hitchin's K_psi in the trivialization by Omega: column j is the vector
/// w_j with i_{w_j} Omega = i_{e_j} psi ^ psi.
template <class S>
Endo<S> k_matrix(const Form<S>& psi, const Form<S>& Omega) {
  if (psi.degree() != 3) throw Error(ErrorKind::DegreeMismatch, "k_matrix needs a 3-form");
  if (Omega.degree() != kDim) throw Error(ErrorKind::DegreeMismatch, "volume must be a 6-form");
  S vol = Omega.coeff(kTopMask);
  if (ScalarTraits<S>::is_zero(vol)) throw Error(ErrorKind::ZeroVolume, "volume form is zero");
  Endo<S> K;
  for (int j = 1; j <= kDim; ++j) {
    Form<S> alpha = wedge(contract(basis_vector<S>(j), psi), psi);
    for (int i = 1; i <= kDim; ++i) {
      S a = alpha.coeff(static_cast<Mask>(kTopMask & ~(1u << (i - 1))));
      if (ScalarTraits<S>::is_zero(a)) continue;
      S w = a / vol;
      K.at(i, j) = (i % 2 == 1) ? w : -w;
    }
  }
  return K;
}

/// lambda(psi) = tr(K^2)/6.
template <class S>
S lambda(const Form<S>& psi, const Form<S>& Omega) {
  Endo<S> K = k_matrix(psi, Omega);
  return (K * K).trace() / S(6);
}

/// omega(u, v) for a 2-form, with e^{ij}(e_i, e_j) = 1.
template <class S>
S pair(const Form<S>& omega, const Vector<S>& u, const Vector<S>& v) {
  return evaluate(omega, {u, v});
}

// ---------------------------------------------------------------------------
// Numeric constructions (Jet backend). They require lambda < 0.

struct AlmostComplex {
  Jet lambda;
  Endo<Jet> K;
  Endo<Jet> J;
};

inline AlmostComplex almost_complex(const Form<Jet>& psi, const Form<Jet>& Omega) {
  AlmostComplex out;
  out.K = k_matrix(psi, Omega);
  out.lambda = (out.K * out.K).trace() / Jet(6.0);
  if (!(out.lambda.value < 0.0)) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", out.lambda.value);
    throw Error(ErrorKind::NotStable, std::string("lambda(psi) = ") + buf + " is not negative");
  }
  Jet s = Jet(-1.0) / sqrt(-out.lambda);
  out.J = s * out.K;
  return out;
}

inline Endo<Jet> j_endo(const Form<Jet>& psi, const Form<Jet>& Omega) { return almost_complex(psi, Omega).J; }

/// psi_-(u, v, w) = -psi(Ju, v, w).
inline Form<Jet> psi_minus_from(const Form<Jet>& psi, const Endo<Jet>& J) {
  Form<Jet> out(3);
  for (Mask m : masks_of_degree(3)) {
    auto idx = mask_indices(m);
    Jet v = evaluate(psi, {J.column(idx[0]), basis_vector<Jet>(idx[1]), basis_vector<Jet>(idx[2])});
    out.add(m, -v);
  }
  return out;
}

/// psi_-(u, v, w) = psi(Ju, Jv, Jw).
inline Form<Jet> psi_minus_triple_from(const Form<Jet>& psi, const Endo<Jet>& J) {
  Form<Jet> out(3);
  for (Mask m : masks_of_degree(3)) {
    auto idx = mask_indices(m);
    out.add(m, evaluate(psi, {J.column(idx[0]), J.column(idx[1]), J.column(idx[2])}));
  }
  return out;
}

inline Form<Jet> psi_minus(const Form<Jet>& psi, const Form<Jet>& Omega) {
  return psi_minus_from(psi, j_endo(psi, Omega));
}

inline Form<Jet> psi_minus_triple(const Form<Jet>& psi, const Form<Jet>& Omega) {
  return psi_minus_triple_from(psi, j_endo(psi, Omega));
}

/// g_ij = omega(e_i, J e_j); symmetry is not imposed.
inline Endo<Jet> metric_from(const Form<Jet>& omega, const Endo<Jet>& J) {
  Endo<Jet> g;
  for (int i = 1; i <= kDim; ++i)
    for (int j = 1; j <= kDim; ++j) g.at(i, j) = pair(omega, basis_vector<Jet>(i), J.column(j));
  return g;
}

inline Endo<Jet> induced_metric(const Form<Jet>& omega, const Form<Jet>& psi, const Form<Jet>& Omega) {
  if (omega.degree() != 2) throw Error(ErrorKind::DegreeMismatch, "omega must be a 2-form");
  return metric_from(omega, j_endo(psi, Omega));
}

inline double max_asymmetry(const Endo<Jet>& g) {
  double m = 0.0;
  for (int i = 1; i <= kDim; ++i)
    for (int j = i + 1; j <= kDim; ++j) m = std::max(m, std::fabs(g.at(i, j).value - g.at(j, i).value));
  return m;
}

/// Smallest leading principal minor of the value part.
inline double min_leading_minor(const Endo<Jet>& g) {
  Endo<Jet> v = g.map([](const Jet& x) { return Jet(x.value, 0.0); });
  double m = INFINITY;
  for (int k = 1; k <= kDim; ++k) m = std::min(m, v.leading_minor(k).value);
  return m;
}

// ---------------------------------------------------------------------------
// Symbolic constructions: value = numerator * (-lambda)^(-scale_exp/2).

template <class T>
struct Scaled {
  T numerator;
  unsigned scale_exp = 0;
};

template <class S>
using ScaledForm = Scaled<Form<S>>;
template <class S>
using ScaledEndo = Scaled<Endo<S>>;
template <class S>
using ScaledMatrix = Scaled<Endo<S>>;

/// J = -K / sqrt(-lambda). The certificate lambda < 0 is assumed.
template <class S>
ScaledEndo<S> j_scaled(const Form<S>& psi, const Form<S>& Omega) {
  return {S(-1) * k_matrix(psi, Omega), 1};
}

/// psi_- numerator: psi(K e_a, e_b, e_c), since -psi(J., ., .) with
/// J = -K/sqrt(-lambda).
template <class S>
ScaledForm<S> psi_minus_scaled_from(const Form<S>& psi, const Endo<S>& K) {
  Form<S> out(3);
  for (Mask m : masks_of_degree(3)) {
    auto idx = mask_indices(m);
    out.add(m, evaluate(psi, {K.column(idx[0]), basis_vector<S>(idx[1]), basis_vector<S>(idx[2])}));
  }
  return {out, 1};
}

template <class S>
ScaledForm<S> psi_minus_scaled(const Form<S>& psi, const Form<S>& Omega) {
  return psi_minus_scaled_from(psi, k_matrix(psi, Omega));
}

/// g numerator: -omega(e_i, K e_j).
template <class S>
ScaledMatrix<S> metric_scaled_from(const Form<S>& omega, const Endo<S>& K) {
  Endo<S> g;
  for (int i = 1; i <= kDim; ++i)
    for (int j = 1; j <= kDim; ++j) g.at(i, j) = -pair(omega, basis_vector<S>(i), K.column(j));
  return {g, 1};
}

template <class S>
ScaledMatrix<S> metric_scaled(const Form<S>& omega, const Form<S>& psi, const Form<S>& Omega) {
  return metric_scaled_from(omega, k_matrix(psi, Omega));
}

}  // namespace stableforms
