#pragma once

#include <cmath>
#include <concepts>
#include <cstdio>
#include <string>

#include "stableforms/diffpoly.hpp"
#include "stableforms/jet.hpp"
#include "stableforms/quadratic.hpp"

namespace stableforms {

/// Rendering of one coefficient in a sum: sign pulled out, magnitude text,
/// and whether the magnitude is exactly one (so "1*e12" prints as "e12").
struct CoeffText {
  bool negative = false;
  std::string text;
  bool unit = false;
  bool compound = false;  // needs parentheses before "*e..."
};

template <class S>
struct ScalarTraits;

template <>
struct ScalarTraits<QuadraticScalar> {
  static constexpr const char* name = "exact";
  static QuadraticScalar from_exact(const QuadraticScalar& q) { return q; }
  static bool is_zero(const QuadraticScalar& x) { return x.is_zero(); }
  static QuadraticScalar derivative(const QuadraticScalar&) { return {}; }
  static double magnitude(const QuadraticScalar& x) { return std::fabs(x.to_double()); }
  static CoeffText text(const QuadraticScalar& x) {
    CoeffText out;
    QuadraticScalar v = x;
    if (x.sign() < 0 && (x.is_rational() || x.rational_part() == 0)) {
      out.negative = true;
      v = -x;
    }
    out.unit = v == QuadraticScalar(1);
    out.text = v.str();
    return out;
  }
};

template <>
struct ScalarTraits<DiffPoly> {
  static constexpr const char* name = "symbolic";
  static DiffPoly from_exact(const QuadraticScalar& q) { return DiffPoly(q); }
  static bool is_zero(const DiffPoly& x) { return x.is_zero(); }
  static DiffPoly derivative(const DiffPoly& x) { return x.derivative(); }
  static CoeffText text(const DiffPoly& x) {
    CoeffText out;
    DiffPoly v = x;
    if (x.terms().size() == 1) {
      const QuadraticScalar& c = x.terms()[0].coeff;
      if (c.sign() < 0 && (c.is_rational() || c.rational_part() == 0)) {
        out.negative = true;
        v = -x;
      }
    }
    out.unit = v == DiffPoly(1);
    out.text = v.str();
    out.compound = v.terms().size() > 1;
    return out;
  }
};

template <>
struct ScalarTraits<Jet> {
  static constexpr const char* name = "numeric";
  static Jet from_exact(const QuadraticScalar& q) { return Jet(q.to_double(), 0.0); }
  static bool is_zero(const Jet& x) { return x.is_zero(); }
  static Jet derivative(const Jet& x) { return stableforms::derivative(x); }
  static double magnitude(const Jet& x) { return std::fabs(x.value); }
  static CoeffText text(const Jet& x) {
    CoeffText out;
    double v = x.value;
    if (v < 0) {
      out.negative = true;
      v = -v;
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out.text = buf;
    out.unit = v == 1.0;
    return out;
  }
};

template <class S>
concept Scalar = requires(S a, S b) {
  { a + b } -> std::convertible_to<S>;
  { a - b } -> std::convertible_to<S>;
  { a * b } -> std::convertible_to<S>;
  { -a } -> std::convertible_to<S>;
  { a == b } -> std::convertible_to<bool>;
  { ScalarTraits<S>::is_zero(a) } -> std::convertible_to<bool>;
  { ScalarTraits<S>::derivative(a) } -> std::convertible_to<S>;
};

}  // namespace stableforms
