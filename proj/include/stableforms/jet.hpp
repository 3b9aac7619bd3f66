#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

#include "stableforms/error.hpp"

namespace stableforms {

/// First-order jet (value, d/dt value) of a smooth function at a point.
///
/// `order` counts how many derivative levels are still known. Jets produced
/// by evaluation carry order 1; taking `derivative` shifts the derivative
/// into the value slot and drops the order to 0, after which a further
/// derivative is an error.
struct Jet {
  double value = 0.0;
  double deriv = 0.0;
  int order = 1;

  Jet() = default;
  Jet(double v) : value(v) {}  // NOLINT: constants promote to jets
  Jet(double v, double d, int ord = 1) : value(v), deriv(d), order(ord) {}

  static Jet variable(double t) { return {t, 1.0, 1}; }

  Jet operator-() const { return {-value, -deriv, order}; }

  Jet& operator+=(const Jet& o) {
    value += o.value;
    deriv += o.deriv;
    order = std::min(order, o.order);
    return *this;
  }
  Jet& operator-=(const Jet& o) { return *this += -o; }
  Jet& operator*=(const Jet& o) {
    deriv = value * o.deriv + deriv * o.value;
    value *= o.value;
    order = std::min(order, o.order);
    return *this;
  }
  Jet& operator/=(const Jet& o) {
    if (o.value == 0.0) throw Error(ErrorKind::DivisionByZero, "jet division by zero");
    double v = value / o.value;
    deriv = (deriv - v * o.deriv) / o.value;
    value = v;
    order = std::min(order, o.order);
    return *this;
  }

  friend Jet operator+(Jet a, const Jet& b) { return a += b; }
  friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
  friend Jet operator*(Jet a, const Jet& b) { return a *= b; }
  friend Jet operator/(Jet a, const Jet& b) { return a /= b; }

  friend bool operator==(const Jet& a, const Jet& b) { return a.value == b.value && a.deriv == b.deriv; }

  bool is_zero() const { return value == 0.0 && deriv == 0.0; }

  std::string str() const {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
  }

  friend std::ostream& operator<<(std::ostream& os, const Jet& j) {
    return os << "Jet(" << j.value << ", " << j.deriv << ")";
  }
};

inline Jet exp(const Jet& x) {
  double e = std::exp(x.value);
  return {e, e * x.deriv, x.order};
}

inline Jet sqrt(const Jet& x) {
  if (x.value < 0.0) throw Error(ErrorKind::EvalError, "sqrt of negative value");
  if (x.value == 0.0) {
    if (x.deriv != 0.0) throw Error(ErrorKind::EvalError, "sqrt is not differentiable at 0");
    return {0.0, 0.0, x.order};
  }
  double s = std::sqrt(x.value);
  return {s, x.deriv / (2.0 * s), x.order};
}

inline Jet pow(const Jet& x, int n) {
  if (n == 0) return {1.0, 0.0, x.order};
  if (x.value == 0.0 && n < 0) throw Error(ErrorKind::DivisionByZero, "negative power of zero");
  double p = std::pow(x.value, n);
  double dp = n * std::pow(x.value, n - 1) * x.deriv;
  return {p, dp, x.order};
}

/// d/dt of a jet. Valid once on an evaluated jet; the derivative slot of the
/// result is unknown and reported as 0.
inline Jet derivative(const Jet& x) {
  if (x.order < 1) throw Error(ErrorKind::JetOrderExceeded, "jet carries no further derivative");
  return {x.deriv, 0.0, x.order - 1};
}

}  // namespace stableforms
