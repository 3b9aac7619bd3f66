#pragma once

#include <cmath>
#include <compare>
#include <cstdint>
#include <ostream>
#include <string>

#include <gmpxx.h>

#include "stableforms/error.hpp"

namespace stableforms {

using Rational = mpq_class;
using Integer = mpz_class;

inline std::string rational_to_string(const Rational& q) { return q.get_str(); }

/// Exact element a + b*sqrt(m) of the quadratic field Q(sqrt m).
///
/// Canonical representation: m is square-free and b != 0 whenever m != 0.
/// Rational values (b == 0) store m = 0 and combine with any radicand, so
/// literal constants such as 1/2 can enter expressions over Q(sqrt 3).
class QuadraticScalar {
 public:
  QuadraticScalar() = default;
  QuadraticScalar(long value) : a_(value) {}  // NOLINT: implicit by design of a numeric type
  QuadraticScalar(const Rational& value) : a_(value) { a_.canonicalize(); }  // NOLINT

  /// a + b*sqrt(m); m is reduced to its square-free part.
  static QuadraticScalar make(const Rational& a, const Rational& b, unsigned long m) {
    QuadraticScalar out;
    out.a_ = a;
    out.a_.canonicalize();
    if (b == 0 || m == 0) return out;
    unsigned long square = 1;
    unsigned long rest = m;
    for (unsigned long f = 2; f * f <= rest; ++f) {
      while (rest % (f * f) == 0) {
        rest /= f * f;
        square *= f;
      }
    }
    Rational bb = b * Rational(static_cast<long>(square));
    bb.canonicalize();
    if (rest == 1) {
      out.a_ += bb;
      out.a_.canonicalize();
      return out;
    }
    out.b_ = bb;
    out.m_ = rest;
    return out;
  }

  /// Exact square root of a nonnegative rational, written as q*sqrt(m).
  static QuadraticScalar sqrt_of(const Rational& value) {
    if (value < 0) throw Error(ErrorKind::EvalError, "sqrt of negative value " + value.get_str());
    if (value == 0) return {};
    // sqrt(n/d) = sqrt(n*d)/d
    Integer nd = value.get_num() * value.get_den();
    if (!nd.fits_ulong_p()) throw Error(ErrorKind::EvalError, "radicand too large: " + value.get_str());
    Rational inv_den(Integer(1), value.get_den());
    return make(0, inv_den, nd.get_ui());
  }

  const Rational& rational_part() const { return a_; }
  const Rational& radical_part() const { return b_; }
  unsigned long radicand() const { return m_; }

  bool is_zero() const { return a_ == 0 && b_ == 0; }
  bool is_rational() const { return b_ == 0; }

  /// Exact sign of a + b*sqrt(m).
  int sign() const {
    int sa = sgn(a_);
    int sb = sgn(b_);
    if (sb == 0) return sa;
    if (sa == 0 || sa == sb) return sb;
    Rational lhs = a_ * a_;
    Rational rhs = b_ * b_ * Rational(static_cast<long>(m_));
    return lhs > rhs ? sa : sb;
  }

  double to_double() const {
    return a_.get_d() + b_.get_d() * std::sqrt(static_cast<double>(m_));
  }

  QuadraticScalar conjugate() const {
    QuadraticScalar out = *this;
    out.b_ = -out.b_;
    return out;
  }

  /// Field norm a^2 - m*b^2 (rational).
  Rational norm() const {
    Rational out = a_ * a_ - b_ * b_ * Rational(static_cast<long>(m_));
    out.canonicalize();
    return out;
  }

  QuadraticScalar inverse() const {
    if (is_zero()) throw Error(ErrorKind::DivisionByZero, "inverse of zero");
    Rational n = norm();
    QuadraticScalar c = conjugate();
    c.a_ /= n;
    c.b_ /= n;
    c.a_.canonicalize();
    c.b_.canonicalize();
    return c;
  }

  QuadraticScalar operator-() const {
    QuadraticScalar out = *this;
    out.a_ = -out.a_;
    out.b_ = -out.b_;
    return out;
  }

  QuadraticScalar& operator+=(const QuadraticScalar& o) {
    unsigned long m = common_radicand(o);
    a_ += o.a_;
    b_ += o.b_;
    m_ = m;
    fix();
    return *this;
  }
  QuadraticScalar& operator-=(const QuadraticScalar& o) { return *this += -o; }

  QuadraticScalar& operator*=(const QuadraticScalar& o) {
    unsigned long m = common_radicand(o);
    Rational a = a_ * o.a_ + b_ * o.b_ * Rational(static_cast<long>(m));
    Rational b = a_ * o.b_ + b_ * o.a_;
    a_ = a;
    b_ = b;
    m_ = m;
    fix();
    return *this;
  }
  QuadraticScalar& operator/=(const QuadraticScalar& o) { return *this *= o.inverse(); }

  friend QuadraticScalar operator+(QuadraticScalar x, const QuadraticScalar& y) { return x += y; }
  friend QuadraticScalar operator-(QuadraticScalar x, const QuadraticScalar& y) { return x -= y; }
  friend QuadraticScalar operator*(QuadraticScalar x, const QuadraticScalar& y) { return x *= y; }
  friend QuadraticScalar operator/(QuadraticScalar x, const QuadraticScalar& y) { return x /= y; }

  friend bool operator==(const QuadraticScalar& x, const QuadraticScalar& y) {
    return x.a_ == y.a_ && x.b_ == y.b_ && x.m_ == y.m_;
  }

  /// Deterministic total order on representations (not the field order).
  friend bool representation_less(const QuadraticScalar& x, const QuadraticScalar& y) {
    if (x.m_ != y.m_) return x.m_ < y.m_;
    if (x.a_ != y.a_) return x.a_ < y.a_;
    return x.b_ < y.b_;
  }

  /// Parseable rendering: "3/2", "-sqrt(3)", "2*sqrt(3)", "(1 + 2*sqrt(3))".
  std::string str() const {
    if (b_ == 0) return a_.get_str();
    std::string rad = radical_str(b_, m_);
    if (a_ == 0) return rad;
    std::string out = "(" + a_.get_str();
    if (b_ < 0) {
      out += " - " + radical_str(-b_, m_);
    } else {
      out += " + " + rad;
    }
    return out + ")";
  }

  friend std::ostream& operator<<(std::ostream& os, const QuadraticScalar& x) { return os << x.str(); }

 private:
  static std::string radical_str(const Rational& b, unsigned long m) {
    std::string root = "sqrt(" + std::to_string(m) + ")";
    if (b == 1) return root;
    if (b == -1) return "-" + root;
    return b.get_str() + "*" + root;
  }

  unsigned long common_radicand(const QuadraticScalar& o) const {
    if (b_ == 0) return o.m_;
    if (o.b_ == 0) return m_;
    if (m_ != o.m_) {
      throw Error(ErrorKind::MixedBackend, "radicands differ: sqrt(" + std::to_string(m_) +
                                               ") vs sqrt(" + std::to_string(o.m_) + ")");
    }
    return m_;
  }

  void fix() {
    a_.canonicalize();
    b_.canonicalize();
    if (b_ == 0) m_ = 0;
  }

  Rational a_{0};
  Rational b_{0};
  unsigned long m_ = 0;
};

}  // namespace stableforms
