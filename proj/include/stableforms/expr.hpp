#pragma once

#include <cctype>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "stableforms/diffpoly.hpp"
#include "stableforms/error.hpp"
#include "stableforms/jet.hpp"
#include "stableforms/quadratic.hpp"

namespace stableforms {

enum class ExprOp { Number, Time, Param, Neg, Add, Sub, Mul, Div, Pow, Exp, Sqrt };

struct ExprNode;
using Expr = std::shared_ptr<const ExprNode>;

/// Immutable expression tree node. Numbers are nonnegative rationals; a
/// leading minus is always an explicit Neg node.
struct ExprNode {
  ExprOp op;
  Rational number;       // Number
  std::string name;      // Param (may carry trailing apostrophes)
  int exponent = 0;      // Pow
  std::vector<Expr> args;
};

namespace ex {

inline Expr make(ExprOp op, std::vector<Expr> args) {
  auto n = std::make_shared<ExprNode>();
  n->op = op;
  n->args = std::move(args);
  return n;
}

inline Expr number(const Rational& q) {
  Rational v = q;
  v.canonicalize();
  if (v < 0) return make(ExprOp::Neg, {number(-v)});
  auto n = std::make_shared<ExprNode>();
  n->op = ExprOp::Number;
  n->number = v;
  return n;
}
inline Expr number(long v) { return number(Rational(v)); }

inline Expr time() {
  auto n = std::make_shared<ExprNode>();
  n->op = ExprOp::Time;
  return n;
}

inline Expr param(std::string name) {
  auto n = std::make_shared<ExprNode>();
  n->op = ExprOp::Param;
  n->name = std::move(name);
  return n;
}

inline Expr neg(Expr a) { return make(ExprOp::Neg, {std::move(a)}); }
inline Expr add(Expr a, Expr b) { return make(ExprOp::Add, {std::move(a), std::move(b)}); }
inline Expr sub(Expr a, Expr b) { return make(ExprOp::Sub, {std::move(a), std::move(b)}); }
inline Expr mul(Expr a, Expr b) { return make(ExprOp::Mul, {std::move(a), std::move(b)}); }
inline Expr div(Expr a, Expr b) { return make(ExprOp::Div, {std::move(a), std::move(b)}); }
inline Expr exp(Expr a) { return make(ExprOp::Exp, {std::move(a)}); }
inline Expr sqrt(Expr a) { return make(ExprOp::Sqrt, {std::move(a)}); }
inline Expr pow(Expr a, int k) {
  auto n = std::make_shared<ExprNode>();
  n->op = ExprOp::Pow;
  n->exponent = k;
  n->args = {std::move(a)};
  return n;
}

}  // namespace ex

inline bool structurally_equal(const Expr& a, const Expr& b) {
  if (a.get() == b.get()) return true;
  if (!a || !b || a->op != b->op) return false;
  switch (a->op) {
    case ExprOp::Number: return a->number == b->number;
    case ExprOp::Time: return true;
    case ExprOp::Param: return a->name == b->name;
    case ExprOp::Pow:
      if (a->exponent != b->exponent) return false;
      break;
    default: break;
  }
  if (a->args.size() != b->args.size()) return false;
  for (std::size_t i = 0; i < a->args.size(); ++i)
    if (!structurally_equal(a->args[i], b->args[i])) return false;
  return true;
}

inline bool is_reserved_name(std::string_view s) { return s == "t" || s == "exp" || s == "sqrt"; }

namespace detail {

class ExprParser {
 public:
  explicit ExprParser(std::string_view src) : src_(src) {}

  Expr parse() {
    Expr e = expr();
    skip_ws();
    if (pos_ != src_.size()) fail("unexpected '" + std::string(1, src_[pos_]) + "'");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(pos_, msg); }

  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) fail(std::string("expected '") + c + "'");
  }

  bool at_digit() const { return pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_])); }

  std::string digits() {
    std::size_t start = pos_;
    while (at_digit()) ++pos_;
    return std::string(src_.substr(start, pos_ - start));
  }

  Expr expr() {
    Expr lhs = term();
    for (;;) {
      if (accept('+')) {
        lhs = ex::add(lhs, term());
      } else if (accept('-')) {
        lhs = ex::sub(lhs, term());
      } else {
        return lhs;
      }
    }
  }

  Expr term() {
    Expr lhs = unary();
    for (;;) {
      if (accept('*')) {
        lhs = ex::mul(lhs, unary());
      } else if (accept('/')) {
        lhs = ex::div(lhs, unary());
      } else {
        return lhs;
      }
    }
  }

  Expr unary() {
    if (accept('-')) return ex::neg(unary());
    return factor();
  }

  Expr factor() {
    Expr b = base();
    if (accept('^')) {
      skip_ws();
      bool negative = false;
      if (pos_ < src_.size() && src_[pos_] == '-') {
        negative = true;
        ++pos_;
      }
      if (!at_digit()) fail("expected integer exponent");
      std::string d = digits();
      if (d.size() > 6) fail("exponent too large");
      int k = std::stoi(d);
      b = ex::pow(b, negative ? -k : k);
    }
    return b;
  }

  Expr number_literal() {
    std::string whole = digits();
    Rational value{Integer(whole)};
    if (pos_ < src_.size() && src_[pos_] == '.') {
      ++pos_;
      std::string frac = digits();
      if (frac.empty()) fail("expected digits after '.'");
      Integer scale;
      mpz_ui_pow_ui(scale.get_mpz_t(), 10, frac.size());
      value += Rational(Integer(frac), scale);
    }
    if (pos_ + 1 < src_.size() && src_[pos_] == '/' && std::isdigit(static_cast<unsigned char>(src_[pos_ + 1]))) {
      ++pos_;
      Integer den(digits());
      if (den == 0) fail("zero denominator in literal");
      value /= Rational(den);
    }
    value.canonicalize();
    return ex::number(value);
  }

  Expr base() {
    skip_ws();
    if (pos_ >= src_.size()) fail("unexpected end of input");
    char c = src_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c))) return number_literal();
    if (c == '(') {
      ++pos_;
      Expr e = expr();
      expect(')');
      return e;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = pos_;
      while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) ++pos_;
      std::string name(src_.substr(start, pos_ - start));
      if (name == "exp" || name == "sqrt") {
        expect('(');
        Expr arg = expr();
        expect(')');
        return name == "exp" ? ex::exp(arg) : ex::sqrt(arg);
      }
      std::size_t primes = 0;
      while (pos_ < src_.size() && src_[pos_] == '\'') {
        ++pos_;
        ++primes;
      }
      if (name == "t") {
        if (primes) fail("time variable cannot carry derivative marks");
        return ex::time();
      }
      return ex::param(name + std::string(primes, '\''));
    }
    fail("unexpected '" + std::string(1, c) + "'");
  }

  std::string_view src_;
  std::size_t pos_ = 0;
};

enum Prec { kSum = 1, kProduct = 2, kUnary = 3, kPower = 4, kAtom = 5 };

inline int precedence(const Expr& e) {
  switch (e->op) {
    case ExprOp::Add:
    case ExprOp::Sub: return kSum;
    case ExprOp::Mul:
    case ExprOp::Div: return kProduct;
    case ExprOp::Neg: return kUnary;
    case ExprOp::Pow: return kPower;
    default: return kAtom;
  }
}

inline std::string wrap(const std::string& s) { return "(" + s + ")"; }

std::string print(const Expr& e);

inline std::string print_at(const Expr& e, int min_prec) {
  std::string s = print(e);
  return precedence(e) < min_prec ? wrap(s) : s;
}

inline std::string print(const Expr& e) {
  switch (e->op) {
    case ExprOp::Number: return e->number.get_str();
    case ExprOp::Time: return "t";
    case ExprOp::Param: return e->name;
    case ExprOp::Neg: {
      const Expr& a = e->args[0];
      std::string inner = print_at(a, kUnary);
      // "--x" would still parse, but keep nested negation readable
      if (a->op == ExprOp::Neg) inner = wrap(print(a));
      return "-" + inner;
    }
    case ExprOp::Add:
    case ExprOp::Sub: {
      std::string lhs = print_at(e->args[0], kSum);
      const Expr& b = e->args[1];
      std::string rhs = (b->op == ExprOp::Neg) ? wrap(print(b)) : print_at(b, kProduct);
      return lhs + (e->op == ExprOp::Add ? " + " : " - ") + rhs;
    }
    case ExprOp::Mul:
    case ExprOp::Div: {
      std::string lhs = print_at(e->args[0], kProduct);
      const Expr& b = e->args[1];
      std::string rhs = (b->op == ExprOp::Neg) ? wrap(print(b)) : print_at(b, kPower);
      // keep "x*3/2" from re-lexing as a single literal
      if (e->op == ExprOp::Div && b->op == ExprOp::Number && !lhs.empty() &&
          std::isdigit(static_cast<unsigned char>(lhs.back())))
        rhs = wrap(rhs);
      return lhs + (e->op == ExprOp::Mul ? "*" : "/") + rhs;
    }
    case ExprOp::Pow: {
      const Expr& a = e->args[0];
      std::string base = print(a);
      bool atomic = (a->op == ExprOp::Time || a->op == ExprOp::Param || a->op == ExprOp::Exp ||
                     a->op == ExprOp::Sqrt ||
                     (a->op == ExprOp::Number && a->number.get_den() == 1));
      if (!atomic) base = wrap(base);
      return base + "^" + std::to_string(e->exponent);
    }
    case ExprOp::Exp: return "exp(" + print(e->args[0]) + ")";
    case ExprOp::Sqrt: return "sqrt(" + print(e->args[0]) + ")";
  }
  return "?";
}

}  // namespace detail

inline Expr parse_expr(std::string_view src) { return detail::ExprParser(src).parse(); }
inline std::string print_expr(const Expr& e) { return detail::print(e); }

/// Names of all parameters (including derivative-marked names) in e.
inline void collect_params(const Expr& e, std::vector<std::string>& out) {
  if (e->op == ExprOp::Param) {
    for (const auto& n : out)
      if (n == e->name) return;
    out.push_back(e->name);
  }
  for (const auto& a : e->args) collect_params(a, out);
}

inline bool depends_on_time(const Expr& e) {
  if (e->op == ExprOp::Time) return true;
  for (const auto& a : e->args)
    if (depends_on_time(a)) return true;
  return false;
}

/// Value and exact first derivative at t. Parameters are constants.
inline Jet eval_jet(const Expr& e, double t, const std::map<std::string, double>& params = {}) {
  switch (e->op) {
    case ExprOp::Number: return Jet(e->number.get_d(), 0.0);
    case ExprOp::Time: return Jet::variable(t);
    case ExprOp::Param: {
      auto it = params.find(e->name);
      if (it == params.end()) throw Error(ErrorKind::EvalError, "unbound parameter " + e->name);
      return Jet(it->second, 0.0);
    }
    case ExprOp::Neg: return -eval_jet(e->args[0], t, params);
    case ExprOp::Add: return eval_jet(e->args[0], t, params) + eval_jet(e->args[1], t, params);
    case ExprOp::Sub: return eval_jet(e->args[0], t, params) - eval_jet(e->args[1], t, params);
    case ExprOp::Mul: return eval_jet(e->args[0], t, params) * eval_jet(e->args[1], t, params);
    case ExprOp::Div: {
      Jet den = eval_jet(e->args[1], t, params);
      if (den.value == 0.0) throw Error(ErrorKind::EvalError, "division by zero in " + print_expr(e));
      return eval_jet(e->args[0], t, params) / den;
    }
    case ExprOp::Pow: {
      Jet b = eval_jet(e->args[0], t, params);
      if (b.value == 0.0 && e->exponent < 0) throw Error(ErrorKind::EvalError, "negative power of zero");
      return pow(b, e->exponent);
    }
    case ExprOp::Exp: return exp(eval_jet(e->args[0], t, params));
    case ExprOp::Sqrt: {
      Jet a = eval_jet(e->args[0], t, params);
      if (a.value < 0.0) throw Error(ErrorKind::EvalError, "sqrt of negative value in " + print_expr(e));
      return sqrt(a);
    }
  }
  throw Error(ErrorKind::EvalError, "unknown node");
}

/// Exact value of a closed expression in Q(sqrt m).
inline QuadraticScalar to_exact(const Expr& e) {
  switch (e->op) {
    case ExprOp::Number: return QuadraticScalar(e->number);
    case ExprOp::Neg: return -to_exact(e->args[0]);
    case ExprOp::Add: return to_exact(e->args[0]) + to_exact(e->args[1]);
    case ExprOp::Sub: return to_exact(e->args[0]) - to_exact(e->args[1]);
    case ExprOp::Mul: return to_exact(e->args[0]) * to_exact(e->args[1]);
    case ExprOp::Div: return to_exact(e->args[0]) / to_exact(e->args[1]);
    case ExprOp::Pow: {
      QuadraticScalar b = to_exact(e->args[0]);
      int k = e->exponent;
      if (k < 0) {
        b = b.inverse();
        k = -k;
      }
      QuadraticScalar out(1);
      for (int i = 0; i < k; ++i) out *= b;
      return out;
    }
    case ExprOp::Sqrt: {
      QuadraticScalar a = to_exact(e->args[0]);
      if (!a.is_rational()) throw Error(ErrorKind::NotPolynomial, "nested radical in " + print_expr(e));
      return QuadraticScalar::sqrt_of(a.rational_part());
    }
    case ExprOp::Time: throw Error(ErrorKind::NotPolynomial, "time variable has no exact value");
    case ExprOp::Param: throw Error(ErrorKind::NotPolynomial, "parameter " + e->name + " has no exact value");
    case ExprOp::Exp: throw Error(ErrorKind::NotPolynomial, "exp has no exact value: " + print_expr(e));
  }
  throw Error(ErrorKind::NotPolynomial, "unknown node");
}

/// Polynomial in the parameters; exp, t, and division by non-constants are
/// rejected. Closed radicals such as sqrt(3) are kept exactly.
inline DiffPoly to_diffpoly(const Expr& e) {
  switch (e->op) {
    case ExprOp::Number: return DiffPoly(e->number);
    case ExprOp::Param: return DiffPoly::symbol(e->name);
    case ExprOp::Neg: return -to_diffpoly(e->args[0]);
    case ExprOp::Add: return to_diffpoly(e->args[0]) + to_diffpoly(e->args[1]);
    case ExprOp::Sub: return to_diffpoly(e->args[0]) - to_diffpoly(e->args[1]);
    case ExprOp::Mul: return to_diffpoly(e->args[0]) * to_diffpoly(e->args[1]);
    case ExprOp::Div: {
      DiffPoly den = to_diffpoly(e->args[1]);
      if (!den.is_constant())
        throw Error(ErrorKind::NotPolynomial, "division by non-constant in " + print_expr(e));
      return to_diffpoly(e->args[0]) / den;
    }
    case ExprOp::Pow: {
      DiffPoly b = to_diffpoly(e->args[0]);
      if (e->exponent >= 0) return b.pow(static_cast<unsigned>(e->exponent));
      if (!b.is_constant()) throw Error(ErrorKind::NotPolynomial, "negative power in " + print_expr(e));
      return DiffPoly(b.constant_value().inverse()).pow(static_cast<unsigned>(-e->exponent));
    }
    case ExprOp::Sqrt: return DiffPoly(to_exact(e));
    case ExprOp::Time: throw Error(ErrorKind::NotPolynomial, "time variable in polynomial context");
    case ExprOp::Exp: throw Error(ErrorKind::NotPolynomial, "exp in polynomial context: " + print_expr(e));
  }
  throw Error(ErrorKind::NotPolynomial, "unknown node");
}

}  // namespace stableforms
