#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "stableforms/diffpoly.hpp"
#include "stableforms/linalg.hpp"

namespace stableforms {

/// Primitive part: rational content removed, a common sqrt(m) removed when
/// every coefficient is a pure radical, and the leading coefficient made
/// positive.
inline DiffPoly normalize_equation(const DiffPoly& p) {
  if (p.is_zero()) return p;
  bool pure_radical = true;
  unsigned long m = 0;
  for (const auto& t : p.terms()) {
    if (t.coeff.rational_part() != 0 || t.coeff.radical_part() == 0) pure_radical = false;
    m = t.coeff.radicand() ? t.coeff.radicand() : m;
  }
  DiffPoly q = p;
  if (pure_radical) q = q.scaled(QuadraticScalar::sqrt_of(Rational(static_cast<long>(m))).inverse());
  q = q.scaled(QuadraticScalar(Rational(1) / rational_content(q)));
  if (q.leading().coeff.sign() < 0) q = -q;
  return q;
}

/// p divided by the largest monomial dividing every term.
inline DiffPoly strip_monomial_content(const DiffPoly& p) {
  if (p.is_zero()) return p;
  std::map<Var, unsigned> common;
  for (const auto& [v, e] : p.terms().front().monomial.factors()) common[v] = e;
  for (const auto& t : p.terms())
    for (auto& [v, e] : common) e = std::min(e, t.monomial.exponent(v));
  Monomial g;
  for (const auto& [v, e] : common)
    if (e) g = g * Monomial(v, e);
  if (g.is_one()) return p;
  DiffPoly out;
  for (const auto& t : p.terms()) out += DiffPoly::term(t.coeff, *t.monomial.divide(g));
  return out;
}

/// c with a = c * b for a nonzero constant c, if one exists.
inline std::optional<QuadraticScalar> proportionality_factor(const DiffPoly& a, const DiffPoly& b) {
  if (a.is_zero() || b.is_zero()) return std::nullopt;
  if (a.terms().size() != b.terms().size()) return std::nullopt;
  if (!(a.leading().monomial == b.leading().monomial)) return std::nullopt;
  QuadraticScalar c = a.leading().coeff / b.leading().coeff;
  if (a - b.scaled(c) == DiffPoly()) return c;
  return std::nullopt;
}

/// Exact quotient a / b when b divides a.
inline std::optional<DiffPoly> divide_exact(const DiffPoly& a, const DiffPoly& b) {
  if (b.is_zero()) return std::nullopt;
  DiffPoly rem = a;
  DiffPoly quot;
  const auto& lb = b.leading();
  while (!rem.is_zero()) {
    const auto& lr = rem.leading();
    auto q = lr.monomial.divide(lb.monomial);
    if (!q) return std::nullopt;
    DiffPoly step = DiffPoly::term(lr.coeff / lb.coeff, *q);
    quot += step;
    rem -= step * b;
  }
  return quot;
}

/// Coordinates of polynomials over a shared monomial basis.
class MonomialSpace {
 public:
  explicit MonomialSpace(const std::vector<DiffPoly>& polys) {
    for (const auto& p : polys)
      for (const auto& t : p.terms()) index_.try_emplace(t.monomial, 0);
    std::size_t i = 0;
    for (auto& [m, idx] : index_) idx = i++;
  }

  std::size_t size() const { return index_.size(); }

  /// Coordinate vector, or nullopt when p uses a monomial outside the space.
  std::optional<ExactVector> coords(const DiffPoly& p) const {
    ExactVector v(index_.size());
    for (const auto& t : p.terms()) {
      auto it = index_.find(t.monomial);
      if (it == index_.end()) return std::nullopt;
      v[it->second] = t.coeff;
    }
    return v;
  }

 private:
  std::map<Monomial, std::size_t> index_;
};

/// Whether target is a constant-coefficient combination of generators.
inline bool in_linear_span(const std::vector<DiffPoly>& generators, const DiffPoly& target) {
  std::vector<DiffPoly> all = generators;
  all.push_back(target);
  MonomialSpace space(all);
  ExactMatrix m;
  for (const auto& g : generators) m.push_back(*space.coords(g));
  return in_span(m, *space.coords(target));
}

/// How one equation of a system relates to a reference system.
struct EquationMatch {
  DiffPoly equation;
  std::string relation;  // "proportional", "combination", "derivative-combination", "none"
  std::optional<QuadraticScalar> factor;
  int partner = -1;      // index in the other system for "proportional"
};

struct SystemComparison {
  std::vector<EquationMatch> reference_in_computed;  // one per reference equation
  std::vector<EquationMatch> computed_in_reference;  // one per computed equation
  bool equivalent = false;   // every equation on each side is recovered
  bool exact = false;        // both directions are pure proportionality
};

/// Compares two polynomial systems up to nonzero constant factors, constant
/// linear combinations, and first derivatives of the other side.
inline SystemComparison compare_systems(const std::vector<DiffPoly>& computed, const std::vector<DiffPoly>& reference) {
  auto match_into = [](const DiffPoly& eq, const std::vector<DiffPoly>& other) {
    EquationMatch m{eq, "none", std::nullopt, -1};
    for (std::size_t i = 0; i < other.size(); ++i) {
      if (auto f = proportionality_factor(eq, other[i])) {
        m.relation = "proportional";
        m.factor = f;
        m.partner = static_cast<int>(i);
        return m;
      }
    }
    if (in_linear_span(other, eq)) {
      m.relation = "combination";
      return m;
    }
    std::vector<DiffPoly> with_derivs = other;
    for (const auto& o : other) with_derivs.push_back(o.derivative());
    if (in_linear_span(with_derivs, eq)) m.relation = "derivative-combination";
    return m;
  };
  SystemComparison out;
  out.equivalent = true;
  out.exact = true;
  for (const auto& r : reference) {
    out.reference_in_computed.push_back(match_into(r, computed));
    const auto& rel = out.reference_in_computed.back().relation;
    out.equivalent = out.equivalent && rel != "none";
    out.exact = out.exact && rel == "proportional";
  }
  for (const auto& c : computed) {
    out.computed_in_reference.push_back(match_into(c, reference));
    const auto& rel = out.computed_in_reference.back().relation;
    out.equivalent = out.equivalent && rel != "none";
    out.exact = out.exact && rel == "proportional";
  }
  return out;
}

}  // namespace stableforms
