#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "stableforms/quadratic.hpp"

namespace stableforms {

using ExactMatrix = std::vector<std::vector<QuadraticScalar>>;
using ExactVector = std::vector<QuadraticScalar>;

struct Echelon {
  ExactMatrix rows;          // nonzero rows only, in echelon form
  std::vector<std::size_t> pivots;  // pivot column of each row
};

/// Fraction-free (Bareiss) row reduction. Each elimination step divides by
/// the previous pivot exactly, so entries stay in the ring generated by the
/// input instead of accumulating fractions.
inline Echelon bareiss(ExactMatrix m, std::size_t cols) {
  Echelon out;
  std::size_t rows = m.size();
  std::size_t r = 0;
  QuadraticScalar prev(1);
  for (std::size_t c = 0; c < cols && r < rows; ++c) {
    std::size_t piv = r;
    while (piv < rows && m[piv][c].is_zero()) ++piv;
    if (piv == rows) continue;
    std::swap(m[piv], m[r]);
    for (std::size_t i = r + 1; i < rows; ++i) {
      for (std::size_t j = c + 1; j < cols; ++j) {
        m[i][j] = (m[r][c] * m[i][j] - m[i][c] * m[r][j]) / prev;
      }
      m[i][c] = QuadraticScalar();
    }
    prev = m[r][c];
    out.pivots.push_back(c);
    ++r;
  }
  m.resize(r);
  out.rows = std::move(m);
  return out;
}

inline std::size_t rank(const ExactMatrix& m, std::size_t cols) { return bareiss(m, cols).pivots.size(); }

/// Basis of {x : M x = 0}. Each basis vector has a 1 in one free column and
/// is then rescaled to coprime integers when all entries are rational.
inline std::vector<ExactVector> kernel(const ExactMatrix& m, std::size_t cols) {
  Echelon e = bareiss(m, cols);
  // reduce to row-echelon with unit pivots, clearing above
  ExactMatrix& R = e.rows;
  for (std::size_t k = R.size(); k-- > 0;) {
    std::size_t pc = e.pivots[k];
    QuadraticScalar inv = R[k][pc].inverse();
    for (std::size_t j = pc; j < cols; ++j) R[k][j] *= inv;
    for (std::size_t i = 0; i < k; ++i) {
      if (R[i][pc].is_zero()) continue;
      QuadraticScalar f = R[i][pc];
      for (std::size_t j = pc; j < cols; ++j) R[i][j] -= f * R[k][j];
    }
  }
  std::vector<bool> is_pivot(cols, false);
  for (auto p : e.pivots) is_pivot[p] = true;
  std::vector<ExactVector> basis;
  for (std::size_t free = 0; free < cols; ++free) {
    if (is_pivot[free]) continue;
    ExactVector v(cols);
    v[free] = QuadraticScalar(1);
    for (std::size_t k = 0; k < R.size(); ++k) v[e.pivots[k]] = -R[k][free];
    bool rational = true;
    for (const auto& x : v) rational = rational && x.is_rational();
    if (rational) {
      Integer den = 1;
      for (const auto& x : v) den = lcm(den, x.rational_part().get_den());
      Integer g = 0;
      for (const auto& x : v) g = gcd(g, Integer(x.rational_part() * Rational(den)));
      for (auto& x : v) x = QuadraticScalar(x.rational_part() * Rational(den) / Rational(g));
    }
    basis.push_back(std::move(v));
  }
  return basis;
}

/// Whether v lies in the row span of m.
inline bool in_span(const ExactMatrix& m, const ExactVector& v) {
  if (m.empty()) {
    for (const auto& x : v)
      if (!x.is_zero()) return false;
    return true;
  }
  ExactMatrix ext = m;
  ext.push_back(v);
  return rank(ext, v.size()) == rank(m, v.size());
}

}  // namespace stableforms
