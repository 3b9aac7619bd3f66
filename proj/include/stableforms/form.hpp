#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "stableforms/error.hpp"
#include "stableforms/scalar.hpp"

namespace stableforms {

inline constexpr int kDim = 6;

/// Bit i-1 selects e^i.
using Mask = std::uint8_t;
inline constexpr Mask kTopMask = 0x3f;

inline int mask_degree(Mask m) { return std::popcount(static_cast<unsigned>(m)); }

inline std::vector<int> mask_indices(Mask m) {
  std::vector<int> out;
  for (int i = 1; i <= kDim; ++i)
    if (m & (1u << (i - 1))) out.push_back(i);
  return out;
}

inline Mask mask_of(std::initializer_list<int> indices) {
  Mask m = 0;
  for (int i : indices) m |= static_cast<Mask>(1u << (i - 1));
  return m;
}

/// "135" for e^{135}.
inline std::string mask_digits(Mask m) {
  std::string s;
  for (int i : mask_indices(m)) s += static_cast<char>('0' + i);
  return s;
}

inline std::string mask_name(Mask m) { return m == 0 ? "1" : "e" + mask_digits(m); }

/// Sign of e^{a} ^ e^{b} relative to e^{a|b}; 0 if they overlap.
inline int wedge_sign(Mask a, Mask b) {
  if (a & b) return 0;
  int inversions = 0;
  for (int i = 0; i < kDim; ++i)
    if (a & (1u << i)) inversions += mask_degree(static_cast<Mask>(b & ((1u << i) - 1)));
  return (inversions % 2) ? -1 : 1;
}

/// Parses an index string such as "135" or "21" into a mask and the sign of
/// the sorting permutation; sign 0 if an index repeats.
inline std::pair<Mask, int> parse_indices(const std::string& digits) {
  Mask m = 0;
  int sign = 1;
  for (char ch : digits) {
    if (ch < '1' || ch > '6') throw Error(ErrorKind::InvalidArgument, "basis index out of range in '" + digits + "'");
    Mask bit = static_cast<Mask>(1u << (ch - '1'));
    if (m & bit) return {0, 0};
    sign *= wedge_sign(m, bit);
    m |= bit;
  }
  return {m, sign};
}

/// Order on masks: degree first, then lexicographic in the index lists, so
/// forms print as e12, e13, ..., e16, e23, ...
struct MaskLess {
  bool operator()(Mask a, Mask b) const { return rank()[a] < rank()[b]; }

  static const std::array<int, 64>& rank() {
    static const std::array<int, 64> table = [] {
      std::array<Mask, 64> masks{};
      for (int i = 0; i < 64; ++i) masks[i] = static_cast<Mask>(i);
      std::sort(masks.begin(), masks.end(), [](Mask x, Mask y) {
        int dx = mask_degree(x);
        int dy = mask_degree(y);
        if (dx != dy) return dx < dy;
        return mask_indices(x) < mask_indices(y);
      });
      std::array<int, 64> r{};
      for (int i = 0; i < 64; ++i) r[masks[i]] = i;
      return r;
    }();
    return table;
  }
};

/// Every mask of the given degree, in MaskLess order.
inline std::vector<Mask> masks_of_degree(int k) {
  std::vector<Mask> out;
  for (int m = 0; m < 64; ++m)
    if (mask_degree(static_cast<Mask>(m)) == k) out.push_back(static_cast<Mask>(m));
  std::sort(out.begin(), out.end(), MaskLess{});
  return out;
}

template <class S>
using Vector = std::array<S, kDim>;

template <class S>
Vector<S> basis_vector(int i) {
  Vector<S> v;
  v.fill(S(0));
  v[i - 1] = S(1);
  return v;
}

/// Homogeneous k-form with pruned zero coefficients.
template <class S>
class Form {
 public:
  using Map = std::map<Mask, S, MaskLess>;

  Form() = default;
  explicit Form(int degree) : degree_(degree) {
    if (degree < 0 || degree > kDim) throw Error(ErrorKind::DegreeOverflow, "degree " + std::to_string(degree));
  }

  static Form basis(Mask m, const S& c = S(1)) {
    Form f(mask_degree(m));
    f.add(m, c);
    return f;
  }

  int degree() const { return degree_; }
  const Map& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }

  S coeff(Mask m) const {
    auto it = terms_.find(m);
    return it == terms_.end() ? S(0) : it->second;
  }

  void add(Mask m, const S& c) {
    if (mask_degree(m) != degree_)
      throw Error(ErrorKind::DegreeMismatch, "term " + mask_name(m) + " in a " + std::to_string(degree_) + "-form");
    if (ScalarTraits<S>::is_zero(c)) return;
    auto [it, inserted] = terms_.try_emplace(m, c);
    if (!inserted) {
      it->second = it->second + c;
      if (ScalarTraits<S>::is_zero(it->second)) terms_.erase(it);
    }
  }

  void set(Mask m, const S& c) {
    if (mask_degree(m) != degree_)
      throw Error(ErrorKind::DegreeMismatch, "term " + mask_name(m) + " in a " + std::to_string(degree_) + "-form");
    terms_.erase(m);
    if (!ScalarTraits<S>::is_zero(c)) terms_.emplace(m, c);
  }

  template <class F>
  auto map(F&& f) const {
    using T = decltype(f(std::declval<const S&>()));
    Form<T> out(degree_);
    for (const auto& [m, c] : terms_) out.add(m, f(c));
    return out;
  }

  Form operator-() const {
    Form out(degree_);
    for (const auto& [m, c] : terms_) out.terms_.emplace(m, -c);
    return out;
  }

  Form& operator+=(const Form& o) {
    check_same_degree(o);
    for (const auto& [m, c] : o.terms_) add(m, c);
    return *this;
  }
  Form& operator-=(const Form& o) {
    check_same_degree(o);
    for (const auto& [m, c] : o.terms_) add(m, -c);
    return *this;
  }

  friend Form operator+(Form a, const Form& b) { return a += b; }
  friend Form operator-(Form a, const Form& b) { return a -= b; }
  friend Form operator*(const S& s, const Form& a) {
    Form out(a.degree_);
    for (const auto& [m, c] : a.terms_) out.add(m, s * c);
    return out;
  }

  friend bool operator==(const Form& a, const Form& b) {
    if (a.degree_ != b.degree_ || a.terms_.size() != b.terms_.size()) return false;
    auto i = a.terms_.begin();
    auto j = b.terms_.begin();
    for (; i != a.terms_.end(); ++i, ++j)
      if (i->first != j->first || !(i->second == j->second)) return false;
    return true;
  }

  /// "p1*e135 + p2*e146 - e245"; the zero form prints as "0".
  std::string str() const {
    if (terms_.empty()) return "0";
    std::string out;
    bool first = true;
    for (const auto& [m, c] : terms_) {
      CoeffText ct = ScalarTraits<S>::text(c);
      if (first) {
        if (ct.negative) out += "-";
      } else {
        out += ct.negative ? " - " : " + ";
      }
      first = false;
      if (m == 0) {
        out += ct.text;
      } else if (ct.unit) {
        out += mask_name(m);
      } else {
        out += (ct.compound ? "(" + ct.text + ")" : ct.text) + "*" + mask_name(m);
      }
    }
    return out;
  }

 private:
  void check_same_degree(const Form& o) const {
    if (o.degree_ != degree_)
      throw Error(ErrorKind::DegreeMismatch,
                  "adding a " + std::to_string(o.degree_) + "-form to a " + std::to_string(degree_) + "-form");
  }

  int degree_ = 0;
  Map terms_;
};

template <class S>
Form<S> wedge(const Form<S>& a, const Form<S>& b) {
  if (a.degree() + b.degree() > kDim)
    throw Error(ErrorKind::DegreeOverflow,
                "wedge of degrees " + std::to_string(a.degree()) + " and " + std::to_string(b.degree()));
  Form<S> out(a.degree() + b.degree());
  for (const auto& [ma, ca] : a.terms()) {
    for (const auto& [mb, cb] : b.terms()) {
      int s = wedge_sign(ma, mb);
      if (s == 0) continue;
      S prod = ca * cb;
      out.add(static_cast<Mask>(ma | mb), s > 0 ? prod : -prod);
    }
  }
  return out;
}

template <class S>
Form<S> power(const Form<S>& a, int k) {
  Form<S> out = Form<S>::basis(0);
  for (int i = 0; i < k; ++i) out = wedge(out, a);
  return out;
}

/// Interior product: i_v e^{i1...ik} = sum_p (-1)^(p) v_{ip} e^{...without ip...}.
template <class S>
Form<S> contract(const Vector<S>& v, const Form<S>& a) {
  if (a.degree() == 0) throw Error(ErrorKind::DegreeMismatch, "contraction of a 0-form");
  Form<S> out(a.degree() - 1);
  for (const auto& [m, c] : a.terms()) {
    int pos = 0;
    for (int i : mask_indices(m)) {
      if (!ScalarTraits<S>::is_zero(v[i - 1])) {
        S term = v[i - 1] * c;
        out.add(static_cast<Mask>(m & ~(1u << (i - 1))), (pos % 2) ? -term : term);
      }
      ++pos;
    }
  }
  return out;
}

/// a(v_1, ..., v_k) with e^{I}(e_{J}) = det(delta).
template <class S>
S evaluate(const Form<S>& a, const std::vector<Vector<S>>& vs) {
  if (static_cast<int>(vs.size()) != a.degree())
    throw Error(ErrorKind::DegreeMismatch, "form of degree " + std::to_string(a.degree()) + " evaluated on " +
                                               std::to_string(vs.size()) + " vectors");
  Form<S> cur = a;
  for (const auto& v : vs) cur = contract(v, cur);
  return cur.coeff(0);
}

/// 6x6 matrix acting on column vectors.
template <class S>
class Endo {
 public:
  Endo() {
    for (auto& row : m_) row.fill(S(0));
  }

  static Endo identity() {
    Endo e;
    for (int i = 0; i < kDim; ++i) e.m_[i][i] = S(1);
    return e;
  }

  /// Entry (i, j), 1-based.
  S& at(int i, int j) { return m_[i - 1][j - 1]; }
  const S& at(int i, int j) const { return m_[i - 1][j - 1]; }

  Vector<S> column(int j) const {
    Vector<S> v;
    for (int i = 0; i < kDim; ++i) v[i] = m_[i][j - 1];
    return v;
  }

  Vector<S> apply(const Vector<S>& v) const {
    Vector<S> out;
    for (int i = 0; i < kDim; ++i) {
      S acc(0);
      for (int j = 0; j < kDim; ++j) acc = acc + m_[i][j] * v[j];
      out[i] = acc;
    }
    return out;
  }

  friend Endo operator*(const Endo& a, const Endo& b) {
    Endo out;
    for (int i = 0; i < kDim; ++i)
      for (int j = 0; j < kDim; ++j) {
        S acc(0);
        for (int k = 0; k < kDim; ++k) acc = acc + a.m_[i][k] * b.m_[k][j];
        out.m_[i][j] = acc;
      }
    return out;
  }
  friend Endo operator+(const Endo& a, const Endo& b) {
    Endo out;
    for (int i = 0; i < kDim; ++i)
      for (int j = 0; j < kDim; ++j) out.m_[i][j] = a.m_[i][j] + b.m_[i][j];
    return out;
  }
  friend Endo operator-(const Endo& a, const Endo& b) {
    Endo out;
    for (int i = 0; i < kDim; ++i)
      for (int j = 0; j < kDim; ++j) out.m_[i][j] = a.m_[i][j] - b.m_[i][j];
    return out;
  }
  friend Endo operator*(const S& s, const Endo& a) {
    Endo out;
    for (int i = 0; i < kDim; ++i)
      for (int j = 0; j < kDim; ++j) out.m_[i][j] = s * a.m_[i][j];
    return out;
  }
  friend bool operator==(const Endo& a, const Endo& b) {
    for (int i = 0; i < kDim; ++i)
      for (int j = 0; j < kDim; ++j)
        if (!(a.m_[i][j] == b.m_[i][j])) return false;
    return true;
  }

  S trace() const {
    S acc(0);
    for (int i = 0; i < kDim; ++i) acc = acc + m_[i][i];
    return acc;
  }

  Endo transpose() const {
    Endo out;
    for (int i = 0; i < kDim; ++i)
      for (int j = 0; j < kDim; ++j) out.m_[i][j] = m_[j][i];
    return out;
  }

  template <class F>
  auto map(F&& f) const {
    using T = decltype(f(std::declval<const S&>()));
    Endo<T> out;
    for (int i = 1; i <= kDim; ++i)
      for (int j = 1; j <= kDim; ++j) out.at(i, j) = f(at(i, j));
    return out;
  }

  /// Determinant of the leading k x k block (k = 6 for the full matrix),
  /// by expansion over row subsets; needs no division.
  S leading_minor(int k) const {
    // minors[mask of used columns] after filling the first popcount rows
    std::vector<S> minors(1u << k, S(0));
    minors[0] = S(1);
    for (unsigned cols = 0; cols < (1u << k); ++cols) {
      int row = std::popcount(cols);
      if (row >= k || ScalarTraits<S>::is_zero(minors[cols])) continue;
      int sign_pos = 0;
      for (int c = k - 1; c >= 0; --c) {
        if (cols & (1u << c)) {
          ++sign_pos;
          continue;
        }
        // columns to the right already used contribute the transposition sign
        S term = minors[cols] * m_[row][c];
        minors[cols | (1u << c)] = minors[cols | (1u << c)] + ((sign_pos % 2) ? -term : term);
      }
    }
    return minors[(1u << k) - 1];
  }

  S det() const { return leading_minor(kDim); }

 private:
  std::array<std::array<S, kDim>, kDim> m_;
};

/// (A^* a)(v_1, ..., v_k) = a(A v_1, ..., A v_k).
template <class S>
Form<S> pullback(const Endo<S>& A, const Form<S>& a) {
  std::array<Form<S>, kDim + 1> pulled;
  for (int i = 1; i <= kDim; ++i) {
    Form<S> f(1);
    for (int j = 1; j <= kDim; ++j) f.add(mask_of({j}), A.at(i, j));
    pulled[i] = f;
  }
  Form<S> out(a.degree());
  for (const auto& [m, c] : a.terms()) {
    Form<S> term = Form<S>::basis(0, c);
    for (int i : mask_indices(m)) term = wedge(term, pulled[i]);
    out += term;
  }
  return out;
}

/// s with a = s * Omega for top-degree forms.
template <class S>
S top_coeff(const Form<S>& a, const Form<S>& omega) {
  if (omega.degree() != kDim || a.degree() != kDim)
    throw Error(ErrorKind::DegreeMismatch, "top_coeff needs 6-forms");
  S vol = omega.coeff(kTopMask);
  if (ScalarTraits<S>::is_zero(vol)) throw Error(ErrorKind::ZeroVolume, "volume form is zero");
  return a.coeff(kTopMask) / vol;
}

template <class S>
Form<S> volume_form(int orientation = 1) {
  return Form<S>::basis(kTopMask, S(orientation));
}

template <class S>
Form<S> differentiate_coefficients(const Form<S>& a) {
  return a.map([](const S& c) { return ScalarTraits<S>::derivative(c); });
}

template <class S>
double sup_norm(const Form<S>& a) {
  double m = 0.0;
  for (const auto& [mask, c] : a.terms()) m = std::max(m, ScalarTraits<S>::magnitude(c));
  return m;
}

}  // namespace stableforms
