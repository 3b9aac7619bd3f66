#pragma once

#include <algorithm>
#include <cctype>
#include <deque>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "stableforms/error.hpp"
#include "stableforms/quadratic.hpp"

namespace stableforms {

namespace detail {

struct SymbolRecord {
  std::string name;
  std::string prefix;  // name without trailing digits
  long number = -1;    // trailing digits, -1 when absent
};

/// Process-wide interned symbol names. Records are immutable and never
/// freed, so comparisons through the returned pointers need no locking.
class SymbolTable {
 public:
  static SymbolTable& instance() {
    static SymbolTable table;
    return table;
  }

  const SymbolRecord* intern(std::string_view name) {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = index_.find(std::string(name));
    if (it != index_.end()) return it->second;
    SymbolRecord rec;
    rec.name = std::string(name);
    std::size_t cut = rec.name.size();
    while (cut > 0 && std::isdigit(static_cast<unsigned char>(rec.name[cut - 1]))) --cut;
    rec.prefix = rec.name.substr(0, cut);
    if (cut < rec.name.size() && rec.name.size() - cut < 12) rec.number = std::stol(rec.name.substr(cut));
    records_.push_back(std::move(rec));
    const SymbolRecord* ptr = &records_.back();
    index_.emplace(ptr->name, ptr);
    return ptr;
  }

 private:
  std::mutex mutex_;
  std::deque<SymbolRecord> records_;
  std::unordered_map<std::string, const SymbolRecord*> index_;
};

}  // namespace detail

/// A formal coefficient function p, or one of its derivatives p', p'', ...
class Var {
 public:
  Var() = default;
  explicit Var(std::string_view base, unsigned order = 0)
      : sym_(detail::SymbolTable::instance().intern(base)), order_(order) {}

  /// Parses "p12''" into (p12, 2).
  static Var parse(std::string_view text) {
    unsigned order = 0;
    while (!text.empty() && text.back() == '\'') {
      text.remove_suffix(1);
      ++order;
    }
    if (text.empty()) throw Error(ErrorKind::InvalidArgument, "empty symbol name");
    return Var(text, order);
  }

  const std::string& base() const { return sym_->name; }
  unsigned order() const { return order_; }
  Var derivative() const { return with_order(order_ + 1); }
  Var with_order(unsigned k) const {
    Var v = *this;
    v.order_ = k;
    return v;
  }

  std::string str() const { return sym_->name + std::string(order_, '\''); }

  friend bool operator==(const Var& a, const Var& b) { return a.sym_ == b.sym_ && a.order_ == b.order_; }

  /// Higher derivative order first, then natural order of names (p2 < p10).
  friend std::strong_ordering operator<=>(const Var& a, const Var& b) {
    if (a.order_ != b.order_) return a.order_ <=> b.order_;
    if (a.sym_ == b.sym_) return std::strong_ordering::equal;
    if (int c = a.sym_->prefix.compare(b.sym_->prefix); c != 0) return c <=> 0;
    if (a.sym_->number != b.sym_->number) return a.sym_->number <=> b.sym_->number;
    return a.sym_->name.compare(b.sym_->name) <=> 0;
  }

 private:
  const detail::SymbolRecord* sym_ = nullptr;
  unsigned order_ = 0;
};

/// Product of powers of variables, stored with the greatest variable first.
class Monomial {
 public:
  using Factor = std::pair<Var, unsigned>;

  Monomial() = default;
  explicit Monomial(const Var& v, unsigned e = 1) {
    if (e > 0) factors_.emplace_back(v, e);
  }

  const std::vector<Factor>& factors() const { return factors_; }
  bool is_one() const { return factors_.empty(); }

  unsigned degree() const {
    unsigned d = 0;
    for (const auto& f : factors_) d += f.second;
    return d;
  }

  unsigned exponent(const Var& v) const {
    for (const auto& f : factors_)
      if (f.first == v) return f.second;
    return 0;
  }

  friend Monomial operator*(const Monomial& a, const Monomial& b) {
    Monomial out;
    out.factors_.reserve(a.factors_.size() + b.factors_.size());
    auto i = a.factors_.begin();
    auto j = b.factors_.begin();
    while (i != a.factors_.end() && j != b.factors_.end()) {
      if (i->first == j->first) {
        out.factors_.emplace_back(i->first, i->second + j->second);
        ++i;
        ++j;
      } else if (i->first > j->first) {
        out.factors_.push_back(*i++);
      } else {
        out.factors_.push_back(*j++);
      }
    }
    out.factors_.insert(out.factors_.end(), i, a.factors_.end());
    out.factors_.insert(out.factors_.end(), j, b.factors_.end());
    return out;
  }

  /// Removes one power of v; v must divide the monomial.
  Monomial without_one(const Var& v) const {
    Monomial out;
    for (const auto& f : factors_) {
      if (f.first == v) {
        if (f.second > 1) out.factors_.emplace_back(f.first, f.second - 1);
      } else {
        out.factors_.push_back(f);
      }
    }
    return out;
  }

  /// Exact quotient when `d` divides this monomial.
  std::optional<Monomial> divide(const Monomial& d) const {
    Monomial out;
    auto i = factors_.begin();
    auto j = d.factors_.begin();
    while (i != factors_.end()) {
      if (j != d.factors_.end() && i->first == j->first) {
        if (i->second < j->second) return std::nullopt;
        if (i->second > j->second) out.factors_.emplace_back(i->first, i->second - j->second);
        ++i;
        ++j;
      } else if (j != d.factors_.end() && j->first > i->first) {
        return std::nullopt;
      } else {
        out.factors_.push_back(*i++);
      }
    }
    if (j != d.factors_.end()) return std::nullopt;
    return out;
  }

  friend bool operator==(const Monomial& a, const Monomial& b) { return a.factors_ == b.factors_; }

  /// Graded lexicographic order.
  friend std::strong_ordering operator<=>(const Monomial& a, const Monomial& b) {
    unsigned da = a.degree();
    unsigned db = b.degree();
    if (da != db) return da <=> db;
    std::size_t n = std::min(a.factors_.size(), b.factors_.size());
    for (std::size_t k = 0; k < n; ++k) {
      const auto& fa = a.factors_[k];
      const auto& fb = b.factors_[k];
      if (!(fa.first == fb.first)) return fa.first <=> fb.first;
      if (fa.second != fb.second) return fa.second <=> fb.second;
    }
    return a.factors_.size() <=> b.factors_.size();
  }

  /// Variables printed in ascending order: "p1*p4^2".
  std::string str() const {
    std::string out;
    for (auto it = factors_.rbegin(); it != factors_.rend(); ++it) {
      if (!out.empty()) out += "*";
      out += it->first.str();
      if (it->second > 1) out += "^" + std::to_string(it->second);
    }
    return out;
  }

 private:
  std::vector<Factor> factors_;
};

/// Multivariate polynomial with Q(sqrt m) coefficients in formal symbols
/// closed under a formal derivation p -> p'.
///
/// Terms are kept sorted by decreasing monomial with nonzero coefficients,
/// so structural equality is polynomial equality.
class DiffPoly {
 public:
  struct Term {
    Monomial monomial;
    QuadraticScalar coeff;
    friend bool operator==(const Term&, const Term&) = default;
  };

  DiffPoly() = default;
  DiffPoly(long c) : DiffPoly(QuadraticScalar(c)) {}  // NOLINT
  DiffPoly(const Rational& c) : DiffPoly(QuadraticScalar(c)) {}  // NOLINT
  DiffPoly(const QuadraticScalar& c) {  // NOLINT
    if (!c.is_zero()) terms_.push_back({Monomial(), c});
  }
  DiffPoly(const Var& v) { terms_.push_back({Monomial(v), QuadraticScalar(1)}); }  // NOLINT

  static DiffPoly symbol(std::string_view name) { return DiffPoly(Var::parse(name)); }
  static DiffPoly term(const QuadraticScalar& c, const Monomial& m) {
    DiffPoly p;
    if (!c.is_zero()) p.terms_.push_back({m, c});
    return p;
  }

  const std::vector<Term>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  bool is_constant() const { return terms_.empty() || (terms_.size() == 1 && terms_[0].monomial.is_one()); }
  QuadraticScalar constant_value() const {
    if (!is_constant()) throw Error(ErrorKind::InvalidArgument, "polynomial is not constant: " + str());
    return terms_.empty() ? QuadraticScalar() : terms_[0].coeff;
  }
  /// Coefficient of the monomial 1.
  QuadraticScalar constant_term() const {
    if (!terms_.empty() && terms_.back().monomial.is_one()) return terms_.back().coeff;
    return {};
  }

  unsigned total_degree() const { return terms_.empty() ? 0 : terms_.front().monomial.degree(); }
  const Term& leading() const {
    if (terms_.empty()) throw Error(ErrorKind::InvalidArgument, "leading term of zero polynomial");
    return terms_.front();
  }

  QuadraticScalar coefficient(const Monomial& m) const {
    for (const auto& t : terms_)
      if (t.monomial == m) return t.coeff;
    return {};
  }

  std::set<Var> variables() const {
    std::set<Var> vs;
    for (const auto& t : terms_)
      for (const auto& f : t.monomial.factors()) vs.insert(f.first);
    return vs;
  }

  DiffPoly operator-() const {
    DiffPoly out = *this;
    for (auto& t : out.terms_) t.coeff = -t.coeff;
    return out;
  }

  DiffPoly& operator+=(const DiffPoly& o) {
    terms_ = merge(terms_, o.terms_, false);
    return *this;
  }
  DiffPoly& operator-=(const DiffPoly& o) {
    terms_ = merge(terms_, o.terms_, true);
    return *this;
  }
  DiffPoly& operator*=(const DiffPoly& o) {
    *this = *this * o;
    return *this;
  }

  friend DiffPoly operator+(DiffPoly a, const DiffPoly& b) { return a += b; }
  friend DiffPoly operator-(DiffPoly a, const DiffPoly& b) { return a -= b; }

  friend DiffPoly operator*(const DiffPoly& a, const DiffPoly& b) {
    if (a.is_zero() || b.is_zero()) return {};
    if (a.is_constant()) return b.scaled(a.terms_[0].coeff);
    if (b.is_constant()) return a.scaled(b.terms_[0].coeff);
    std::map<Monomial, QuadraticScalar, std::greater<>> acc;
    for (const auto& x : a.terms_) {
      for (const auto& y : b.terms_) {
        auto [it, inserted] = acc.try_emplace(x.monomial * y.monomial, x.coeff * y.coeff);
        if (!inserted) it->second += x.coeff * y.coeff;
      }
    }
    DiffPoly out;
    out.terms_.reserve(acc.size());
    for (auto& [m, c] : acc)
      if (!c.is_zero()) out.terms_.push_back({m, c});
    return out;
  }

  DiffPoly scaled(const QuadraticScalar& c) const {
    if (c.is_zero()) return {};
    DiffPoly out = *this;
    for (auto& t : out.terms_) t.coeff *= c;
    return out;
  }

  /// Division by a nonzero constant polynomial.
  friend DiffPoly operator/(const DiffPoly& a, const DiffPoly& b) {
    if (b.is_zero()) throw Error(ErrorKind::DivisionByZero, "polynomial division by zero");
    if (!b.is_constant()) throw Error(ErrorKind::NotPolynomial, "division by non-constant " + b.str());
    return a.scaled(b.terms_[0].coeff.inverse());
  }

  DiffPoly pow(unsigned n) const {
    DiffPoly out(1);
    DiffPoly base = *this;
    while (n) {
      if (n & 1u) out *= base;
      n >>= 1u;
      if (n) base = base * base;
    }
    return out;
  }

  /// Formal derivation extending v -> v'.
  DiffPoly derivative() const {
    std::map<Monomial, QuadraticScalar, std::greater<>> acc;
    for (const auto& t : terms_) {
      for (const auto& [v, e] : t.monomial.factors()) {
        Monomial m = t.monomial.without_one(v) * Monomial(v.derivative());
        QuadraticScalar c = t.coeff * QuadraticScalar(static_cast<long>(e));
        auto [it, inserted] = acc.try_emplace(m, c);
        if (!inserted) it->second += c;
      }
    }
    DiffPoly out;
    for (auto& [m, c] : acc)
      if (!c.is_zero()) out.terms_.push_back({m, c});
    return out;
  }

  /// Replaces variables by polynomials. A rule for (p, k) also covers
  /// (p, k + j) through j-fold differentiation unless a more specific rule
  /// exists.
  DiffPoly substitute(const std::map<Var, DiffPoly>& rules) const {
    if (rules.empty()) return *this;
    std::map<Var, DiffPoly> cache;
    auto image = [&](const Var& v) -> std::optional<DiffPoly> {
      if (auto it = cache.find(v); it != cache.end()) return it->second;
      for (unsigned k = v.order() + 1; k-- > 0;) {
        auto r = rules.find(v.with_order(k));
        if (r == rules.end()) continue;
        DiffPoly img = r->second;
        for (unsigned j = k; j < v.order(); ++j) img = img.derivative();
        cache.emplace(v, img);
        return img;
      }
      return std::nullopt;
    };
    DiffPoly out;
    for (const auto& t : terms_) {
      DiffPoly prod(t.coeff);
      Monomial kept;
      for (const auto& [v, e] : t.monomial.factors()) {
        if (auto img = image(v)) {
          prod *= img->pow(e);
        } else {
          kept = kept * Monomial(v, e);
        }
      }
      out += prod * DiffPoly::term(QuadraticScalar(1), kept);
    }
    return out;
  }

  /// Numeric evaluation; every variable must be bound.
  double evaluate(const std::map<Var, double>& values) const {
    double total = 0.0;
    for (const auto& t : terms_) {
      double x = t.coeff.to_double();
      for (const auto& [v, e] : t.monomial.factors()) {
        auto it = values.find(v);
        if (it == values.end()) throw Error(ErrorKind::EvalError, "unbound symbol " + v.str());
        for (unsigned k = 0; k < e; ++k) x *= it->second;
      }
      total += x;
    }
    return total;
  }

  friend bool operator==(const DiffPoly& a, const DiffPoly& b) { return a.terms_ == b.terms_; }

  /// Expanded rendering, e.g. "p1^2*p4^2 - 2*p1*p2*p3*p4 + p2^2*p3^2".
  std::string str() const {
    if (terms_.empty()) return "0";
    std::string out;
    bool first = true;
    for (const auto& t : terms_) {
      QuadraticScalar c = t.coeff;
      bool negative = c.sign() < 0 && (c.is_rational() || c.rational_part() == 0);
      if (negative) c = -c;
      if (first) {
        if (negative) out += "-";
      } else {
        out += negative ? " - " : " + ";
      }
      first = false;
      std::string m = t.monomial.str();
      if (m.empty()) {
        out += c.str();
      } else if (c == QuadraticScalar(1)) {
        out += m;
      } else {
        out += c.str() + "*" + m;
      }
    }
    return out;
  }

  friend std::ostream& operator<<(std::ostream& os, const DiffPoly& p) { return os << p.str(); }

 private:
  static std::vector<Term> merge(const std::vector<Term>& a, const std::vector<Term>& b, bool negate_b) {
    std::vector<Term> out;
    out.reserve(a.size() + b.size());
    auto i = a.begin();
    auto j = b.begin();
    while (i != a.end() || j != b.end()) {
      if (j == b.end() || (i != a.end() && i->monomial > j->monomial)) {
        out.push_back(*i++);
      } else if (i == a.end() || j->monomial > i->monomial) {
        out.push_back(negate_b ? Term{j->monomial, -j->coeff} : *j);
        ++j;
      } else {
        QuadraticScalar c = negate_b ? i->coeff - j->coeff : i->coeff + j->coeff;
        if (!c.is_zero()) out.push_back({i->monomial, c});
        ++i;
        ++j;
      }
    }
    return out;
  }

  std::vector<Term> terms_;
};

inline DiffPoly derivative(const DiffPoly& p) { return p.derivative(); }

/// Exact square root when p = s^2 for a polynomial s with leading coefficient
/// a positive rational square; returns s with positive leading coefficient.
inline std::optional<DiffPoly> polynomial_sqrt(const DiffPoly& p) {
  if (p.is_zero()) return DiffPoly();
  const auto& lead = p.leading();
  if (!lead.coeff.is_rational() || lead.coeff.sign() <= 0) return std::nullopt;
  // square root of the leading monomial
  Monomial root_m;
  for (const auto& [v, e] : lead.monomial.factors()) {
    if (e % 2) return std::nullopt;
    root_m = root_m * Monomial(v, e / 2);
  }
  const Rational& c = lead.coeff.rational_part();
  Integer num, den;
  if (!mpz_perfect_square_p(c.get_num().get_mpz_t()) || !mpz_perfect_square_p(c.get_den().get_mpz_t()))
    return std::nullopt;
  num = sqrt(c.get_num());
  den = sqrt(c.get_den());
  DiffPoly root = DiffPoly::term(QuadraticScalar(Rational(num, den)), root_m);
  const DiffPoly::Term lead_root = root.leading();
  DiffPoly rem = p - root * root;
  // Each step fixes the next term of the root from the leading remainder term.
  for (std::size_t guard = 0; !rem.is_zero() && guard < p.terms().size() + 4; ++guard) {
    const auto& lt = rem.leading();
    auto q = lt.monomial.divide(lead_root.monomial);
    if (!q) return std::nullopt;
    QuadraticScalar c2 = lt.coeff / (lead_root.coeff * QuadraticScalar(2));
    DiffPoly next = DiffPoly::term(c2, *q);
    if (next.leading().monomial >= lead_root.monomial) return std::nullopt;
    rem -= next * (root + root + next);
    root += next;
  }
  if (!rem.is_zero()) return std::nullopt;
  return root;
}

/// Rational content of p: the positive rational g such that p/g has coprime
/// integer coordinates (all rational and radical parts together).
inline Rational rational_content(const DiffPoly& p) {
  Integer num_gcd = 0;
  Integer den_lcm = 1;
  for (const auto& t : p.terms()) {
    for (const Rational* part : {&t.coeff.rational_part(), &t.coeff.radical_part()}) {
      if (*part == 0) continue;
      num_gcd = gcd(num_gcd, part->get_num());
      den_lcm = lcm(den_lcm, part->get_den());
    }
  }
  if (num_gcd == 0) return Rational(1);
  Rational g(num_gcd, den_lcm);
  g.canonicalize();
  return abs(g);
}

/// Renders p as "c*(s)^2" when p is a rational multiple of a square,
/// otherwise as "c*(q)" with the rational content pulled out.
inline std::string factored_str(const DiffPoly& p) {
  if (p.is_zero() || p.is_constant()) return p.str();
  Rational content = rational_content(p);
  if (p.leading().coeff.sign() < 0) content = -content;
  DiffPoly primitive = p.scaled(QuadraticScalar(Rational(1) / content));
  std::string prefix;
  if (content == -1) {
    prefix = "-";
  } else if (content != 1) {
    prefix = content.get_str() + "*";
  }
  if (auto root = polynomial_sqrt(primitive)) return prefix + "(" + root->str() + ")^2";
  if (prefix.empty()) return primitive.str();
  return prefix + "(" + primitive.str() + ")";
}

}  // namespace stableforms
