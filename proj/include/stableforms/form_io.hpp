#pragma once

#include <fstream>
#include <map>
#include <regex>
#include <sstream>
#include <string>

#include <json.hpp>

#include "stableforms/expr.hpp"
#include "stableforms/form.hpp"

namespace stableforms {

/// A form whose coefficients are still expressions, so one parsed source can
/// be instantiated in any backend.
struct FormSpec {
  int degree = 0;
  std::map<Mask, Expr, MaskLess> coeffs;

  template <class F>
  auto instantiate(F&& convert) const {
    using S = decltype(convert(std::declval<const Expr&>()));
    Form<S> out(degree);
    for (const auto& [m, e] : coeffs) out.add(m, convert(e));
    return out;
  }

  Form<DiffPoly> symbolic() const { return instantiate([](const Expr& e) { return to_diffpoly(e); }); }
  Form<QuadraticScalar> exact() const { return instantiate([](const Expr& e) { return to_exact(e); }); }
  Form<Jet> at(double t, const std::map<std::string, double>& params = {}) const {
    return instantiate([&](const Expr& e) { return eval_jet(e, t, params); });
  }

  bool depends_on_time() const {
    for (const auto& [m, e] : coeffs)
      if (stableforms::depends_on_time(e)) return true;
    return false;
  }
};

namespace detail {

inline bool is_basis_name(const std::string& name) {
  static const std::regex re("e[1-6]+");
  return std::regex_match(name, re);
}

using SpecMap = std::map<Mask, Expr>;

inline Expr simplify_mul(const Expr& a, const Expr& b) {
  auto is_one = [](const Expr& e) { return e->op == ExprOp::Number && e->number == 1; };
  if (is_one(a)) return b;
  if (is_one(b)) return a;
  return ex::mul(a, b);
}

inline void accumulate(SpecMap& into, Mask m, const Expr& c) {
  auto it = into.find(m);
  if (it == into.end()) {
    into.emplace(m, c);
  } else {
    it->second = ex::add(it->second, c);
  }
}

inline bool has_basis(const SpecMap& s) {
  for (const auto& [m, e] : s)
    if (m != 0) return true;
  return false;
}

inline SpecMap to_spec(const Expr& e) {
  switch (e->op) {
    case ExprOp::Param:
      if (is_basis_name(e->name)) {
        auto [m, sign] = parse_indices(e->name.substr(1));
        if (sign == 0) return {};
        return {{m, sign > 0 ? ex::number(1) : ex::neg(ex::number(1))}};
      }
      return {{Mask(0), e}};
    case ExprOp::Neg: {
      SpecMap out;
      for (auto& [m, c] : to_spec(e->args[0])) out.emplace(m, ex::neg(c));
      return out;
    }
    case ExprOp::Add:
    case ExprOp::Sub: {
      SpecMap out = to_spec(e->args[0]);
      for (auto& [m, c] : to_spec(e->args[1])) accumulate(out, m, e->op == ExprOp::Add ? c : ex::neg(c));
      return out;
    }
    case ExprOp::Mul: {
      SpecMap a = to_spec(e->args[0]);
      SpecMap b = to_spec(e->args[1]);
      SpecMap out;
      for (auto& [ma, ca] : a)
        for (auto& [mb, cb] : b) {
          int s = wedge_sign(ma, mb);
          if (s == 0) continue;
          Expr prod = simplify_mul(ca, cb);
          accumulate(out, static_cast<Mask>(ma | mb), s > 0 ? prod : ex::neg(prod));
        }
      return out;
    }
    case ExprOp::Div: {
      SpecMap den = to_spec(e->args[1]);
      if (has_basis(den)) throw Error(ErrorKind::ParseError, "division by a form in " + print_expr(e));
      SpecMap out;
      for (auto& [m, c] : to_spec(e->args[0])) out.emplace(m, ex::div(c, e->args[1]));
      return out;
    }
    case ExprOp::Pow:
    case ExprOp::Exp:
    case ExprOp::Sqrt:
      for (const auto& a : e->args)
        if (has_basis(to_spec(a))) throw Error(ErrorKind::ParseError, "nonlinear use of a basis form in " + print_expr(e));
      return {{Mask(0), e}};
    case ExprOp::Number:
    case ExprOp::Time: return {{Mask(0), e}};
  }
  return {};
}

}  // namespace detail

/// Parses "p1*e135 + p2*e146 - e245" or "-sqrt(3)*(e23+e45)". Basis symbols
/// are e followed by indices 1-6 in any order; the sorting sign is applied.
/// The literal "0" denotes the zero form of `zero_degree`.
inline FormSpec parse_form(const std::string& src, int zero_degree = -1) {
  Expr e = parse_expr(src);
  detail::SpecMap raw = detail::to_spec(e);
  FormSpec spec;
  int degree = -1;
  bool any_basis = false;
  for (const auto& [m, c] : raw) {
    if (m != 0) any_basis = true;
    int d = mask_degree(m);
    if (degree < 0) {
      degree = d;
    } else if (d != degree) {
      throw Error(ErrorKind::DegreeMismatch, "mixed degrees " + std::to_string(degree) + " and " +
                                                 std::to_string(d) + " in '" + src + "'");
    }
  }
  if (!any_basis) {
    // a bare scalar: allow it only as the zero form
    bool zero = true;
    for (const auto& [m, c] : raw) {
      try {
        if (!to_exact(c).is_zero()) zero = false;
      } catch (const Error&) {
        zero = false;
      }
    }
    if (!zero || zero_degree < 0)
      throw Error(ErrorKind::ParseError, "no basis forms in '" + src + "'");
    spec.degree = zero_degree;
    return spec;
  }
  spec.degree = degree;
  for (const auto& [m, c] : raw) spec.coeffs.emplace(m, c);
  return spec;
}

/// {"135": "p1", "146": "-p2"}; keys may be unsorted index strings.
inline FormSpec parse_form_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorKind::ParseError, "form JSON must be an object");
  FormSpec spec;
  spec.degree = -1;
  for (const auto& [key, value] : j.items()) {
    auto [m, sign] = parse_indices(key);
    int d = static_cast<int>(key.size());
    if (spec.degree < 0) spec.degree = d;
    if (d != spec.degree) throw Error(ErrorKind::DegreeMismatch, "mixed degrees in form JSON");
    if (sign == 0) continue;
    Expr c = value.is_string() ? parse_expr(value.get<std::string>())
                               : parse_expr(value.dump());
    if (sign < 0) c = ex::neg(c);
    auto it = spec.coeffs.find(m);
    if (it == spec.coeffs.end()) {
      spec.coeffs.emplace(m, c);
    } else {
      it->second = ex::add(it->second, c);
    }
  }
  if (spec.degree < 0) throw Error(ErrorKind::ParseError, "empty form JSON");
  return spec;
}

template <class S>
nlohmann::json form_to_json(const Form<S>& f) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [m, c] : f.terms()) {
    CoeffText ct = ScalarTraits<S>::text(c);
    j[mask_digits(m)] = (ct.negative ? "-" : "") + (ct.compound && ct.negative ? "(" + ct.text + ")" : ct.text);
  }
  return j;
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::InvalidArgument, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Strips '#' comments and joins lines, so fixture files can spread a long
/// form over several lines.
inline std::string strip_comments(const std::string& text) {
  std::string out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    out += line;
    out += ' ';
  }
  return out;
}

/// Form source: inline text, "@path" for a file, JSON when the text starts
/// with '{'.
inline FormSpec load_form(const std::string& source, int zero_degree = -1) {
  std::string text = source;
  if (!text.empty() && text[0] == '@') text = strip_comments(read_text_file(text.substr(1)));
  auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') return parse_form_json(nlohmann::json::parse(text));
  return parse_form(text, zero_degree);
}

}  // namespace stableforms
