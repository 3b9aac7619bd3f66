#pragma once

#include <array>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "stableforms/error.hpp"
#include "stableforms/form.hpp"
#include "stableforms/form_io.hpp"
#include "stableforms/invariant.hpp"
#include "stableforms/systems.hpp"

#ifndef STABLEFORMS_DEFAULT_PRESET_DIR
#define STABLEFORMS_DEFAULT_PRESET_DIR ""
#endif

namespace stableforms {

using ExactForm = Form<QuadraticScalar>;

/// "-sqrt(3)*(e23 + e45)" when all coefficients share one magnitude.
inline std::string factored_form_str(const ExactForm& f) {
  if (f.terms().size() < 2) return f.str();
  QuadraticScalar c = f.terms().begin()->second;
  bool negative = c.sign() < 0;
  if (negative) c = -c;
  for (const auto& [m, x] : f.terms())
    if (!(x == c || x == -c)) return f.str();
  if (c == QuadraticScalar(1)) return f.str();
  ExactForm inner = (negative ? -c : c).inverse() * f;
  return (negative ? "-" : "") + c.str() + "*(" + inner.str() + ")";
}

/// Six basis 1-forms with e^1 = dt and constant structure equations.
class Coframe {
 public:
  /// de[i - 1] is de^i. Validates de^1 = 0 and d o d = 0. Without isotropy
  /// the check runs on every basis 1-form. With isotropy generators (the
  /// infinitesimal action of K on 1-forms of G/K) the structure equations
  /// only define d on K-invariant forms, so the check runs there, together
  /// with the requirement that d maps invariant forms to invariant forms.
  Coframe(std::string name, std::array<ExactForm, kDim> de, std::vector<Endo<QuadraticScalar>> isotropy = {})
      : name_(std::move(name)), de_(std::move(de)), isotropy_(std::move(isotropy)) {
    for (int i = 0; i < kDim; ++i) {
      if (de_[i].degree() != 2)
        throw Error(ErrorKind::DegreeMismatch, "de" + std::to_string(i + 1) + " must be a 2-form");
    }
    if (!de_[0].is_zero()) throw Error(ErrorKind::InvalidArgument, "de1 must vanish since e1 = dt");
    d_basis_[0] = ExactForm(1);
    for (int m = 1; m < 64; ++m) d_basis_[m] = expand_basis(static_cast<Mask>(m));
    if (isotropy_.empty()) {
      for (int i = 1; i <= kDim; ++i) {
        ExactForm dd = d_constant(de_[i - 1]);
        if (!dd.is_zero())
          throw Error(ErrorKind::JacobiFailure,
                      "d(de" + std::to_string(i) + ") = " + dd.str() + " is not zero (first failing basis form e" +
                          std::to_string(i) + ")");
      }
      return;
    }
    for (int k = 1; k <= kDim - 2; ++k) {
      for (const ExactForm& b : invariant_forms(isotropy_, k)) {
        ExactForm db = d_constant(b);
        for (const auto& gen : isotropy_) {
          if (!derivation_apply(gen, db).is_zero())
            throw Error(ErrorKind::JacobiFailure, "d(" + b.str() + ") = " + db.str() + " is not invariant");
        }
        ExactForm dd = d_constant(db);
        if (!dd.is_zero())
          throw Error(ErrorKind::JacobiFailure, "d(d(" + b.str() + ")) = " + dd.str() + " is not zero");
      }
    }
  }

  const std::string& name() const { return name_; }
  const ExactForm& structure(int i) const { return de_.at(i - 1); }
  const ExactForm& d_basis(Mask m) const { return d_basis_[m]; }
  const std::vector<Endo<QuadraticScalar>>& isotropy() const { return isotropy_; }

  /// Whether a constant-coefficient form is annihilated by the isotropy.
  bool is_invariant(const ExactForm& a) const {
    for (const auto& gen : isotropy_)
      if (!derivation_apply(gen, a).is_zero()) return false;
    return true;
  }

  /// The structure equation of e^i as displayed: "-sqrt(3)*(e23 + e45)".
  std::string structure_str(int i) const { return factored_form_str(structure(i)); }

  std::string to_toml() const {
    std::ostringstream os;
    os << "dim = 6\ndt = \"e1\"\n\n[d]\n";
    for (int i = 1; i <= kDim; ++i) os << "e" << i << " = \"" << structure_str(i) << "\"\n";
    if (!isotropy_.empty()) {
      os << "\n[isotropy]\n";
      for (int j = 1; j <= kDim; ++j) {
        ExactForm img(1);
        for (int i = 1; i <= kDim; ++i) img.add(mask_of({i}), isotropy_[0].at(i, j));
        if (!img.is_zero()) os << "e" << j << " = \"" << img.str() << "\"\n";
      }
    }
    return os.str();
  }

 private:
  ExactForm expand_basis(Mask m) const {
    // d(e^{i1} ^ ... ^ e^{ik}) = sum_p (-1)^p e^{i1..} ^ de^{ip} ^ e^{..ik}
    auto idx = mask_indices(m);
    if (idx.size() == kDim) return ExactForm(kDim);
    ExactForm out(static_cast<int>(idx.size()) + 1);
    for (std::size_t p = 0; p < idx.size(); ++p) {
      ExactForm term = ExactForm::basis(0);
      for (std::size_t q = 0; q < idx.size(); ++q) {
        term = wedge(term, q == p ? de_[idx[q] - 1] : ExactForm::basis(mask_of({idx[q]})));
      }
      out += (p % 2) ? -term : term;
    }
    return out;
  }

  ExactForm d_constant(const ExactForm& a) const {
    ExactForm out(a.degree() + 1);
    for (const auto& [m, c] : a.terms()) out += c * d_basis_[m];
    return out;
  }

  std::string name_;
  std::array<ExactForm, kDim> de_;
  std::vector<Endo<QuadraticScalar>> isotropy_;
  std::array<ExactForm, 64> d_basis_;
};

/// d(f e^I) = f' e^1 ^ e^I + f d(e^I).
template <class S>
Form<S> d(const Coframe& cf, const Form<S>& a) {
  if (a.degree() >= kDim) throw Error(ErrorKind::DegreeOverflow, "d of a 6-form");
  Form<S> out(a.degree() + 1);
  for (const auto& [m, c] : a.terms()) {
    if (!(m & 1u)) out.add(static_cast<Mask>(m | 1u), ScalarTraits<S>::derivative(c));
    for (const auto& [dm, dc] : cf.d_basis(m).terms()) out.add(dm, ScalarTraits<S>::from_exact(dc) * c);
  }
  return out;
}

struct ClosureEquation {
  Mask mask;         // basis (k+1)-form the coefficient belongs to
  DiffPoly raw;
  DiffPoly normalized;
};

/// Coefficient list of d(alpha); each entry must vanish.
struct ClosureSystem {
  std::vector<ClosureEquation> entries;

  bool empty() const { return entries.empty(); }

  /// Normalized equations, duplicates removed, in basis order.
  std::vector<DiffPoly> equations() const {
    std::vector<DiffPoly> out;
    for (const auto& e : entries) {
      bool seen = false;
      for (const auto& o : out) seen = seen || o == e.normalized;
      if (!seen) out.push_back(e.normalized);
    }
    return out;
  }

  std::vector<std::string> strings() const {
    std::vector<std::string> out;
    for (const auto& eq : equations()) out.push_back(eq.str() + " = 0");
    return out;
  }
};

inline ClosureSystem system_from_form(const Form<DiffPoly>& f) {
  ClosureSystem sys;
  for (const auto& [m, c] : f.terms()) sys.entries.push_back({m, c, normalize_equation(c)});
  return sys;
}

inline ClosureSystem closure_system(const Coframe& cf, const Form<DiffPoly>& a) { return system_from_form(d(cf, a)); }

// ---------------------------------------------------------------------------
// Presets and coframe files.

namespace detail {

struct PresetText {
  const char* name;
  std::array<const char*, kDim> de;
  std::array<const char*, kDim> isotropy;  // image of e^i under the generator, "0" if fixed
};

inline const std::vector<PresetText>& builtin_presets() {
  static const std::vector<PresetText> presets = {
      {"a1", {"0", "-2*e34", "2*e24", "-2*e23", "0", "0"}, {}},
      {"c3",
       {"0", "-sqrt(3)*e36", "sqrt(3)*e26", "-sqrt(3)*e56", "sqrt(3)*e46", "-sqrt(3)*(e23 + e45)"},
       {"0", "-e3", "e2", "e5", "-e4", "0"}},
      {"b1-diagonal",
       {"0", "1/2*(e35 - e46)", "-1/2*e25", "1/2*e26", "1/2*e23", "-1/2*e24"},
       {"0", "0", "e5", "e6", "-e3", "-e4"}},
      {"abelian", {"0", "0", "0", "0", "0", "0"}, {}},
  };
  return presets;
}

inline std::string unquote(const std::string& v, const std::string& where) {
  if (v.size() >= 2 && v.front() == '"' && v.back() == '"') return v.substr(1, v.size() - 2);
  throw Error(ErrorKind::ParseError, "expected a quoted string for " + where);
}

inline std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace detail

/// de[i - 1] and isotropy[i - 1] are form strings; an isotropy entry is the
/// image of e^i under the generator. All-zero isotropy means none.
inline Coframe coframe_from_strings(const std::string& name, const std::array<std::string, kDim>& de,
                                    const std::array<std::string, kDim>& isotropy = {}) {
  std::array<ExactForm, kDim> forms;
  for (int i = 0; i < kDim; ++i) {
    FormSpec spec = parse_form(de[i], 2);
    if (spec.degree != 2) throw Error(ErrorKind::DegreeMismatch, "de" + std::to_string(i + 1) + " must be a 2-form");
    forms[i] = spec.exact();
  }
  Endo<QuadraticScalar> gen;
  bool any = false;
  for (int j = 0; j < kDim; ++j) {
    if (isotropy[j].empty()) continue;
    FormSpec spec = parse_form(isotropy[j], 1);
    if (spec.degree != 1)
      throw Error(ErrorKind::DegreeMismatch, "isotropy image of e" + std::to_string(j + 1) + " must be a 1-form");
    ExactForm image = spec.exact();
    for (const auto& [m, c] : image.terms()) {
      gen.at(mask_indices(m)[0], j + 1) = c;
      any = true;
    }
  }
  std::vector<Endo<QuadraticScalar>> gens;
  if (any) gens.push_back(gen);
  return Coframe(name, forms, gens);
}

/// Reads the small TOML subset used for coframes:
///   dim = 6
///   dt = "e1"
///   [d]
///   e2 = "-2*e34"
///   [isotropy]          # optional: image of e^i under the K-generator
///   e2 = "-e3"
inline Coframe parse_coframe_toml(const std::string& text, const std::string& name) {
  std::array<std::string, kDim> de;
  de.fill("0");
  std::array<std::string, kDim> isotropy;
  std::string section;
  bool saw_dim = false;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string where = name + ":" + std::to_string(lineno);
    // '#' inside quoted values is not used by coframe files
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw Error(ErrorKind::ParseError, "bad section header at " + where);
      section = detail::trim(line.substr(1, line.size() - 2));
      if (section != "d" && section != "isotropy") throw Error(ErrorKind::ParseError, "unknown section [" + section + "] at " + where);
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string::npos) throw Error(ErrorKind::ParseError, "expected key = value at " + where);
    std::string key = detail::trim(line.substr(0, eq));
    std::string value = detail::trim(line.substr(eq + 1));
    if (section.empty()) {
      if (key == "dim") {
        if (value != "6") throw Error(ErrorKind::InvalidArgument, "only dim = 6 is supported (" + where + ")");
        saw_dim = true;
      } else if (key == "dt") {
        if (detail::unquote(value, where) != "e1")
          throw Error(ErrorKind::InvalidArgument, "dt must be \"e1\" (" + where + ")");
      } else if (key != "name") {
        throw Error(ErrorKind::ParseError, "unknown key '" + key + "' at " + where);
      }
    } else {
      if (key.size() != 2 || key[0] != 'e' || key[1] < '1' || key[1] > '6')
        throw Error(ErrorKind::ParseError, "structure key must be e1..e6, got '" + key + "' at " + where);
      (section == "d" ? de : isotropy)[key[1] - '1'] = detail::unquote(value, where);
    }
  }
  if (!saw_dim) throw Error(ErrorKind::ParseError, "missing dim = 6 in " + name);
  return coframe_from_strings(name, de, isotropy);
}

inline std::vector<std::string> builtin_preset_names() {
  std::vector<std::string> out;
  for (const auto& p : detail::builtin_presets()) out.emplace_back(p.name);
  return out;
}

inline Coframe builtin_preset(const std::string& name) {
  for (const auto& p : detail::builtin_presets()) {
    if (name == p.name) {
      std::array<std::string, kDim> de;
      std::array<std::string, kDim> isotropy;
      for (int i = 0; i < kDim; ++i) {
        de[i] = p.de[i];
        if (p.isotropy[i] && std::string(p.isotropy[i]) != "0") isotropy[i] = p.isotropy[i];
      }
      return coframe_from_strings(name, de, isotropy);
    }
  }
  throw Error(ErrorKind::InvalidArgument, "unknown coframe preset '" + name + "'");
}

inline std::string preset_directory() {
  if (const char* env = std::getenv("STABLEFORMS_PRESETS"); env && *env) return env;
  return STABLEFORMS_DEFAULT_PRESET_DIR;
}

/// A path to a .toml file, a preset file in the preset directory, or a
/// built-in preset, tried in that order.
inline Coframe load_coframe(const std::string& source) {
  namespace fs = std::filesystem;
  if (source.find('/') != std::string::npos || (source.size() > 5 && source.substr(source.size() - 5) == ".toml")) {
    return parse_coframe_toml(read_text_file(source), fs::path(source).stem().string());
  }
  std::string dir = preset_directory();
  if (!dir.empty()) {
    fs::path p = fs::path(dir) / (source + ".toml");
    std::error_code ec;
    if (fs::exists(p, ec)) return parse_coframe_toml(read_text_file(p.string()), source);
  }
  return builtin_preset(source);
}

}  // namespace stableforms
