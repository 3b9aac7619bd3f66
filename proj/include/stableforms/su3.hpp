#pragma once

#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

#include "stableforms/coframe.hpp"
#include "stableforms/form_io.hpp"
#include "stableforms/hitchin.hpp"
#include "stableforms/systems.hpp"

namespace stableforms {

/// d of N * (-lambda)^(-r/2): the result has numerator
/// (-lambda) dN + (r/2) lambda' e1 ^ N and scale r + 2.
inline ScaledForm<DiffPoly> d_scaled(const Coframe& cf, const ScaledForm<DiffPoly>& a, const DiffPoly& lambda) {
  Form<DiffPoly> e1 = Form<DiffPoly>::basis(mask_of({1}));
  Form<DiffPoly> first = (-lambda) * d(cf, a.numerator);
  DiffPoly half_r(Rational(static_cast<long>(a.scale_exp), 2));
  Form<DiffPoly> second = (half_r * lambda.derivative()) * wedge(e1, a.numerator);
  return {first + second, a.scale_exp + 2};
}

struct Tolerances {
  double residual = 1e-9;
  double nonzero = 1e-6;
};

enum class ConditionStatus { Pass, Fail, Conditional, Skipped };

inline const char* status_name(ConditionStatus s) {
  switch (s) {
    case ConditionStatus::Pass: return "pass";
    case ConditionStatus::Fail: return "fail";
    case ConditionStatus::Conditional: return "conditional";
    case ConditionStatus::Skipped: return "skipped";
  }
  return "?";
}

struct ConditionResult {
  std::string condition;
  ConditionStatus status = ConditionStatus::Skipped;
  double residual = 0.0;
  std::string detail;
  std::vector<std::string> equations;  // symbolic mode only
};

struct SampleRecord {
  double t = 0.0;
  double lambda = 0.0;
  int volume_sign = 0;
  double domega_norm = 0.0;
  std::vector<std::vector<double>> metric;
};

struct SU3Report {
  std::string mode;
  std::string verdict;
  int orientation = 1;
  std::vector<ConditionResult> conditions;
  std::vector<SampleRecord> samples;

  const ConditionResult* find(const std::string& name) const {
    for (const auto& c : conditions)
      if (c.condition == name) return &c;
    return nullptr;
  }
  bool passed(const std::string& name) const {
    const ConditionResult* c = find(name);
    return c && c->status == ConditionStatus::Pass;
  }
};

inline const std::vector<std::string>& condition_names() {
  static const std::vector<std::string> names = {"stability", "compatibility", "normalization", "volume",
                                                 "closure", "balanced", "non-kahler", "positivity"};
  return names;
}

namespace detail {

inline std::string fmt_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

inline std::string overall_verdict(const SU3Report& r) {
  auto ok = [&](const char* n) { return r.passed(n); };
  if (!ok("stability")) return "not stable";
  bool su3 = ok("compatibility") && ok("normalization") && ok("volume") && ok("closure") && ok("positivity");
  if (!su3) return "not SU(3)";
  if (!ok("balanced")) return "SU(3), not balanced";
  if (!ok("non-kahler")) return "Kähler";
  return "balanced non-Kähler SU(3)";
}

/// Folds per-sample results into one condition: worst residual wins.
struct Accumulator {
  ConditionResult result;
  bool any = false;
  bool failed = false;
  bool skipped = false;
  double worst_t = 0.0;

  explicit Accumulator(std::string name) { result.condition = std::move(name); }

  void skip() { skipped = true; }

  void record(double t, double residual, bool pass) {
    if (!any || residual > result.residual) {
      result.residual = residual;
      worst_t = t;
    }
    any = true;
    failed = failed || !pass;
  }

  ConditionResult finish(const std::string& what) {
    if (skipped && !any) {
      result.status = ConditionStatus::Skipped;
      result.detail = "not evaluated: psi is not stable";
      return result;
    }
    result.status = (failed || skipped) ? ConditionStatus::Fail : ConditionStatus::Pass;
    result.detail = what + " (worst at t = " + fmt_double(worst_t) + ")";
    return result;
  }
};

}  // namespace detail

/// Runs the condition battery at each sample point.
inline SU3Report su3_check_numeric(const Coframe& cf, const FormSpec& omega_spec, const FormSpec& psi_spec,
                                   int orientation, const std::vector<double>& samples,
                                   const std::map<std::string, double>& params = {}, Tolerances tol = {}) {
  if (samples.empty()) throw Error(ErrorKind::InvalidArgument, "numeric mode needs at least one t-sample");
  if (omega_spec.degree != 2) throw Error(ErrorKind::DegreeMismatch, "omega must be a 2-form");
  if (psi_spec.degree != 3) throw Error(ErrorKind::DegreeMismatch, "psi must be a 3-form");
  SU3Report report;
  report.mode = "numeric";
  report.orientation = orientation;

  detail::Accumulator stability("stability"), compat("compatibility"), norm("normalization"), vol("volume"),
      closure("closure"), balanced("balanced"), nonkahler("non-kahler"), positivity("positivity");
  // Smallest |domega| is the relevant figure for the non-Kähler check.
  double min_domega = std::numeric_limits<double>::infinity();
  double min_domega_t = 0.0;
  std::string stability_note;

  Form<Jet> Omega = volume_form<Jet>(orientation);
  for (double t : samples) {
    Form<Jet> omega = omega_spec.at(t, params);
    Form<Jet> psi = psi_spec.at(t, params);
    SampleRecord rec;
    rec.t = t;

    Form<Jet> w3 = power(omega, 3);
    double w3c = w3.coeff(kTopMask).value;
    Endo<Jet> K = k_matrix(psi, Omega);
    Jet lam = (K * K).trace() / Jet(6.0);
    rec.lambda = lam.value;
    bool stable = std::fabs(w3c) > tol.nonzero && lam.value < -tol.nonzero;
    stability.record(t, stable ? 0.0 : std::max(0.0, lam.value), stable);
    if (std::fabs(w3c) <= tol.nonzero) stability_note = "omega^3 = 0";
    else if (!stable) stability_note = "lambda >= 0";

    Form<Jet> domega = d(cf, omega);
    rec.domega_norm = sup_norm(domega);
    if (rec.domega_norm < min_domega) {
      min_domega = rec.domega_norm;
      min_domega_t = t;
    }
    nonkahler.record(t, rec.domega_norm, rec.domega_norm > tol.nonzero);
    double bal = sup_norm(d(cf, wedge(omega, omega)));
    balanced.record(t, bal, bal < tol.residual);

    if (!(lam.value < 0.0)) {
      for (auto* a : {&compat, &norm, &vol, &closure, &positivity}) a->skip();
      report.samples.push_back(rec);
      continue;
    }
    Endo<Jet> J = Jet(-1.0) / sqrt(-lam) * K;
    Form<Jet> psi_m = psi_minus_from(psi, J);

    double c1 = std::max(sup_norm(wedge(omega, psi)), sup_norm(wedge(omega, psi_m)));
    compat.record(t, c1, c1 < tol.residual);

    double pp = wedge(psi, psi_m).coeff(kTopMask).value;
    double n1 = std::fabs(pp - 2.0 / 3.0 * w3c);
    norm.record(t, n1, n1 < tol.residual);

    Endo<Jet> g = metric_from(omega, J);
    double detg = g.map([](const Jet& x) { return Jet(x.value, 0.0); }).det().value;
    double sixth = w3c / 6.0;
    rec.volume_sign = sixth >= 0 ? 1 : -1;
    double vres = detg >= 0 ? std::fabs(std::fabs(sixth) - std::sqrt(detg)) : std::numeric_limits<double>::infinity();
    vol.record(t, vres, vres < tol.residual);

    double cl = std::max(sup_norm(d(cf, psi)), sup_norm(d(cf, psi_m)));
    closure.record(t, cl, cl < tol.residual);

    double asym = max_asymmetry(g);
    double minor = min_leading_minor(g);
    positivity.record(t, asym, asym < tol.residual && minor > tol.residual);

    rec.metric.assign(kDim, std::vector<double>(kDim));
    for (int i = 1; i <= kDim; ++i)
      for (int j = 1; j <= kDim; ++j) rec.metric[i - 1][j - 1] = g.at(i, j).value;
    report.samples.push_back(rec);
  }

  report.conditions.push_back(stability.finish(stability_note.empty() ? "omega^3 != 0 and lambda < 0"
                                                                      : stability_note));
  report.conditions.push_back(compat.finish("|omega ^ psi_+| and |omega ^ psi_-|"));
  report.conditions.push_back(norm.finish("psi_+ ^ psi_- - 2/3 omega^3"));
  {
    ConditionResult v = vol.finish("|omega^3/6| - sqrt(det g)");
    if (!report.samples.empty() && v.status != ConditionStatus::Skipped) {
      int s = report.samples.front().volume_sign;
      v.detail += "; omega^3/6 = " + std::string(s > 0 ? "+" : "-") + "sqrt(det g) e123456";
      v.detail += s == orientation ? ", matching the orientation" : ", opposite to the orientation";
    }
    report.conditions.push_back(v);
  }
  report.conditions.push_back(closure.finish("|d psi_+| and |d psi_-|"));
  report.conditions.push_back(balanced.finish("|d omega^2|"));
  {
    ConditionResult nk = nonkahler.finish("|d omega|");
    nk.residual = min_domega;
    nk.detail = "smallest |d omega| = " + detail::fmt_double(min_domega) + " at t = " + detail::fmt_double(min_domega_t);
    report.conditions.push_back(nk);
  }
  report.conditions.push_back(positivity.finish("metric asymmetry; leading minors must be positive"));
  report.verdict = detail::overall_verdict(report);
  return report;
}

namespace detail {

inline ConditionResult system_condition(const std::string& name, const std::vector<DiffPoly>& eqs,
                                        const std::string& what) {
  ConditionResult r;
  r.condition = name;
  std::vector<DiffPoly> kept;
  bool contradiction = false;
  for (const auto& e : eqs) {
    if (e.is_zero()) continue;
    DiffPoly n = normalize_equation(e);
    if (std::find(kept.begin(), kept.end(), n) != kept.end()) continue;
    kept.push_back(n);
    contradiction = contradiction || n.is_constant();
  }
  for (const auto& k : kept) r.equations.push_back(k.str() + " = 0");
  r.residual = static_cast<double>(kept.size());
  if (kept.empty()) {
    r.status = ConditionStatus::Pass;
    r.detail = what + " vanishes identically";
  } else if (contradiction) {
    r.status = ConditionStatus::Fail;
    r.detail = what + " has a nonzero constant coefficient";
  } else {
    r.status = ConditionStatus::Conditional;
    r.detail = what + " vanishes iff the listed equations hold";
  }
  return r;
}

inline std::vector<DiffPoly> coefficients(const Form<DiffPoly>& f) {
  std::vector<DiffPoly> out;
  for (const auto& [m, c] : f.terms()) out.push_back(c);
  return out;
}

}  // namespace detail

/// Symbolic battery: each condition becomes a polynomial system in the
/// coefficient functions. Positivity and the volume sign need numbers and
/// are skipped.
inline SU3Report su3_check_symbolic(const Coframe& cf, const Form<DiffPoly>& omega, const Form<DiffPoly>& psi,
                                    int orientation) {
  if (omega.degree() != 2) throw Error(ErrorKind::DegreeMismatch, "omega must be a 2-form");
  if (psi.degree() != 3) throw Error(ErrorKind::DegreeMismatch, "psi must be a 3-form");
  SU3Report report;
  report.mode = "symbolic";
  report.orientation = orientation;
  Form<DiffPoly> Omega = volume_form<DiffPoly>(orientation);

  Endo<DiffPoly> K = k_matrix(psi, Omega);
  DiffPoly lam = (K * K).trace() / DiffPoly(6);
  DiffPoly w3 = power(omega, 3).coeff(kTopMask);
  {
    ConditionResult r;
    r.condition = "stability";
    r.equations.push_back("lambda = " + lam.str());
    r.equations.push_back("omega^3 = (" + w3.str() + ")*e123456");
    if (w3.is_zero()) {
      r.status = ConditionStatus::Fail;
      r.detail = "omega^3 = 0";
    } else if (lam.is_constant()) {
      bool neg = lam.constant_value().sign() < 0;
      r.status = neg ? ConditionStatus::Pass : ConditionStatus::Fail;
      r.detail = neg ? "lambda is a negative constant" : "lambda is a nonnegative constant";
    } else if (polynomial_sqrt(lam)) {
      r.status = ConditionStatus::Fail;
      r.detail = "lambda = " + factored_str(lam) + " is a square, so lambda < 0 never holds";
    } else {
      r.status = ConditionStatus::Conditional;
      r.detail = "requires lambda < 0";
    }
    report.conditions.push_back(r);
  }
  bool lambda_fails = report.conditions.back().status == ConditionStatus::Fail && !w3.is_zero();

  ScaledForm<DiffPoly> psi_m = psi_minus_scaled_from(psi, K);
  if (lambda_fails) {
    for (const char* n : {"compatibility", "normalization", "volume", "closure"})
      report.conditions.push_back({n, ConditionStatus::Skipped, 0.0, "not evaluated: psi is not stable", {}});
  } else {
    auto eqs = detail::coefficients(wedge(omega, psi));
    for (const auto& e : detail::coefficients(wedge(omega, psi_m.numerator))) eqs.push_back(e);
    report.conditions.push_back(detail::system_condition("compatibility", eqs, "omega ^ psi_+ and omega ^ psi_-"));

    // psi_+ ^ psi_- = 2/3 omega^3 with psi_- = N / sqrt(-lambda), squared to
    // clear the radical.
    DiffPoly pn = wedge(psi, psi_m.numerator).coeff(kTopMask);
    DiffPoly squared = pn * pn - DiffPoly(Rational(4, 9)) * w3 * w3 * (-lam);
    ConditionResult n = detail::system_condition("normalization", {squared}, "(psi_+ ^ psi_-)^2 - 4/9 (omega^3)^2");
    report.conditions.push_back(n);
    report.conditions.push_back({"volume", ConditionStatus::Skipped, 0.0, "needs numeric samples", {}});

    auto cl = detail::coefficients(d(cf, psi));
    for (const auto& e : detail::coefficients(d_scaled(cf, psi_m, lam).numerator)) cl.push_back(e);
    report.conditions.push_back(detail::system_condition("closure", cl, "d psi_+ and d psi_-"));
  }
  report.conditions.push_back(
      detail::system_condition("balanced", detail::coefficients(d(cf, wedge(omega, omega))), "d omega^2"));
  {
    ConditionResult k = detail::system_condition("non-kahler", detail::coefficients(d(cf, omega)), "d omega");
    // d omega != 0 is the requirement, so the sense is inverted.
    if (k.status == ConditionStatus::Pass) {
      k.status = ConditionStatus::Fail;
      k.detail = "d omega vanishes identically";
    } else if (k.status == ConditionStatus::Fail) {
      k.status = ConditionStatus::Pass;
      k.detail = "d omega has a nonzero constant coefficient";
    } else {
      k.detail = "d omega = 0 iff the listed equations hold";
    }
    report.conditions.push_back(k);
  }
  report.conditions.push_back({"positivity", ConditionStatus::Skipped, 0.0, "needs numeric samples", {}});

  bool any_fail = false, all_pass = true;
  for (const auto& c : report.conditions) {
    if (c.condition == "volume" || c.condition == "positivity") continue;
    any_fail = any_fail || c.status == ConditionStatus::Fail;
    all_pass = all_pass && c.status == ConditionStatus::Pass;
  }
  const ConditionResult* nk = report.find("non-kahler");
  if (report.find("stability")->status == ConditionStatus::Fail) report.verdict = "not stable";
  else if (all_pass) report.verdict = "balanced non-Kähler SU(3)";
  else if (nk->status == ConditionStatus::Fail) {
    bool rest = true;
    for (const auto& c : report.conditions)
      if (c.condition != "non-kahler" && c.condition != "volume" && c.condition != "positivity")
        rest = rest && c.status == ConditionStatus::Pass;
    report.verdict = rest ? "Kähler" : "not SU(3)";
  } else if (any_fail) report.verdict = "not SU(3)";
  else report.verdict = "conditional";
  return report;
}

inline nlohmann::json to_json(const ConditionResult& c) {
  nlohmann::json j;
  j["condition"] = c.condition;
  j["verdict"] = status_name(c.status);
  j["residual"] = c.residual;
  j["detail"] = c.detail;
  if (!c.equations.empty()) j["equations"] = c.equations;
  return j;
}

inline nlohmann::json to_json(const SU3Report& r) {
  nlohmann::json j;
  j["mode"] = r.mode;
  j["verdict"] = r.verdict;
  j["orientation"] = r.orientation;
  j["conditions"] = nlohmann::json::array();
  for (const auto& c : r.conditions) j["conditions"].push_back(to_json(c));
  if (!r.samples.empty()) {
    j["samples"] = nlohmann::json::array();
    for (const auto& s : r.samples) {
      nlohmann::json js;
      js["t"] = s.t;
      js["lambda"] = s.lambda;
      js["volume_sign"] = s.volume_sign;
      js["domega_norm"] = s.domega_norm;
      if (!s.metric.empty()) js["metric"] = s.metric;
      j["samples"].push_back(js);
    }
  }
  return j;
}

}  // namespace stableforms
