#pragma once

#include <cmath>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "stableforms/cases.hpp"
#include "stableforms/coframe.hpp"
#include "stableforms/form_io.hpp"
#include "stableforms/json_io.hpp"
#include "stableforms/su3.hpp"

namespace stableforms::cli {

enum ExitCode { kOk = 0, kFailed = 1, kUsage = 2 };

struct RunConfig {
  std::string coframe;
  std::string omega;
  std::string psi;
  std::string form;
  std::string orientation = "+1";
  std::string at;
  std::string mode;  // empty: numeric when --at is given
  double tol = 1e-9;
  bool json = false;
  std::string expect;
  bool all = false;
  std::string case_id;
  std::string generator = "phi_f1";
  int degree = 3;
  bool count = false;
};

namespace detail {

inline int parse_orientation(const std::string& s) {
  if (s == "+1" || s == "1") return 1;
  if (s == "-1") return -1;
  throw Error(ErrorKind::InvalidArgument, "orientation must be +1 or -1, got '" + s + "'");
}

inline std::vector<double> parse_samples(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = stableforms::detail::trim(item);
    char* end = nullptr;
    double v = std::strtod(item.c_str(), &end);
    if (item.empty() || *end != '\0' || !std::isfinite(v))
      throw Error(ErrorKind::InvalidArgument, "bad sample '" + item + "' in --at");
    out.push_back(v);
  }
  return out;
}

inline std::string verdict_for(const std::string& expect) {
  if (expect == "balanced-nonkahler") return "balanced non-Kähler SU(3)";
  if (expect == "kahler") return "Kähler";
  if (expect == "su3-not-balanced") return "SU(3), not balanced";
  if (expect == "not-su3") return "not SU(3)";
  if (expect == "not-stable") return "not stable";
  if (expect == "conditional") return "conditional";
  throw Error(ErrorKind::InvalidArgument, "unknown --expect value '" + expect + "'");
}

inline nlohmann::json envelope(const std::string& command) {
  nlohmann::json j;
  j["schema"] = 1;
  j["command"] = command;
  return j;
}

inline FormSpec require_form(const std::string& source, const std::string& flag, int degree) {
  if (source.empty()) throw Error(ErrorKind::InvalidArgument, flag + " is required");
  FormSpec spec = load_form(source, degree);
  if (spec.degree != degree)
    throw Error(ErrorKind::DegreeMismatch, flag + " must be a " + std::to_string(degree) + "-form");
  return spec;
}

/// True when omega^3 vanishes identically, or at every sample for forms that
/// are not polynomial in their parameters.
inline bool degenerate(const FormSpec& omega, const std::vector<double>& samples) {
  try {
    return power(omega.symbolic(), 3).is_zero();
  } catch (const Error&) {
  }
  for (double t : samples)
    if (std::fabs(power(omega.at(t), 3).coeff(kTopMask).value) > 1e-14) return false;
  return !samples.empty();
}

inline void print_report_text(const SU3Report& r, std::ostream& out) {
  out << "verdict: " << r.verdict << " (" << r.mode << ", orientation " << (r.orientation > 0 ? "+1" : "-1")
      << ")\n";
  for (const auto& c : r.conditions) {
    out << "  " << c.condition << ": " << status_name(c.status);
    if (r.mode == "numeric" && c.status != ConditionStatus::Skipped)
      out << " (residual " << stableforms::detail::fmt_double(c.residual) << ")";
    if (!c.detail.empty()) out << "  " << c.detail;
    out << "\n";
    for (const auto& e : c.equations) out << "      " << e << "\n";
  }
}

inline int cmd_check(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  Coframe cf = load_coframe(cfg.coframe);
  int orientation = parse_orientation(cfg.orientation);
  FormSpec omega = require_form(cfg.omega, "--omega", 2);
  std::vector<double> samples = cfg.at.empty() ? std::vector<double>{} : parse_samples(cfg.at);
  std::string mode = cfg.mode.empty() ? (samples.empty() ? "symbolic" : "numeric") : cfg.mode;
  if (mode != "symbolic" && mode != "numeric")
    throw Error(ErrorKind::InvalidArgument, "--mode must be symbolic or numeric");
  if (mode == "numeric" && samples.empty()) throw Error(ErrorKind::InvalidArgument, "numeric mode needs --at");
  if (degenerate(omega, samples)) {
    err << "error: omega is degenerate: omega^3 = 0\n";
    return kUsage;
  }
  FormSpec psi = require_form(cfg.psi, "--psi", 3);
  std::optional<std::string> expected;
  if (!cfg.expect.empty()) expected = verdict_for(cfg.expect);

  SU3Report report;
  if (mode == "numeric") {
    Tolerances tol;
    tol.residual = cfg.tol;
    report = su3_check_numeric(cf, omega, psi, orientation, samples, {}, tol);
  } else {
    report = su3_check_symbolic(cf, omega.symbolic(), psi.symbolic(), orientation);
  }
  if (cfg.json) {
    nlohmann::json j = envelope("check");
    j["coframe"] = cf.name();
    j["report"] = to_json(report);
    if (expected) j["expect"] = *expected;
    out << dump_json(j);
  } else {
    print_report_text(report, out);
  }
  if (expected && report.verdict != *expected) {
    err << "expected verdict '" << *expected << "', got '" << report.verdict << "'\n";
    return kFailed;
  }
  return kOk;
}

inline int cmd_lambda(const RunConfig& cfg, std::ostream& out) {
  int orientation = parse_orientation(cfg.orientation);
  Form<DiffPoly> psi = require_form(cfg.psi, "--psi", 3).symbolic();
  DiffPoly lam = lambda(psi, volume_form<DiffPoly>(orientation));
  if (cfg.json) {
    nlohmann::json j = envelope("lambda");
    j["lambda"] = lam.str();
    j["factored"] = factored_str(lam);
    out << dump_json(j);
  } else {
    out << factored_str(lam) << "\n";
  }
  return kOk;
}

inline int cmd_d(const RunConfig& cfg, std::ostream& out) {
  Coframe cf = load_coframe(cfg.coframe);
  if (cfg.form.empty()) throw Error(ErrorKind::InvalidArgument, "--form is required");
  Form<DiffPoly> a = load_form(cfg.form).symbolic();
  Form<DiffPoly> da = d(cf, a);
  if (cfg.json) {
    nlohmann::json j = envelope("d");
    j["coframe"] = cf.name();
    j["degree"] = da.degree();
    j["form"] = form_to_json(da);
    out << dump_json(j);
  } else {
    out << (da.is_zero() ? std::string("0") : da.str()) << "\n";
  }
  return kOk;
}

inline int cmd_closure(const RunConfig& cfg, std::ostream& out) {
  Coframe cf = load_coframe(cfg.coframe);
  const std::string& source = cfg.psi.empty() ? cfg.form : cfg.psi;
  if (source.empty()) throw Error(ErrorKind::InvalidArgument, "--psi or --form is required");
  ClosureSystem sys = closure_system(cf, load_form(source).symbolic());
  if (cfg.json) {
    nlohmann::json j = envelope("closure");
    j["coframe"] = cf.name();
    j["equations"] = sys.strings();
    out << dump_json(j);
  } else {
    if (sys.empty()) out << "closed\n";
    for (const auto& s : sys.strings()) out << s << "\n";
  }
  return kOk;
}

inline int cmd_invariants(const RunConfig& cfg, std::ostream& out) {
  Endo<QuadraticScalar> gen;
  std::string source;
  if (!cfg.coframe.empty()) {
    Coframe cf = load_coframe(cfg.coframe);
    if (cf.isotropy().empty()) throw Error(ErrorKind::InvalidArgument, "coframe '" + cf.name() + "' has no isotropy");
    gen = cf.isotropy().front();
    source = "coframe " + cf.name();
  } else {
    gen = generator_by_name(cfg.generator);
    source = cfg.generator;
  }
  auto basis = invariant_subspace(gen, cfg.degree);
  if (cfg.json) {
    nlohmann::json j = envelope("invariants");
    j["generator"] = source;
    j["degree"] = cfg.degree;
    j["dimension"] = basis.size();
    if (!cfg.count) {
      j["basis"] = nlohmann::json::array();
      for (const auto& f : basis) j["basis"].push_back(form_to_json(f));
    }
    out << dump_json(j);
  } else if (cfg.count) {
    out << basis.size() << "\n";
  } else {
    for (const auto& f : basis) out << f.str() << "\n";
  }
  return kOk;
}

inline int cmd_reproduce(const RunConfig& cfg, std::ostream& out) {
  std::vector<CaseReport> reports;
  if (cfg.all) {
    if (!cfg.case_id.empty()) throw Error(ErrorKind::InvalidArgument, "give a case id or --all, not both");
    reports = reproduce_all();
  } else {
    if (cfg.case_id.empty()) throw Error(ErrorKind::InvalidArgument, "give a case id or --all");
    reports.push_back(reproduce(cfg.case_id));
  }
  bool ok = true;
  for (const auto& r : reports) ok = ok && r.ok();
  if (cfg.json) {
    nlohmann::json j = envelope("reproduce");
    j["ok"] = ok;
    j["cases"] = nlohmann::json::array();
    for (const auto& r : reports) j["cases"].push_back(to_json(r));
    out << dump_json(j);
  } else {
    for (const auto& r : reports) {
      int discrepancies = 0;
      for (const auto& a : r.assertions) discrepancies += a.status == "discrepancy";
      out << r.case_id << ": " << (r.ok() ? "ok" : "FAILED") << " (" << r.assertions.size() << " assertions, "
          << discrepancies << " discrepancies)\n";
      for (const auto& a : r.assertions) {
        out << "  [" << a.status << (a.required ? "" : ", reported") << "] " << a.name;
        if (!a.factor.empty()) out << "  factor " << a.factor;
        out << "\n";
      }
    }
  }
  return ok ? kOk : kFailed;
}

}  // namespace detail

/// Entry point shared by the binary and the tests.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Checks invariant SU(3)-structure conditions on cohomogeneity-one coframes", "stableforms"};
  app.require_subcommand(1);
  RunConfig cfg;

  auto add_json = [&](CLI::App* c) { c->add_flag("--json", cfg.json, "Emit JSON"); };
  auto add_coframe = [&](CLI::App* c, bool required) {
    auto* o = c->add_option("--coframe", cfg.coframe, "Preset name or .toml file");
    if (required) o->required();
  };

  auto* check = app.add_subcommand("check", "Run the SU(3) condition battery");
  add_coframe(check, true);
  check->add_option("--omega", cfg.omega, "2-form, inline or @file")->required();
  check->add_option("--psi", cfg.psi, "3-form, inline or @file");
  check->add_option("--orientation", cfg.orientation, "+1 or -1");
  check->add_option("--at", cfg.at, "Comma-separated t samples");
  check->add_option("--mode", cfg.mode, "symbolic or numeric");
  check->add_option("--tol", cfg.tol, "Residual tolerance")->check(CLI::PositiveNumber);
  check->add_option("--expect", cfg.expect,
                    "balanced-nonkahler, kahler, su3-not-balanced, not-su3, not-stable or conditional");
  add_json(check);

  auto* lam = app.add_subcommand("lambda", "Print lambda(psi) factored");
  lam->add_option("--psi", cfg.psi, "3-form, inline or @file")->required();
  lam->add_option("--orientation", cfg.orientation, "+1 or -1");
  add_json(lam);

  auto* dcmd = app.add_subcommand("d", "Exterior derivative on a coframe");
  add_coframe(dcmd, true);
  dcmd->add_option("--form", cfg.form, "Form, inline or @file")->required();
  add_json(dcmd);

  auto* closure = app.add_subcommand("closure", "Closure system of a form");
  add_coframe(closure, true);
  closure->add_option("--psi", cfg.psi, "3-form, inline or @file");
  closure->add_option("--form", cfg.form, "Form, inline or @file");
  add_json(closure);

  auto* inv = app.add_subcommand("invariants", "Forms annihilated by an isotropy generator");
  inv->add_option("--generator", cfg.generator, "phi_f1 or zero");
  add_coframe(inv, false);
  inv->add_option("--degree", cfg.degree, "Form degree")->check(CLI::Range(0, 6));
  inv->add_flag("--count", cfg.count, "Print only the dimension");
  add_json(inv);

  auto* rep = app.add_subcommand("reproduce", "Run bundled case reproductions");
  rep->add_option("case", cfg.case_id, "Case id")->check(CLI::IsMember(case_ids()));
  rep->add_flag("--all", cfg.all, "Run every case");
  add_json(rep);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kUsage;
  }

  try {
    if (*check) return detail::cmd_check(cfg, out, err);
    if (*lam) return detail::cmd_lambda(cfg, out);
    if (*dcmd) return detail::cmd_d(cfg, out);
    if (*closure) return detail::cmd_closure(cfg, out);
    if (*inv) return detail::cmd_invariants(cfg, out);
    if (*rep) return detail::cmd_reproduce(cfg, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const nlohmann::json::exception& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}

}  // namespace stableforms::cli
