// Prints one PASS/FAIL line per acceptance criterion; exits 1 if any fails.
#include <chrono>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "stableforms/cases.hpp"
#include "stableforms/cli.hpp"
#include "support/properties.hpp"

using namespace stableforms;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
  bool pass = true;
  std::string note;
  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      note += (note.empty() ? "" : "; ") + what;
    }
  }
};

DiffPoly poly(const std::string& s) { return to_diffpoly(parse_expr(s)); }

DiffPoly lambda_of(const std::string& psi) {
  return lambda(parse_form(psi).symbolic(), volume_form<DiffPoly>(1));
}

void require_assertions(Outcome& o, const CaseReport& r, const std::vector<std::string>& names) {
  for (const auto& n : names) {
    const Assertion* a = r.find(n);
    o.require(a && a->passed(), r.case_id + ": " + n + (a ? " " + a->status : " missing"));
  }
}

Outcome ac1() {
  Outcome o;
  struct Identity {
    std::string name;
    std::function<DiffPoly()> compute;
    std::string expected;
  };
  std::vector<Identity> ids = {
      {"b1 generic", [] { return lambda_of(case_fixture("b1-generic").psi); }, "(p1*p4 - p2*p3)^2"},
      {"b1 (1,0)", [] { return lambda_of(case_fixture("b1-onezero").psi); }, "(p1*p8 + p2*p7 - p3*p6 + p4*p5)^2"},
      {"c3 with p4 = 0",
       [] {
         auto psi = substitute_form(parse_form(case_fixture("c3").psi).symbolic(), {{"p4", "0"}});
         return lambda(psi, volume_form<DiffPoly>(1));
       },
       "-4*(p1^2*(p3^2 + p6^2) + (p2*p6 - p3*p5)^2)"},
      {"boundary family",
       [] { return boundary_lambda(boundary_family(), {"c6", "c7", "c8", "c9"}); }, "(c18*c3 - c17*c4)^2"},
  };
  for (const auto& id : ids) {
    auto start = Clock::now();
    DiffPoly got = id.compute();
    double dt = seconds_since(start);
    o.require(got == poly(id.expected), id.name + " lambda = " + got.str());
    o.require(dt < 1.0, id.name + " took " + std::to_string(dt) + " s");
  }
  return o;
}

Outcome ac2(const std::vector<CaseReport>& reports) {
  Outcome o;
  require_assertions(o, reports[2], {"closure of psi_+"});
  require_assertions(o, reports[3], {"closure of psi_+", "closure of psi_+ (exact)"});
  require_assertions(o, reports[4], {"closure of generic psi_+"});
  return o;
}

Outcome ac3(const std::vector<CaseReport>& reports) {
  Outcome o;
  require_assertions(o, reports[2], {"balanced", "kahler"});
  require_assertions(o, reports[3], {"balanced", "kahler"});
  return o;
}

Outcome ac4() {
  Outcome o;
  auto start = Clock::now();
  CaseReport r = reproduce("a1");
  double dt = seconds_since(start);
  require_assertions(o, r, {"battery", "metric", "non-kahler at t = 0"});
  o.require(dt < 5.0, "a1 took " + std::to_string(dt) + " s");
  return o;
}

Outcome ac5(const std::vector<CaseReport>& reports) {
  Outcome o;
  o.require(invariant_subspace(phi_f1(), 3).size() == 8, "dimension of invariant 3-forms");
  require_assertions(o, reports[5], {"invariant 3-forms", "family spans invariant 3-forms", "parity limits"});
  return o;
}

Outcome ac6() {
  Outcome o;
  auto start = Clock::now();
  using namespace stableforms::proptest;
  std::vector<std::pair<std::string, PropertyResult>> results = {
      {"d o d = 0", dd_zero()},
      {"lambda equivariance", lambda_equivariance()},
      {"lambda homogeneity", lambda_homogeneity()},
      {"J^2 = -Id", j_squared()},
      {"lambda(psi_-) = lambda(psi_+)", lambda_of_psi_minus()},
      {"psi_- one-slot vs triple-slot", psi_minus_slots()},
      {"jet vs finite differences", jet_vs_finite_differences()},
  };
  double dt = seconds_since(start);
  for (const auto& [name, r] : results)
    o.require(r.ok(), name + ": " + std::to_string(r.failures) + "/" + std::to_string(r.trials) + " failed " +
                          r.first_failure);
  o.require(dt < 30.0, "property suites took " + std::to_string(dt) + " s");
  return o;
}

Outcome ac7() {
  Outcome o;
  const char* argv[] = {"stableforms", "reproduce", "--all", "--json"};
  std::ostringstream out1, out2, err;
  int rc1 = cli::run(4, argv, out1, err);
  int rc2 = cli::run(4, argv, out2, err);
  o.require(rc1 == 0 && rc2 == 0, "exit codes " + std::to_string(rc1) + ", " + std::to_string(rc2));
  o.require(out1.str() == out2.str(), "outputs differ");
  o.require(!out1.str().empty(), "empty output");
  return o;
}

}  // namespace

int main() {
  std::vector<CaseReport> reports = reproduce_all();
  std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"AC1 exact lambda identities", ac1},
      {"AC2 closure systems", [&] { return ac2(reports); }},
      {"AC3 balanced and Kahler conditions", [&] { return ac3(reports); }},
      {"AC4 explicit solution", ac4},
      {"AC5 boundary analysis", [&] { return ac5(reports); }},
      {"AC6 structural properties", ac6},
      {"AC7 CLI determinism", ac7},
  };
  bool all = true;
  for (const auto& [name, fn] : criteria) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o.require(false, e.what());
    }
    all = all && o.pass;
    std::printf("[%s] %s%s%s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.note.empty() ? "" : ": ",
                o.note.c_str());
  }
  return all ? 0 : 1;
}
