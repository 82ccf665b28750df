#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <string>
#include <vector>

#include "diracflow/diagnostics.hpp"
#include "diracflow/flow.hpp"
#include "support.hpp"

using namespace diracflow;

namespace {

std::set<std::string> failing_names(const DiagnosticsReport& r) {
  std::set<std::string> out;
  for (const auto& c : r.checks)
    if (!c.skipped && !c.pass) out.insert(c.name);
  return out;
}

Trajectory k2_run(double beta, double t_end, double h, int every) {
  FlowState s0 = initial_state(testsupport::k2(), beta);
  EvolveOptions opts;
  opts.snapshot_every = every;
  return evolve(s0, t_end, h, standard_observers(s0), opts);
}

}  // namespace

TEST_SUITE("diagnostics") {

TEST_CASE("full suite is green on the two-point graph") {
  DiagnoseSettings cfg;
  DiagnosticsReport rep = run_all_checks(testsupport::k2(), cfg);
  CHECK(rep.all_pass());
  REQUIRE(rep.find("conserved_traces") != nullptr);
  CHECK(!rep.find("conserved_traces")->skipped);
  CHECK(!rep.find("beta0_commutator_2BD")->skipped);
  CHECK(!rep.find("trace_U_real")->skipped);
  // the real/imaginary coupling split says nothing when d stays real
  REQUIRE(rep.find("dolbeault") != nullptr);
  CHECK(rep.find("dolbeault")->skipped);
  CHECK(!rep.times.empty());
}

TEST_CASE("at beta = 1 only the claimed quadratic speedup fails") {
  DiagnoseSettings cfg;
  cfg.beta = 1.0;
  DiagnosticsReport rep = run_all_checks(testsupport::k2(), cfg);
  CHECK(failing_names(rep) == std::set<std::string>{"timechange_ratio"});
  const Check* ratio = rep.find("timechange_ratio");
  REQUIRE(ratio != nullptr);
  // measured ratio is 1, the claim is 1 + beta^2 = 2, so the residual is 1
  CHECK(ratio->residual > 0.9);
  CHECK(ratio->residual < 1.1);
  CHECK(rep.find("beta0_commutator_2BD")->skipped);
  CHECK(rep.find("poisson_probe")->skipped);
  CHECK(rep.find("trace_U_real")->skipped);
  REQUIRE(rep.find("dolbeault_sum") != nullptr);
  CHECK(!rep.find("dolbeault_sum")->skipped);
  CHECK(rep.find("dolbeault_sum")->pass);
}

TEST_CASE("a coarse step trips exactly the integration-accuracy checks") {
  DiagnoseSettings cfg;
  cfg.h = 0.5;
  cfg.checks = {"structure"};
  DiagnosticsReport rep = run_all_checks(testsupport::k2(), cfg);
  CHECK(failing_names(rep) ==
        std::set<std::string>{"conserved_traces", "isospectrality", "L_constancy",
                              "unitary_conjugation", "unitary_unitarity"});
}

TEST_CASE("trace conservation is marginal on the random graph at beta = 1") {
  DiagnoseSettings cfg;
  cfg.beta = 1.0;
  cfg.checks = {"structure"};
  DiagnosticsReport rep = run_all_checks(testsupport::g8(), cfg);
  const Check* c = rep.find("conserved_traces");
  REQUIRE(c != nullptr);
  CHECK(!c->pass);
  CHECK(c->tolerance == 1e-8);
  CHECK(c->residual > 1e-8);
  CHECK(c->residual < 5e-8);  // a hair over: step-size noise, not structure
  CHECK(rep.find("isospectrality")->pass);
  CHECK(rep.find("anticommutator_d_b")->pass);
}

TEST_CASE("coupling split into real and imaginary halves") {
  FlowState flat = initial_state(testsupport::k2(), 0.0);
  DiagnosticsReport vacuous = dolbeault_check(flat);
  CHECK(vacuous.all_pass());
  for (const auto& c : vacuous.checks) CHECK(c.skipped);

  Trajectory traj = k2_run(1.0, 1.0, 1e-3, 100);
  CHECK(traj.back().d.m.imag().cwiseAbs().maxCoeff() > 1e-3);
  DiagnosticsReport rep = dolbeault_check(traj.back());
  CHECK(rep.all_pass());
  for (const auto& c : rep.checks) CHECK(!c.skipped);
}

TEST_CASE("fermionic eigenvector rotates into the bosonic sector") {
  Trajectory traj = k2_run(0.0, 10.0, 1e-3, 10);
  Vector f = Vector::Zero(3);
  f(2) = 1.0;
  std::vector<double> alpha = fermion_angle(f, traj);
  REQUIRE(alpha.size() == traj.snapshots.size());
  CHECK(alpha.front() == doctest::Approx(std::numbers::pi / 2).epsilon(1e-9));
  CHECK(alpha[20] < alpha.front());
  CHECK(alpha[100] < alpha[20]);
  CHECK(alpha[500] < alpha[100]);
  CHECK(alpha.back() < 1e-6);

  LogLinearFit fit = log_linear_fit(traj.times(), alpha, 5.0, 10.0);
  CHECK(fit.rate == doctest::Approx(-2.0 * std::numbers::sqrt2).epsilon(1e-3));
  CHECK(fit.r2 > 0.999);
  CHECK(fit.n > 100);
}

TEST_CASE("eigenplane of the starting Laplacian traps the motion") {
  Trajectory traj = k2_run(1.0, 2.0, 1e-3, 10);
  Vector f = Vector::Zero(3);
  f(2) = 1.0;  // L(0) e3 = 2 e3
  DiagnosticsReport rep = plane_invariance(f, traj);
  CHECK(rep.all_pass());
  CHECK(rep.find("plane_span") != nullptr);
  CHECK(rep.find("plane_superpartner") != nullptr);
}

TEST_CASE("matched-speed comparison between beta values") {
  BetaTimechange bt = beta_timechange_check(testsupport::k2(), 1.0);
  CHECK(bt.claimed_ratio == 2.0);
  CHECK(bt.ratio_mean == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(bt.ratio_max - bt.ratio_min < 1e-6);
  CHECK(bt.path_residual < 1e-10);
  CHECK(bt.report.find("timechange_path")->pass);
  CHECK(bt.report.find("timechange_ratio_spread")->pass);
  CHECK(!bt.report.find("timechange_ratio")->pass);
}

TEST_CASE("monotone quantities and positivity on the square") {
  FlowState s0 = initial_state(testsupport::c4());
  EvolveOptions opts;
  opts.snapshot_every = 10;
  Trajectory traj = evolve(s0, 3.0, 1e-3, standard_observers(s0), opts);
  CHECK(monotonicity_report(traj).all_pass());
  CHECK(positivity_scan(traj).all_pass());
  CHECK(mckean_singer_check(traj).all_pass());
  CHECK(cohomology_check(traj).all_pass());
}

TEST_CASE("unknown or empty check selections are rejected") {
  DiagnoseSettings cfg;
  cfg.checks = {"sanity"};
  CHECK_THROWS_AS(run_all_checks(testsupport::k2(), cfg), UsageError);
  cfg.checks = {};
  CHECK_THROWS_AS(run_all_checks(testsupport::k2(), cfg), UsageError);
  CHECK(known_check_names().size() == 9);
}

TEST_CASE("report serializations carry every check and series") {
  DiagnoseSettings cfg;
  cfg.checks = {"monotonicity"};
  cfg.t_end = 1.0;
  DiagnosticsReport rep = run_all_checks(testsupport::k2(), cfg);
  REQUIRE(rep.all_pass());

  nlohmann::json j = report_json(rep);
  CHECK(j["all_pass"] == true);
  REQUIRE(j["checks"].is_array());
  CHECK(j["checks"].size() == rep.checks.size());
  for (const auto& c : j["checks"]) {
    CHECK(c.contains("name"));
    CHECK(c.contains("residual"));
    CHECK(c.contains("tolerance"));
    CHECK(c.contains("pass"));
    CHECK(c.contains("statement"));
  }
  CHECK(j["series"].contains("t"));
  CHECK(j["series"].contains("tr_M"));

  std::string text = report_text(rep);
  CHECK(text.find("tr_b2_nondecreasing") != std::string::npos);
  CHECK(text.find("PASS") != std::string::npos);
  CHECK(text.find("FAIL") == std::string::npos);

  std::string csv = series_csv(rep);
  CHECK(csv.rfind("t,", 0) == 0);
  CHECK(csv.find("tr_M") != std::string::npos);
  CHECK(static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n')) ==
        1 + rep.times.size());
}

}  // TEST_SUITE
