#include "doctest.h"

#include <cmath>

#include "diracflow/flow.hpp"
#include "support.hpp"

using namespace diracflow;

namespace {
double max_abs(const Matrix& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

Trajectory run(const OrientedComplex& c, double beta, double t_end, double h,
               int every, bool with_u = true) {
  EvolveOptions opts;
  opts.snapshot_every = every;
  return evolve(initial_state(c, beta, {}, with_u), t_end, h, {}, opts);
}
}

TEST_SUITE("flow") {

TEST_CASE("initial state splits D(0)") {
  FlowState s = initial_state(testsupport::k3(), 1.0);
  GradedOperator D = dirac(testsupport::k3());
  CHECK(max_abs(s.b.m) == 0.0);
  CHECK(max_abs(s.d.m + s.d.m.adjoint() - D.m) == 0.0);
  CHECK(s.t == 0.0);
  REQUIRE(s.U.has_value());
  CHECK(max_abs(s.U->m - Matrix::Identity(7, 7)) == 0.0);
}

TEST_CASE("reconstructions agree with the split") {
  FlowState s = run(testsupport::k3(), 1.0, 0.5, 1e-3, 500).back();
  CHECK(max_abs(reconstruct_D(s).m - (s.d.m + s.d.m.adjoint() + s.b.m)) == 0.0);
  CHECK(max_abs(reconstruct_C(s).m - (s.d.m + s.d.m.adjoint())) == 0.0);
  const Matrix B = reconstruct_B(s).m;
  CHECK(max_abs(B - (s.d.m - s.d.m.adjoint() + cplx(0, 1) * s.b.m)) == 0.0);
}

TEST_CASE("one step is reversible to integrator order") {
  FlowState s = initial_state(testsupport::k3(), 0.0);
  FlowState fwd = step_rk4(s, 0.01);
  FlowState back = step_rk4(fwd, -0.01);
  CHECK(max_abs(back.d.m - s.d.m) < 1e-10);
  CHECK(max_abs(back.b.m - s.b.m) < 1e-10);
  CHECK(back.t == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("two-point run reproduces the frozen d(1)") {
  Trajectory traj = run(testsupport::k2(), 0.0, 1.0, 1e-3, 1000);
  const cplx d1 = traj.back().d.m(2, 0);
  CHECK(d1.imag() == 0.0);
  CHECK(d1.real() == doctest::Approx(-0.11779996022622624).epsilon(1e-12));
}

TEST_CASE("spectrum and Laplacian stay put") {
  Trajectory traj = run(testsupport::k3(), 1.0, 5.0, 1e-3, 50);
  const auto spec0 = sorted_spectrum(reconstruct_D(traj.front()).m);
  const Matrix L0 = laplacian(reconstruct_D(traj.front())).m;
  double drift = 0.0, l_gap = 0.0;
  for (const auto& s : traj.snapshots) {
    const auto spec = sorted_spectrum(reconstruct_D(s).m);
    for (std::size_t i = 0; i < spec.size(); ++i)
      drift = std::max(drift, std::abs(spec[i] - spec0[i]));
    l_gap = std::max(l_gap, max_abs(laplacian(reconstruct_D(s)).m - L0));
  }
  CHECK(drift < 1e-8);
  CHECK(l_gap < 1e-8);
}

TEST_CASE("tr M + tr b^2 is a conserved combination") {
  Trajectory traj = run(testsupport::k3(), 0.0, 3.0, 1e-3, 100);
  auto total = [](const FlowState& s) {
    return 2.0 * s.d.m.squaredNorm() + (s.b.m * s.b.m).trace().real();
  };
  const double t0 = total(traj.front());
  for (const auto& s : traj.snapshots)
    CHECK(std::abs(total(s) - t0) < 1e-10);
}

TEST_CASE("split right-hand side matches the dense commutator") {
  FlowState s = run(testsupport::k3(), 1.0, 1.0, 1e-3, 1000).back();
  CHECK(rhs_commutator_residual(s) < 1e-12);
  CHECK(rhs_commutator_residual(s, {0.0, 0.0, 1.0}) < 1e-12);
}

TEST_CASE("identity polynomial takes the fast path") {
  FlowState s = run(testsupport::k2(), 0.0, 0.5, 1e-3, 500).back();
  FlowRhs plain = rhs(s);
  FlowRhs poly = higher_flow_rhs(s, {1.0});
  CHECK(max_abs(plain.d_dot - poly.d_dot) == 0.0);
  CHECK(max_abs(plain.b_dot - poly.b_dot) == 0.0);
}

TEST_CASE("negative spans integrate backwards") {
  Trajectory traj = run(testsupport::k2(), 0.0, -1.0, 1e-3, 100);
  CHECK(traj.back().t == doctest::Approx(-1.0).epsilon(1e-12));
  const auto ts = traj.times();
  for (std::size_t i = 1; i < ts.size(); ++i) CHECK(ts[i] < ts[i - 1]);
  // b is odd in t on the two-point graph
  Trajectory fwd = run(testsupport::k2(), 0.0, 1.0, 1e-3, 100);
  CHECK(max_abs(traj.back().b.m + fwd.back().b.m) < 1e-10);
}

TEST_CASE("uneven spans get a remainder step") {
  Trajectory traj = run(testsupport::k2(), 0.0, 0.0015, 1e-3, 1);
  CHECK(traj.n_full_steps == 1);
  CHECK(traj.h_last == doctest::Approx(5e-4).epsilon(1e-12));
  CHECK(traj.back().t == doctest::Approx(0.0015).epsilon(1e-12));
}

TEST_CASE("carried unitary stays unitary and conjugates D") {
  Trajectory traj = run(testsupport::k3(), 1.0, 5.0, 1e-3, 500);
  const GradedOperator D0 = reconstruct_D(traj.front());
  for (const auto& s : traj.snapshots) {
    REQUIRE(s.U.has_value());
    CHECK(max_abs(s.U->m.adjoint() * s.U->m -
                  Matrix::Identity(s.U->dim(), s.U->dim())) < 1e-10);
    CHECK(unitary_conjugation_residual(s, D0) < 1e-6);
  }
}

TEST_CASE("kernel transport stays in the kernel") {
  Trajectory traj = run(testsupport::c4(), 0.0, 2.0, 1e-3, 100, false);
  // constant function on the vertices: closed, and d(t) genuinely has to
  // cancel across each edge as the couplings drift
  Vector f = Vector::Zero(8);
  f.head(4).setConstant(0.5);
  REQUIRE(max_abs(traj.front().d.m * f) < 1e-12);
  auto series = transport_cocycle(f, traj);
  for (std::size_t i = 0; i < traj.snapshots.size(); ++i)
    CHECK(max_abs(traj.snapshots[i].d.m * series[i]) < 1e-9);
}

TEST_CASE("standard observers report the frozen initial values") {
  FlowState s0 = initial_state(testsupport::k2());
  auto obs = standard_observers(s0);
  REQUIRE(obs.size() == 6);
  CHECK(obs[0].name == "tr_M");
  CHECK(obs[5].name == "norm_d");
  CHECK(obs[0].fn(s0) == doctest::Approx(4.0));
  CHECK(obs[3].fn(s0) == doctest::Approx(1.0));  // Re str U(0) = chi
  CHECK(obs[5].fn(s0) == doctest::Approx(1.0));
}

TEST_CASE("attractor settling time on the two-point graph") {
  Trajectory traj = run(testsupport::k2(), 0.0, 10.0, 1e-3, 10, false);
  auto ct = convergence_time(traj);
  REQUIRE(ct.has_value());
  CHECK(*ct == doctest::Approx(5.95).epsilon(0.01));
  CHECK(!convergence_time(run(testsupport::k2(), 0.0, 2.0, 1e-3, 10, false)).has_value());
}

TEST_CASE("divergence is reported, not propagated") {
  CHECK_THROWS_AS(run(testsupport::k2(), 0.0, 50.0, 2.0, 10), NumericError);
}

TEST_CASE("snapshot cadence is validated") {
  EvolveOptions opts;
  opts.snapshot_every = 0;
  CHECK_THROWS_AS(evolve(initial_state(testsupport::k2()), 1.0, 1e-3, {}, opts),
                  UsageError);
}

}  // TEST_SUITE
