// Acceptance gate: twelve numbered criteria, one pass/fail line each.
// Exit status is the number of failed criteria.
//
// Two clauses fail by design and are expected to stay red; the repository
// README explains both. In short: the pinned printed value 0.117712 for the
// two-point d-entry at t = 1 disagrees with its own closed form
// sech(sqrt(8)) = 0.117800 by 8.8e-5, beyond the pinned 5e-5; and the
// acceleration ratio at matched points measures exactly 1 for every beta,
// not the pinned 1 + beta^2 (the magnitude dynamics are beta-independent,
// which the D(20) clause of the same criterion confirms).

#include <array>
#include <cmath>
#include <complex>
#include <cstdio>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "diracflow/complex.hpp"
#include "diracflow/diagnostics.hpp"
#include "diracflow/flow.hpp"
#include "diracflow/operators.hpp"
#include "diracflow/oracles.hpp"
#include "diracflow/spectral.hpp"
#include "support.hpp"

namespace {

using namespace diracflow;

int g_failures = 0;

void record(int id, bool pass, const char* name, const std::string& detail) {
  std::printf("[%2d] %s %s: %s\n", id, pass ? "PASS" : "FAIL", name, detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.3e", x);
  return buf;
}

double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

double tr_M(const FlowState& s) { return 2.0 * s.d.m.squaredNorm(); }
double tr_b2(const FlowState& s) { return (s.b.m * s.b.m).trace().real(); }

double min_sym_eig(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es((m + m.adjoint()) / 2.0);
  return es.eigenvalues().minCoeff();
}

double max_sym_eig(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es((m + m.adjoint()) / 2.0);
  return es.eigenvalues().maxCoeff();
}

// One trajectory per graph and beta, shared by criteria 3-6 and 8.
struct Sweep {
  std::vector<std::string> names;
  std::vector<OrientedComplex> complexes;
  std::vector<std::array<Trajectory, 2>> trajs;  // beta = 0, 1
};

Sweep run_sweep() {
  Sweep s;
  s.names = {"K2", "K3", "C4", "S4", "G(8,0.5)"};
  s.complexes = {testsupport::k2(), testsupport::k3(), testsupport::c4(),
                 testsupport::star4(), testsupport::g8()};
  EvolveOptions opts;
  opts.snapshot_every = 10;
  for (const auto& c : s.complexes) {
    std::array<Trajectory, 2> pair = {
        evolve(initial_state(c, 0.0), 5.0, 1e-3, {}, opts),
        evolve(initial_state(c, 1.0), 5.0, 1e-3, {}, opts)};
    s.trajs.push_back(std::move(pair));
  }
  return s;
}

// |d| and |b| of a two-point-graph state, read off the canonical entries.
double k2_d_scalar(const FlowState& s) { return std::abs(s.d.m(2, 0)); }
double k2_b_scalar(const FlowState& s) { return std::abs(s.b.m(0, 0)); }

void criterion_1(const Trajectory& k2_fine) {
  constexpr double tol = 1e-8;
  double worst = 0.0;
  for (const auto& s : k2_fine.snapshots) {
    const K2State cf = k2_closed_form(s.t);
    worst = std::max(worst, std::abs(k2_d_scalar(s) - cf.d));
    worst = std::max(worst, std::abs(k2_b_scalar(s) - cf.b));
  }
  record(1, worst < tol, "k2-closed-form",
         "max |(|d|,|b|) - (sech, tanh/sqrt2)| = " + fmt(worst) + " over [0,3] (tol 1e-08)");
}

void criterion_2(const Trajectory& k2_fine, const OrientedComplex& k2c) {
  constexpr double entry_tol = 5e-5;
  constexpr double limit_tol = 1e-6;

  // integrated D(1); the fine trajectory snapshots every step of h = 1e-3
  const FlowState& s1 = k2_fine.snapshots[1000];
  const Matrix D1 = reconstruct_D(s1).m;
  const double gap_b_vertex = std::abs(std::abs(D1(0, 0)) - 0.702191);
  const double gap_b_cross = std::abs(std::abs(D1(0, 1)) - 0.702191);
  const double gap_d = std::abs(std::abs(D1(2, 0)) - 0.117712);
  const double gap_b_edge = std::abs(std::abs(D1(2, 2)) - 1.40438);
  const double entry_worst =
      std::max(std::max(gap_b_vertex, gap_b_cross), std::max(gap_d, gap_b_edge));

  EvolveOptions opts;
  opts.snapshot_every = 100000;
  const Matrix Dp = reconstruct_D(evolve(initial_state(k2c), 10.0, 1e-3, {}, opts).back()).m;
  const Matrix Dm = reconstruct_D(evolve(initial_state(k2c), -10.0, 1e-3, {}, opts).back()).m;
  Matrix V = Matrix::Zero(3, 3);  // the attractor pair is {V, -V}
  const double r = 1.0 / std::sqrt(2.0);
  V(0, 0) = V(1, 1) = -r;
  V(0, 1) = V(1, 0) = r;  // {d, b} = 0 forces the cross sign
  V(2, 2) = 2.0 * r;
  const double limit_worst =
      std::max(std::min(max_abs(Dp - V), max_abs(Dp + V)),
               std::min(max_abs(Dm - V), max_abs(Dm + V)));

  const bool pass = entry_worst < entry_tol && limit_worst < limit_tol;
  record(2, pass, "k2-printed-matrix",
         "D(1) entry gaps vs 0.702191/0.117712/1.40438: b = " + fmt(gap_b_vertex) +
             ", d = " + fmt(gap_d) + ", edge = " + fmt(gap_b_edge) +
             " (tol 5e-05); limit pair gap = " + fmt(limit_worst) + " (tol 1e-06)");
}

void criterion_3(const Sweep& sweep) {
  constexpr double tol = 1e-8;
  double drift = 0.0, l_const = 0.0;
  for (const auto& pair : sweep.trajs) {
    for (const auto& traj : pair) {
      const std::vector<double> spec0 = sorted_spectrum(reconstruct_D(traj.front()).m);
      const Matrix L0 = laplacian(reconstruct_D(traj.front())).m;
      for (const auto& s : traj.snapshots) {
        const std::vector<double> spec = sorted_spectrum(reconstruct_D(s).m);
        for (std::size_t k = 0; k < spec.size(); ++k)
          drift = std::max(drift, std::abs(spec[k] - spec0[k]));
        l_const = std::max(l_const, max_abs(laplacian(reconstruct_D(s)).m - L0));
      }
    }
  }
  record(3, drift < tol && l_const < tol, "isospectrality",
         "max spectrum drift = " + fmt(drift) + ", max |L(t) - L(0)| = " + fmt(l_const) +
             " over five graphs, beta in {0,1}, t in [0,5] (tol 1e-08)");
}

void criterion_4(const Sweep& sweep) {
  constexpr double tol = 1e-6;
  double str_gap = 0.0, im_tr = 0.0;
  for (std::size_t gi = 0; gi < sweep.trajs.size(); ++gi) {
    const double chi = euler_characteristic(sweep.complexes[gi]);
    for (int bi = 0; bi < 2; ++bi) {
      for (const auto& s : sweep.trajs[gi][bi].snapshots) {
        str_gap = std::max(str_gap, std::abs(supertrace(*s.U).real() - chi));
        if (bi == 0) im_tr = std::max(im_tr, std::abs(s.U->m.trace().imag()));
      }
    }
  }
  record(4, str_gap < tol && im_tr < tol, "mckean-singer",
         "max |Re str U - chi| = " + fmt(str_gap) + ", max |Im tr U| at beta=0 = " +
             fmt(im_tr) + " (tol 1e-06)");
}

void criterion_5(const Sweep& sweep, const Trajectory& k2_t10) {
  constexpr double slack_per_step = 1e-10;
  constexpr double eig_tol = 1e-9;
  constexpr double attractor_tol = 1e-6;
  double mono_violation = 0.0, o_neg = 0.0, q_pos = 0.0;
  for (const auto& pair : sweep.trajs) {
    for (const auto& traj : pair) {
      const double slack = slack_per_step * traj.snapshot_every;
      for (std::size_t i = 0; i + 1 < traj.snapshots.size(); ++i) {
        const auto& a = traj.snapshots[i];
        const auto& b = traj.snapshots[i + 1];
        mono_violation = std::max(mono_violation, tr_M(b) - tr_M(a) - slack);
        mono_violation = std::max(mono_violation, tr_b2(a) - tr_b2(b) - slack);
      }
      for (const auto& s : traj.snapshots) {
        const Matrix dd = s.d.m * s.d.m.adjoint();
        o_neg = std::min(o_neg, min_sym_eig(s.b.m * dd));
        q_pos = std::max(q_pos, max_sym_eig(s.b.m * (s.d.m.adjoint() * s.d.m)));
      }
    }
  }
  const double trM_final = tr_M(k2_t10.back());
  const bool pass = mono_violation <= 0 && o_neg >= -eig_tol && q_pos <= eig_tol &&
                    trM_final < attractor_tol;
  record(5, pass, "monotonicity-positivity",
         "worst slackened monotonicity violation = " + fmt(mono_violation) +
             ", min eig(b dd*) = " + fmt(o_neg) + ", max eig(b d*d) = " + fmt(q_pos) +
             " (tol 1e-09), K2 tr M(10) = " + fmt(trM_final) + " (tol 1e-06)");
}

void criterion_6(const Sweep& sweep) {
  constexpr double anti_tol = 1e-9;
  constexpr double reflect_tol = 1e-8;
  double anti = 0.0, beta0_comm = 0.0, reflect = 0.0;
  for (std::size_t gi = 0; gi < sweep.trajs.size(); ++gi) {
    for (int bi = 0; bi < 2; ++bi) {
      for (const auto& s : sweep.trajs[gi][bi].snapshots) {
        anti = std::max(anti, max_abs(s.d.m * s.b.m + s.b.m * s.d.m));
        anti = std::max(anti, max_abs(s.d.m.adjoint() * s.b.m + s.b.m * s.d.m.adjoint()));
        anti = std::max(anti, max_abs(s.d.m * s.d.m));
        if (bi == 0) {
          const Matrix B = reconstruct_B(s).m, D = reconstruct_D(s).m;
          beta0_comm = std::max(beta0_comm, max_abs(B * D - D * B - 2.0 * B * D));
        }
      }
    }
    // time reflection at beta = 0: D(t) + D(-t) = 2 C(t)
    EvolveOptions opts;
    opts.snapshot_every = 10;
    const Trajectory& fwd = sweep.trajs[gi][0];
    Trajectory bwd = evolve(initial_state(sweep.complexes[gi], 0.0), -5.0, 1e-3, {}, opts);
    for (std::size_t i = 0; i < fwd.snapshots.size(); ++i) {
      const Matrix Df = reconstruct_D(fwd.snapshots[i]).m;
      const Matrix Db = reconstruct_D(bwd.snapshots[i]).m;
      const Matrix Cf = reconstruct_C(fwd.snapshots[i]).m;
      reflect = std::max(reflect, max_abs(Df + Db - 2.0 * Cf));
    }
  }
  const bool pass = anti < anti_tol && beta0_comm < anti_tol && reflect < reflect_tol;
  record(6, pass, "structural-identities",
         "max anticommutator/nilpotency residual = " + fmt(anti) +
             ", |[B,D] - 2BD| at beta=0 = " + fmt(beta0_comm) +
             " (tol 1e-09), |D(t) + D(-t) - 2C(t)| = " + fmt(reflect) + " (tol 1e-08)");
}

void criterion_7(const OrientedComplex& k2c) {
  constexpr double ratio_tol = 1e-4;
  constexpr double d20_tol = 1e-5;
  const BetaTimechange bt1 = beta_timechange_check(k2c, 1.0);
  const BetaTimechange bt2 = beta_timechange_check(k2c, 2.0);
  const double dev1 = std::abs(bt1.ratio_mean - 2.0);
  const double dev2 = std::abs(bt2.ratio_mean - 5.0);

  EvolveOptions opts;
  opts.snapshot_every = 100000;
  const Matrix D0 = reconstruct_D(evolve(initial_state(k2c, 0.0), 20.0, 1e-3, {}, opts).back()).m;
  const Matrix D1 = reconstruct_D(evolve(initial_state(k2c, 1.0), 20.0, 1e-3, {}, opts).back()).m;
  const double d20_gap = max_abs(D0 - D1);

  const bool pass = dev1 < ratio_tol && dev2 < ratio_tol && d20_gap < d20_tol;
  char head[160];
  std::snprintf(head, sizeof head,
                "acceleration ratio at matched points = %.9f (beta=1), %.9f (beta=2) vs "
                "pinned 2 and 5 (tol 1e-04)",
                bt1.ratio_mean, bt2.ratio_mean);
  record(7, pass, "beta-time-change",
         std::string(head) + "; |D_b0(20) - D_b1(20)| = " + fmt(d20_gap) + " (tol 1e-05)");
}

void criterion_8(const Sweep& sweep) {
  constexpr double cocycle_tol = 1e-7;
  bool betti_ok = true;
  double cocycle = 0.0;
  for (const auto& pair : sweep.trajs) {
    for (const auto& traj : pair) {
      const DiagnosticsReport rep = cohomology_check(traj);
      const Check* bc = rep.find("betti_constant");
      const Check* tc = rep.find("transported_cocycles");
      betti_ok = betti_ok && bc && bc->pass;
      if (tc && !tc->skipped) cocycle = std::max(cocycle, tc->residual);
    }
  }
  record(8, betti_ok && cocycle < cocycle_tol, "cohomology-preservation",
         std::string("betti numbers from d(t) ranks constant on all runs: ") +
             (betti_ok ? "yes" : "no") + ", max transported-cocycle residual = " +
             fmt(cocycle) + " (tol 1e-07)");
}

void criterion_9(const Trajectory& k2_t10) {
  constexpr double init_tol = 1e-9;
  constexpr double final_tol = 1e-3;
  constexpr double r2_floor = 0.99;
  Vector f = Vector::Zero(3);
  f[2] = 1.0;  // the edge coordinate spans the odd block
  const std::vector<double> alpha = fermion_angle(f, k2_t10);
  const std::vector<double> times = k2_t10.times();
  // snapshot grid is 0.01, so these indices are exact sample times
  const double a0 = alpha[0], a02 = alpha[20], a1 = alpha[100], a5 = alpha[500];
  const double a10 = alpha.back();
  const LogLinearFit fit = log_linear_fit(times, alpha, 5.0, 10.0);
  const bool pass = std::abs(a0 - std::numbers::pi / 2) < init_tol && a02 < a0 && a1 < a02 &&
                    a5 < a1 && a10 < final_tol && fit.r2 > r2_floor;
  char buf[200];
  std::snprintf(buf, sizeof buf,
                "alpha(0) - pi/2 = %.1e (tol 1e-09), alpha at 0.2/1/5 = %.3e/%.3e/%.3e "
                "strictly decreasing, alpha(10) = %.1e (tol 1e-03), tail fit r2 = %.6f "
                "rate = %.4f",
                a0 - std::numbers::pi / 2, a02, a1, a5, a10, fit.r2, fit.rate);
  record(9, pass, "fermion-angle-decay", buf);
}

void criterion_10() {
  constexpr double invariant_tol = 1e-8;
  constexpr double a_final_tol = 1e-4;
  constexpr double b_limit_tol = 1e-4;
  constexpr double block_tol = 1e-7;
  const CircleTrajectory traj = circle_model_evolve(circle_model_init(4), 10.0, 1e-3, 10);
  double invariant = 0.0, blocks = 0.0;
  for (std::size_t i = 0; i < traj.snapshots.size(); ++i) {
    if (traj.snapshots[i].t <= 5.0 + 1e-12)
      invariant = std::max(invariant, traj.observer_rows[i][1]);
    blocks = std::max(blocks, std::max(traj.observer_rows[i][2], traj.observer_rows[i][3]));
  }
  const CircleModelState& last = traj.snapshots.back();
  const double a_final = max_abs(last.A);
  Matrix absn = Matrix::Zero(last.B.rows(), last.B.cols());
  for (int n = -last.N, i = 0; n <= last.N; ++n, ++i) absn(i, i) = std::abs(n);
  const double b_gap = std::min(max_abs(last.B - absn), max_abs(last.B + absn));
  const bool pass = invariant < invariant_tol && a_final < a_final_tol &&
                    b_gap < b_limit_tol && blocks < block_tol;
  record(10, pass, "circle-model",
         "max |BA + AC| (t <= 5) = " + fmt(invariant) + " (tol 1e-08), |A(10)| = " +
             fmt(a_final) + " (tol 1e-04), B(10) vs diag|n| = " + fmt(b_gap) +
             " (tol 1e-04), block drift = " + fmt(blocks) + " (tol 1e-07)");
}

void criterion_11(const OrientedComplex& k3c) {
  constexpr double gap_tol = 1e-6;
  const K3Comparison plain = k3_compare_reduced_full(1.0, 1.0, 0.0, 3.0, 1e-3, true);
  const K3Comparison scaled = k3_compare_reduced_full(10.0, 1.0, 0.0, 3.0, 1e-3, true);

  EvolveOptions opts;
  opts.snapshot_every = 1;
  const Trajectory plain_traj =
      evolve(initial_state(k3c, 0.0, {1.0, 1.0}, false), 3.0, 1e-3, {}, opts);
  const Trajectory scaled_traj =
      evolve(initial_state(k3c, 0.0, {10.0, 1.0}, false), 3.0, 1e-3, {}, opts);
  const double plain_bump = inflation_report(plain_traj).bump_value;
  const double scaled_bump = inflation_report(scaled_traj).bump_value;

  const bool pass = plain.max_gap < gap_tol && scaled.max_gap < gap_tol &&
                    scaled_bump > plain_bump;
  record(11, pass, "k3-reduced-vs-full",
         "ansatz gap = " + fmt(plain.max_gap) + " plain, " + fmt(scaled.max_gap) +
             " with d1 x 10 (tol 1e-06); inflation bump " + fmt(scaled_bump) +
             " scaled > " + fmt(plain_bump) + " plain");
}

void criterion_12(const OrientedComplex& k2c, const OrientedComplex& c4c) {
  constexpr double zeta_tol = 1e-12;
  constexpr double energy_tol = 1e-9;
  constexpr double dist_tol = 1e-4;

  const cplx z = dirac_zeta(zeta_spectrum(dirac(k2c)), cplx(2.0, 0.0));
  const double zeta_gap = std::abs(z - cplx(1.0, 0.0));

  const GradedOperator L = laplacian(dirac(k2c));
  Vector u0 = Vector::Zero(3), v0 = Vector::Zero(3);
  u0[0] = 0.3;
  u0[1] = -0.4;
  u0[2] = 0.5;
  v0[0] = 0.2;
  v0[1] = -0.2;  // orthogonal to the constant-vertex kernel mode
  v0[2] = 0.7;
  const double e_ref = wave_energy(L, u0, v0);
  double energy_drift = 0.0;
  for (int i = 0; i <= 100; ++i) {
    const WaveSolution w = wave_solve(L, u0, v0, 0.1 * i);
    energy_drift = std::max(energy_drift, std::abs(wave_energy(L, w.u, w.v) - e_ref));
  }

  // hand value for the two-point graph: the optimal direction is the
  // difference function, whose scaled commutator has norm |f(1)-f(0)|/sqrt(2)
  const double d0 = connes_distance(dirac(k2c), k2c, 0, 1);
  const double dist_gap = std::abs(d0 - std::sqrt(2.0));

  bool monotone = true;
  std::string series;
  for (const OrientedComplex* c : {&k2c, &c4c}) {
    EvolveOptions opts;
    opts.snapshot_every = 10;
    const Trajectory traj = evolve(initial_state(*c, 0.0, {}, false), 4.0, 1e-3, {}, opts);
    double prev = -1.0;
    series += series.empty() ? "distances " : " | ";
    for (double t : {0.0, 0.5, 1.0, 2.0, 4.0}) {
      const std::size_t idx = static_cast<std::size_t>(std::lround(t / 0.01));
      const double dist =
          connes_distance(reconstruct_C(traj.snapshots[idx]), *c, 0, 1);
      if (dist < prev) monotone = false;
      prev = dist;
      char buf[24];
      std::snprintf(buf, sizeof buf, "%.4g ", dist);
      series += buf;
    }
  }
  const bool pass =
      zeta_gap < zeta_tol && energy_drift < energy_tol && dist_gap < dist_tol && monotone;
  record(12, pass, "spectral-tools",
         "|zeta(2) - 1| = " + fmt(zeta_gap) + " (tol 1e-12), wave energy drift = " +
             fmt(energy_drift) + " (tol 1e-09), |d(K2,0) - sqrt2| = " + fmt(dist_gap) +
             " (tol 1e-04), nondecreasing in t: " + (monotone ? "yes" : "no") + " [" +
             series + "]");
}

}  // namespace

int main() {
  const OrientedComplex k2c = testsupport::k2();
  const OrientedComplex k3c = testsupport::k3();
  const OrientedComplex c4c = testsupport::c4();

  EvolveOptions fine;
  fine.snapshot_every = 1;
  const Trajectory k2_fine = evolve(initial_state(k2c), 3.0, 1e-3, {}, fine);

  EvolveOptions every10;
  every10.snapshot_every = 10;
  const Trajectory k2_t10 = evolve(initial_state(k2c, 0.0, {}, false), 10.0, 1e-3, {}, every10);

  const Sweep sweep = run_sweep();

  criterion_1(k2_fine);
  criterion_2(k2_fine, k2c);
  criterion_3(sweep);
  criterion_4(sweep);
  criterion_5(sweep, k2_t10);
  criterion_6(sweep);
  criterion_7(k2c);
  criterion_8(sweep);
  criterion_9(k2_t10);
  criterion_10();
  criterion_11(k3c);
  criterion_12(k2c, c4c);

  if (g_failures == 0)
    std::printf("all criteria pass\n");
  else
    std::printf("%d criterion(s) failed; the README documents the expected red lines\n",
                g_failures);
  return g_failures;
}
