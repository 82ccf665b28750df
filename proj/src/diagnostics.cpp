#include "diracflow/diagnostics.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <iomanip>
#include <set>
#include <sstream>

#include "diracflow/errors.hpp"

namespace diracflow {

namespace {

double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

double min_sym_eig(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.adjoint()), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

double max_sym_eig(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.adjoint()), Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

double commutator_norm(const Matrix& a, const Matrix& b) { return max_abs(a * b - b * a); }

// tr M = tr(dd* + d*d) = 2 ||d||_F^2
double trace_M(const FlowState& s) { return 2.0 * s.d.m.squaredNorm(); }

double trace_b2(const FlowState& s) { return (s.b.m * s.b.m).trace().real(); }

// d/dt tr M along the flow, from the split rhs
double trace_M_dot(const FlowState& s) {
  const FlowRhs k = rhs(s);
  return 4.0 * (k.d_dot * s.d.m.adjoint()).trace().real();
}

double euler_char(const Grading& g) {
  double chi = 0.0;
  for (int p = 0; p < g.degrees(); ++p) chi += (p % 2 == 0 ? 1.0 : -1.0) * g.block_size(p);
  return chi;
}

// Gap-checked singular rank. d(0) has unit-magnitude integer entries, so
// the absolute scale is meaningful: kernel singular values sit at the
// integrator's roundoff (~1e-12 after a few thousand steps) while genuine
// ones decay exponentially but stay above ~1e-10 on desk-scale runs to
// t = 5. The cutoff 1e-11 separates the two; a value inside the factor-3
// guard band around it means double precision is exhausted and the rank is
// reported ambiguous rather than guessed.
int checked_rank(const Matrix& m, double t_where) {
  constexpr double cutoff = 1e-11;
  constexpr double guard = 3.0;
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<Matrix> svd(m);
  const auto& sv = svd.singularValues();
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i) {
    if (sv[i] >= cutoff / guard && sv[i] <= cutoff * guard) {
      std::ostringstream os;
      os << "singular value " << sv[i] << " at t = " << t_where
         << " falls inside the rank guard band [" << cutoff / guard << ", "
         << cutoff * guard << "]";
      throw NumericError(os.str());
    }
    if (sv[i] > cutoff) ++rank;
  }
  return rank;
}

std::vector<int> betti_from_ranks(const FlowState& s) {
  const Grading& g = s.grading();
  const int P = g.degrees();
  std::vector<int> rank_d(static_cast<std::size_t>(P), 0);
  for (int p = 0; p + 1 < P; ++p) {
    const Matrix block = s.d.m.block(g.block_start(p + 1), g.block_start(p),
                                     g.block_size(p + 1), g.block_size(p));
    rank_d[static_cast<std::size_t>(p)] = checked_rank(block, s.t);
  }
  std::vector<int> betti(static_cast<std::size_t>(P), 0);
  for (int p = 0; p < P; ++p) {
    const int lower = (p > 0) ? rank_d[static_cast<std::size_t>(p - 1)] : 0;
    betti[static_cast<std::size_t>(p)] = g.block_size(p) - rank_d[static_cast<std::size_t>(p)] - lower;
  }
  return betti;
}

// Orthonormal kernel basis of m (right singular vectors below tol).
std::vector<Vector> kernel_basis(const Matrix& m, double tol) {
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullV);
  std::vector<Vector> out;
  for (int i = 0; i < svd.singularValues().size(); ++i) {
    if (svd.singularValues()[i] < tol) out.push_back(svd.matrixV().col(i));
  }
  // columns of V beyond the singular value count (wide matrices) are kernel too
  for (int i = svd.singularValues().size(); i < svd.matrixV().cols(); ++i) {
    out.push_back(svd.matrixV().col(i));
  }
  return out;
}

struct PlaneBasis {
  std::vector<Vector> cols;  // orthonormal, 1 or 2 vectors
};

PlaneBasis plane_basis(const Vector& f, const Matrix& D0) {
  PlaneBasis basis;
  basis.cols.push_back(f.normalized());
  Vector w = D0 * basis.cols[0];
  w -= basis.cols[0].dot(w) * basis.cols[0];
  if (w.norm() > 1e-9) basis.cols.push_back(w.normalized());
  return basis;
}

double span_distance(const Vector& v, const PlaneBasis& basis) {
  Vector r = v;
  for (const Vector& e : basis.cols) r -= e.dot(r) * e;
  return r.norm();
}

Eigen::MatrixXcd restricted(const Matrix& op, const PlaneBasis& basis) {
  const int k = static_cast<int>(basis.cols.size());
  Eigen::MatrixXcd g(k, k);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) g(i, j) = basis.cols[static_cast<std::size_t>(i)].dot(op * basis.cols[static_cast<std::size_t>(j)]);
  return g;
}

void validate_eigenvector(const Vector& f, const Matrix& L0, double& lambda_out) {
  if (f.norm() < 1e-12) throw UsageError("zero vector");
  const Vector fn = f.normalized();
  const cplx lam = fn.dot(L0 * fn);
  const double lambda = lam.real();
  if ((L0 * fn - lambda * fn).cwiseAbs().maxCoeff() > 1e-8) {
    throw UsageError("vector is not an eigenvector of the initial Laplacian");
  }
  if (std::abs(lambda) < 1e-8) {
    throw UsageError("kernel eigenvectors span no invariant plane");
  }
  lambda_out = lambda;
}

}  // namespace

void DiagnosticsReport::add(const std::string& name, double residual,
                            double tolerance, const std::string& statement) {
  checks.push_back({name, residual, tolerance, residual <= tolerance, statement, false});
}

void DiagnosticsReport::add_skipped(const std::string& name, const std::string& statement) {
  checks.push_back({name, 0.0, 0.0, true, statement, true});
}

void DiagnosticsReport::merge(const DiagnosticsReport& other) {
  checks.insert(checks.end(), other.checks.begin(), other.checks.end());
  if (times.empty()) times = other.times;
  for (const auto& s : other.series) {
    const bool dup = std::any_of(series.begin(), series.end(),
                                 [&](const auto& mine) { return mine.first == s.first; });
    if (!dup) series.push_back(s);
  }
}

bool DiagnosticsReport::all_pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

const Check* DiagnosticsReport::find(const std::string& name) const {
  for (const auto& c : checks)
    if (c.name == name) return &c;
  return nullptr;
}

DiagnosticsReport monotonicity_report(const Trajectory& traj) {
  const auto& snaps = traj.snapshots;
  if (snaps.empty()) throw UsageError("empty trajectory");
  for (const auto& s : snaps) {
    if (s.t < -1e-12) throw UsageError("monotonicity statements apply to t >= 0");
  }
  DiagnosticsReport rep;
  rep.times = traj.times();
  std::vector<double> trM, trb2;
  trM.reserve(snaps.size());
  trb2.reserve(snaps.size());
  for (const auto& s : snaps) {
    trM.push_back(trace_M(s));
    trb2.push_back(trace_b2(s));
  }
  const double slack = 1e-10 * std::max(1, traj.snapshot_every);
  double worst_b2 = 0.0, worst_M = 0.0;
  for (std::size_t i = 0; i + 1 < snaps.size(); ++i) {
    worst_b2 = std::max(worst_b2, trb2[i] - trb2[i + 1]);
    worst_M = std::max(worst_M, trM[i + 1] - trM[i]);
  }
  rep.add("tr_b2_nondecreasing", std::max(0.0, worst_b2), slack,
          "tr(b^2) never drops between snapshots");
  rep.add("tr_M_nonincreasing", std::max(0.0, worst_M), slack,
          "tr(M) never rises between snapshots");

  // finite-difference -d/dt tr M: central inside, second-order one-sided ends
  std::vector<double> neg(snaps.size(), 0.0);
  const std::size_t n = snaps.size();
  if (n >= 3) {
    for (std::size_t i = 1; i + 1 < n; ++i) {
      neg[i] = -(trM[i + 1] - trM[i - 1]) / (rep.times[i + 1] - rep.times[i - 1]);
    }
    const double h0 = rep.times[1] - rep.times[0];
    neg[0] = -(-3.0 * trM[0] + 4.0 * trM[1] - trM[2]) / (2.0 * h0);
    const double h1 = rep.times[n - 1] - rep.times[n - 2];
    neg[n - 1] = -(3.0 * trM[n - 1] - 4.0 * trM[n - 2] + trM[n - 3]) / (2.0 * h1);
  } else if (n == 2) {
    neg[0] = neg[1] = -(trM[1] - trM[0]) / (rep.times[1] - rep.times[0]);
  }
  std::vector<double> neg_exact;
  neg_exact.reserve(n);
  for (const auto& s : snaps) neg_exact.push_back(-trace_M_dot(s));
  rep.series.emplace_back("tr_M", std::move(trM));
  rep.series.emplace_back("tr_b2", std::move(trb2));
  rep.series.emplace_back("neg_dtrM", std::move(neg));
  rep.series.emplace_back("neg_dtrM_exact", std::move(neg_exact));
  return rep;
}

namespace {

struct PositivityResiduals {
  double neg_O = 0.0, pos_Q = 0.0, sym_O = 0.0, sym_Q = 0.0, im_O = 0.0, im_Q = 0.0;

  void absorb(const FlowState& s) {
    const Matrix R = s.d.m * s.d.m.adjoint();
    const Matrix S = s.d.m.adjoint() * s.d.m;
    const Matrix O = s.b.m * R;
    const Matrix Q = s.b.m * S;
    neg_O = std::max(neg_O, -min_sym_eig(O));
    pos_Q = std::max(pos_Q, max_sym_eig(Q));
    sym_O = std::max(sym_O, max_abs(O - O.transpose()));
    sym_Q = std::max(sym_Q, max_abs(Q - Q.transpose()));
    im_O = std::max(im_O, O.imag().size() ? O.imag().cwiseAbs().maxCoeff() : 0.0);
    im_Q = std::max(im_Q, Q.imag().size() ? Q.imag().cwiseAbs().maxCoeff() : 0.0);
  }

  DiagnosticsReport to_report() const {
    DiagnosticsReport rep;
    rep.add("positivity_O_mineig", std::max(0.0, neg_O), 1e-9,
            "b dd* has no negative eigenvalues");
    rep.add("positivity_Q_maxeig", std::max(0.0, pos_Q), 1e-9,
            "b d*d has no positive eigenvalues");
    rep.add("positivity_O_symmetry", sym_O, 1e-9, "b dd* is symmetric");
    rep.add("positivity_Q_symmetry", sym_Q, 1e-9, "b d*d is symmetric");
    rep.add("positivity_O_real", im_O, 1e-9, "b dd* is real for every beta");
    rep.add("positivity_Q_real", im_Q, 1e-9, "b d*d is real for every beta");
    return rep;
  }
};

}  // namespace

DiagnosticsReport positivity_check(const FlowState& s) {
  PositivityResiduals acc;
  acc.absorb(s);
  return acc.to_report();
}

DiagnosticsReport positivity_scan(const Trajectory& traj) {
  PositivityResiduals acc;
  for (const auto& s : traj.snapshots) acc.absorb(s);
  return acc.to_report();
}

DiagnosticsReport mckean_singer_check(const Trajectory& traj) {
  const auto& snaps = traj.snapshots;
  if (snaps.empty()) throw UsageError("empty trajectory");
  if (!snaps.front().U) throw UsageError("trajectory does not carry the unitary");
  const double chi = euler_char(snaps.front().grading());
  DiagnosticsReport rep;
  double worst_str = 0.0;
  double worst_im_tr = 0.0;
  for (const auto& s : snaps) {
    if (!s.U) throw UsageError("trajectory does not carry the unitary");
    const cplx st = supertrace(*s.U);
    worst_str = std::max(worst_str, std::abs(st.real() - chi));
    worst_im_tr = std::max(worst_im_tr, std::abs(s.U->m.trace().imag()));
  }
  rep.add("mckean_singer_str_U", worst_str, 1e-6,
          "Re str U(t) equals the Euler characteristic at every snapshot");
  if (snaps.front().beta == 0.0) {
    rep.add("trace_U_real", worst_im_tr, 1e-6, "tr U(t) stays real at beta = 0");
  } else {
    rep.add_skipped("trace_U_real", "tr U(t) realness is only claimed at beta = 0");
  }
  const GradedOperator B0 = reconstruct_B(snaps.front());
  Matrix P = Matrix::Identity(B0.m.rows(), B0.m.cols());
  double worst_B = 0.0;
  for (int k = 1; k <= 4; ++k) {
    P = P * B0.m;
    worst_B = std::max(worst_B, std::abs(supertrace({P, B0.grading}).real()));
  }
  rep.add("str_B_powers_initial", worst_B, 1e-6,
          "Re str B^k vanishes at the initial state for k = 1..4");
  return rep;
}

DiagnosticsReport plane_invariance(const Vector& f, const Trajectory& traj) {
  const auto& snaps = traj.snapshots;
  if (snaps.empty()) throw UsageError("empty trajectory");
  const Matrix D0 = reconstruct_D(snaps.front()).m;
  const Matrix L0 = D0 * D0;
  double lambda = 0.0;
  validate_eigenvector(f, L0, lambda);
  const Vector fn = f.normalized();
  const PlaneBasis basis = plane_basis(fn, D0);

  double worst_span = 0.0, worst_super = 0.0;
  double worst_det_O = 0.0, worst_det_Q = 0.0;
  double worst_tr_O = 0.0, worst_tr_Q = 0.0;
  for (const auto& s : snaps) {
    const Matrix Dt = reconstruct_D(s).m;
    const Vector v = Dt * fn;
    worst_span = std::max(worst_span, span_distance(v, basis));
    worst_super = std::max(worst_super, (L0 * v - lambda * v).cwiseAbs().maxCoeff());
    if (max_abs(s.b.m) > 1e-6) {
      const Matrix R = s.d.m * s.d.m.adjoint();
      const Matrix S = s.d.m.adjoint() * s.d.m;
      const auto gauge = [&](const Matrix& op, double& worst_det, double& worst_tr) {
        const Eigen::MatrixXcd g = restricted(op, basis);
        const double fro = g.norm();
        if (g.rows() == 2) worst_det = std::max(worst_det, std::abs(g.determinant()));
        if (fro > 1e-9) {
          worst_tr = std::max(worst_tr, std::max(0.0, 1e-3 * fro - std::abs(g.trace())));
        }
      };
      gauge(s.b.m * R, worst_det_O, worst_tr_O);
      gauge(s.b.m * S, worst_det_Q, worst_tr_Q);
    }
  }
  DiagnosticsReport rep;
  rep.add("plane_span", worst_span, 1e-7,
          "D(t)f stays in the plane spanned by f and D(0)f");
  rep.add("plane_superpartner", worst_super, 1e-8,
          "D(t)f remains an eigenvector of the initial Laplacian");
  rep.add("plane_O_det", worst_det_O, 1e-8,
          "plane restriction of b dd* is singular (rank one)");
  rep.add("plane_Q_det", worst_det_Q, 1e-8,
          "plane restriction of b d*d is singular (rank one)");
  rep.add("plane_O_trace", worst_tr_O, 1e-12,
          "plane restriction of b dd* keeps a nonzero trace once b is visible");
  rep.add("plane_Q_trace", worst_tr_Q, 1e-12,
          "plane restriction of b d*d keeps a nonzero trace once b is visible");
  return rep;
}

std::vector<double> fermion_angle(const Vector& f, const Trajectory& traj) {
  const auto& snaps = traj.snapshots;
  if (snaps.empty()) throw UsageError("empty trajectory");
  const Grading& g = snaps.front().grading();
  if (f.size() != g.dim()) throw UsageError("vector length disagrees with the operator dimension");
  double even_part = 0.0;
  for (int i = 0; i < g.dim(); ++i) {
    if (g.degree_of_index[static_cast<std::size_t>(i)] % 2 == 0) even_part += std::norm(f[i]);
  }
  if (std::sqrt(even_part) > 1e-9 * f.norm()) {
    throw UsageError("vector must be supported on odd degrees");
  }
  const Matrix D0 = reconstruct_D(snaps.front()).m;
  double lambda = 0.0;
  validate_eigenvector(f, D0 * D0, lambda);
  const Vector fn = f.normalized();

  std::vector<double> alpha;
  alpha.reserve(snaps.size());
  for (const auto& s : snaps) {
    const Vector v = reconstruct_D(s).m * fn;
    double even_norm2 = 0.0;
    for (int i = 0; i < g.dim(); ++i) {
      if (g.degree_of_index[static_cast<std::size_t>(i)] % 2 == 0) even_norm2 += std::norm(v[i]);
    }
    const double ratio = std::sqrt(even_norm2) / v.norm();
    alpha.push_back(std::asin(std::clamp(ratio, 0.0, 1.0)));
  }
  return alpha;
}

DiagnosticsReport dolbeault_check(const FlowState& s) {
  DiagnosticsReport rep;
  if (s.beta == 0.0) {
    rep.add_skipped("dolbeault", "the split is vacuous at beta = 0 (d stays real)");
    return rep;
  }
  const Matrix P = s.d.m.real().cast<cplx>();
  const Matrix Pb = (cplx(0.0, 1.0) * s.d.m.imag().cast<cplx>().array()).matrix();
  rep.add("dolbeault_dP2", max_abs(P * P), 1e-8, "Re(d) squares to zero");
  rep.add("dolbeault_dPb2", max_abs(Pb * Pb), 1e-8, "i Im(d) squares to zero");
  rep.add("dolbeault_cross1", max_abs(P * Pb), 1e-8, "the two halves multiply to zero");
  rep.add("dolbeault_cross2", max_abs(Pb * P), 1e-8, "the two halves multiply to zero (reverse)");
  rep.add("dolbeault_sum", max_abs(s.d.m - (P + Pb)), 1e-12, "d equals the sum of its halves");
  return rep;
}

BetaTimechange beta_timechange_check(const OrientedComplex& c, double beta,
                                     double t_end, double h) {
  if (t_end <= 0.0 || h <= 0.0) throw UsageError("time-change check needs positive span and step");

  const auto b_ddot = [](const FlowState& s) -> Matrix {
    const cplx coeff(1.0, -s.beta);
    const Matrix d_dot = coeff * (s.d.m * s.b.m - s.b.m * s.d.m);
    return 2.0 * (d_dot * s.d.m.adjoint() + s.d.m * d_dot.adjoint() -
                  d_dot.adjoint() * s.d.m - s.d.m.adjoint() * d_dot);
  };

  EvolveOptions opts;
  opts.snapshot_every = 1;
  const FlowState base0 = initial_state(c, 0.0, {}, false);
  const FlowState beta0 = initial_state(c, beta, {}, false);
  const Trajectory base = evolve(base0, t_end, h, {}, opts);
  const Trajectory run = evolve(beta0, t_end, h, {}, opts);

  std::vector<double> run_b2;
  run_b2.reserve(run.snapshots.size());
  for (const auto& s : run.snapshots) run_b2.push_back(trace_b2(s));
  for (std::size_t i = 0; i + 1 < run_b2.size(); ++i) {
    if (run_b2[i + 1] <= run_b2[i] && run.snapshots[i].t > 0.0) {
      throw NumericError("tr(b^2) is not strictly increasing; matching window is ill-posed");
    }
  }

  // matched state in the beta run with tr(b^2) equal to the target, found by
  // bisection on a fractional step from the bracketing snapshot
  const auto matched_state = [&](double target) -> FlowState {
    const auto it = std::lower_bound(run_b2.begin(), run_b2.end(), target);
    if (it == run_b2.begin() || it == run_b2.end()) {
      throw NumericError("matched value falls outside the integrated window");
    }
    const std::size_t hi_idx = static_cast<std::size_t>(it - run_b2.begin());
    const FlowState& lo_state = run.snapshots[hi_idx - 1];
    double lo = 0.0, hi = run.snapshots[hi_idx].t - lo_state.t;
    for (int iter = 0; iter < 60; ++iter) {
      const double mid = 0.5 * (lo + hi);
      const double val = (mid == 0.0) ? trace_b2(lo_state) : trace_b2(step_rk4(lo_state, mid));
      if (val < target) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    const double dt = 0.5 * (lo + hi);
    return dt == 0.0 ? lo_state : step_rk4(lo_state, dt);
  };

  BetaTimechange out;
  out.claimed_ratio = 1.0 + beta * beta;
  bool first = true;
  double ratio_sum = 0.0;
  int ratio_count = 0;
  double worst_path = 0.0;
  for (double frac : {0.2, 0.35, 0.5, 0.65, 0.8}) {
    const std::size_t idx = static_cast<std::size_t>(std::llround(
        frac * static_cast<double>(base.snapshots.size() - 1)));
    const FlowState& ref = base.snapshots[idx];
    if (ref.t <= 0.0) continue;
    const FlowState matched = matched_state(trace_b2(ref));
    worst_path = std::max(worst_path, max_abs(matched.b.m - ref.b.m));
    const Matrix acc0 = b_ddot(ref);
    const Matrix accb = b_ddot(matched);
    const double scale = max_abs(acc0);
    for (int r = 0; r < acc0.rows(); ++r) {
      for (int cidx = 0; cidx < acc0.cols(); ++cidx) {
        if (std::abs(acc0(r, cidx)) > 1e-6 * scale) {
          const double ratio = accb(r, cidx).real() / acc0(r, cidx).real();
          if (first) {
            out.ratio_min = out.ratio_max = ratio;
            first = false;
          }
          out.ratio_min = std::min(out.ratio_min, ratio);
          out.ratio_max = std::max(out.ratio_max, ratio);
          ratio_sum += ratio;
          ++ratio_count;
        }
      }
    }
  }
  if (ratio_count == 0) throw NumericError("no usable entries for the acceleration ratio");
  out.ratio_mean = ratio_sum / static_cast<double>(ratio_count);
  out.path_residual = worst_path;

  out.report.add("timechange_path", worst_path, 1e-5,
                 "the b curve at beta coincides with the beta = 0 curve at matched tr(b^2)");
  out.report.add("timechange_ratio_spread", out.ratio_max - out.ratio_min, 1e-4,
                 "the entrywise acceleration ratio is a single number");
  out.report.add("timechange_ratio", std::abs(out.ratio_mean - out.claimed_ratio), 1e-4,
                 "acceleration ratio at matched points equals 1 + beta^2");
  return out;
}

DiagnosticsReport cohomology_check(const Trajectory& traj) {
  const auto& snaps = traj.snapshots;
  if (snaps.empty()) throw UsageError("empty trajectory");
  const std::vector<int> betti0 = betti_from_ranks(snaps.front());
  double worst = 0.0;
  for (const auto& s : snaps) {
    const std::vector<int> bt = betti_from_ranks(s);
    for (std::size_t p = 0; p < bt.size(); ++p) {
      worst = std::max(worst, std::abs(static_cast<double>(bt[p] - betti0[p])));
    }
  }
  DiagnosticsReport rep;
  rep.add("betti_constant", worst, 0.5,
          "betti numbers from d(t) ranks stay at their initial values");

  const std::vector<Vector> kernel = kernel_basis(snaps.front().d.m, 1e-8);
  double worst_cocycle = 0.0;
  if (!kernel.empty()) {
    const auto transported = transport_cocycle(kernel, traj, TransportMode::cocycle);
    for (std::size_t k = 0; k < transported.size(); ++k) {
      for (std::size_t i = 0; i < snaps.size(); ++i) {
        worst_cocycle = std::max(
            worst_cocycle, (snaps[i].d.m * transported[k][i]).cwiseAbs().maxCoeff());
      }
    }
  }
  rep.add("transported_cocycles", worst_cocycle, 1e-7,
          "transported d(0)-kernel vectors stay in the d(t) kernel");
  return rep;
}

const std::vector<std::string>& known_check_names() {
  static const std::vector<std::string> names = {
      "structure",    "monotonicity", "positivity",      "mckean_singer",
      "plane",        "fermion_angle", "dolbeault",      "cohomology",
      "beta_timechange"};
  return names;
}

namespace {

DiagnosticsReport structure_checks(const Trajectory& traj) {
  const auto& snaps = traj.snapshots;
  const FlowState& s0 = snaps.front();
  const Matrix D0 = reconstruct_D(s0).m;
  const Matrix L0 = D0 * D0;
  const std::vector<double> spec0 = sorted_spectrum(D0);

  double anti_db = 0.0, anti_dsb = 0.0, nilpotent = 0.0, beta0_form = 0.0;
  double commuting = 0.0, traces = 0.0, poisson = 0.0, b_real = 0.0, d_sa = 0.0;
  double l_split = 0.0, m_psd = 0.0, v_psd = 0.0, spec_sym = 0.0, iso = 0.0;
  double l_const = 0.0, conj = 0.0, unit = 0.0, commutator = 0.0;
  std::vector<cplx> tr0(6);
  {
    Matrix P = Matrix::Identity(D0.rows(), D0.cols());
    for (int k = 0; k < 6; ++k) {
      P = P * D0;
      tr0[static_cast<std::size_t>(k)] = P.trace();
    }
  }
  const bool has_U = s0.U.has_value();
  for (const auto& s : snaps) {
    const Matrix& d = s.d.m;
    const Matrix& b = s.b.m;
    const Matrix D = reconstruct_D(s).m;
    const Matrix B = reconstruct_B(s).m;
    const Matrix D2 = D * D;
    anti_db = std::max(anti_db, max_abs(d * b + b * d));
    anti_dsb = std::max(anti_dsb, max_abs(d.adjoint() * b + b * d.adjoint()));
    nilpotent = std::max(nilpotent, max_abs(d * d));
    if (s.beta == 0.0) {
      beta0_form = std::max(beta0_form, max_abs(B * D + D * B));
      poisson = std::max({poisson, 6.0 * std::abs((D * B * D2).trace()),
                          12.0 * std::abs((D2 * B * D2 * D).trace())});
    }
    const Matrix R = d * d.adjoint();
    const Matrix S = d.adjoint() * d;
    const Matrix b2 = b * b;
    commuting = std::max({commuting, commutator_norm(b, R), commutator_norm(b, S),
                          commutator_norm(R, S), commutator_norm(b2, R), commutator_norm(b2, S)});
    {
      Matrix P = Matrix::Identity(D.rows(), D.cols());
      for (int k = 0; k < 6; ++k) {
        P = P * D;
        traces = std::max(traces, std::abs(P.trace() - tr0[static_cast<std::size_t>(k)]));
      }
    }
    b_real = std::max({b_real, b.imag().size() ? b.imag().cwiseAbs().maxCoeff() : 0.0,
                       max_abs(b - b.transpose())});
    d_sa = std::max(d_sa, self_adjoint_residual(D));
    const Matrix M = R + S;
    const Matrix V = b2;
    l_split = std::max(l_split, commutator_norm(M, V));
    m_psd = std::max(m_psd, -min_sym_eig(M));
    v_psd = std::max(v_psd, -min_sym_eig(V));
    const std::vector<double> spec = sorted_spectrum(D);
    const std::size_t n = spec.size();
    for (std::size_t i = 0; i < n; ++i) {
      spec_sym = std::max(spec_sym, std::abs(spec[i] + spec[n - 1 - i]));
      iso = std::max(iso, std::abs(spec[i] - spec0[i]));
    }
    l_const = std::max(l_const, max_abs(D2 - L0));
    if (has_U && s.U) {
      conj = std::max(conj, max_abs(D - s.U->m * D0 * s.U->m.adjoint()));
      unit = std::max(unit, max_abs(s.U->m.adjoint() * s.U->m -
                                    Matrix::Identity(D.rows(), D.cols())));
    }
    commutator = std::max(commutator, rhs_commutator_residual(s, traj.flow_poly));
  }

  DiagnosticsReport rep;
  rep.add("anticommutator_d_b", anti_db, 1e-9, "{d, b} vanishes along the flow");
  rep.add("anticommutator_ds_b", anti_dsb, 1e-9, "{d*, b} vanishes along the flow");
  rep.add("nilpotency", nilpotent, 1e-9, "d(t) squares to zero");
  if (s0.beta == 0.0) {
    rep.add("beta0_commutator_2BD", beta0_form, 1e-9,
            "[B, D] equals 2 B D when beta = 0");
  } else {
    rep.add_skipped("beta0_commutator_2BD", "identity only claimed at beta = 0");
  }
  rep.add("commuting_family", commuting, 1e-8,
          "b, dd*, d*d and b^2 commute pairwise");
  rep.add("conserved_traces", traces, 1e-8, "tr D^k is constant for k = 1..6");
  if (s0.beta == 0.0) {
    rep.add("poisson_probe", poisson, 1e-8,
            "trace pairing of distinct power gradients through B vanishes");
  } else {
    rep.add_skipped("poisson_probe",
                    "the pairing is purely imaginary and only vanishes in the real case");
  }
  rep.add("b_real_symmetric", b_real, 1e-9, "b stays real symmetric for every beta");
  rep.add("D_self_adjoint", d_sa, 1e-9, "reconstructed D stays self-adjoint");
  rep.add("L_split_commute", l_split, 1e-8, "M = dd* + d*d commutes with V = b^2");
  rep.add("M_psd", std::max(0.0, m_psd), 1e-9, "M has no negative eigenvalues");
  rep.add("V_psd", std::max(0.0, v_psd), 1e-9, "V has no negative eigenvalues");
  rep.add("spectrum_symmetry", spec_sym, 1e-8, "the spectrum stays symmetric about zero");
  rep.add("isospectrality", iso, 1e-8, "sorted spectrum of D(t) matches D(0)");
  rep.add("L_constancy", l_const, 1e-8, "D(t)^2 never moves");
  if (has_U) {
    rep.add("unitary_conjugation", conj, 1e-6, "D(t) equals U D(0) U*");
    rep.add("unitary_unitarity", unit, 1e-8, "the carried U stays unitary");
  } else {
    rep.add_skipped("unitary_conjugation", "no unitary carried on this run");
    rep.add_skipped("unitary_unitarity", "no unitary carried on this run");
  }
  rep.add("rhs_commutator", commutator, 1e-12,
          "split rhs reproduces the dense commutator");
  return rep;
}

// Fold several same-shaped fragments into max residuals per check name.
DiagnosticsReport fold_max(const std::vector<DiagnosticsReport>& parts) {
  DiagnosticsReport out;
  if (parts.empty()) return out;
  out = parts.front();
  for (std::size_t i = 1; i < parts.size(); ++i) {
    for (const auto& c : parts[i].checks) {
      bool found = false;
      for (auto& oc : out.checks) {
        if (oc.name == c.name) {
          if (c.residual > oc.residual) {
            oc.residual = c.residual;
            oc.pass = c.pass;
          }
          found = true;
          break;
        }
      }
      if (!found) out.checks.push_back(c);
    }
  }
  return out;
}

}  // namespace

DiagnosticsReport run_all_checks(const OrientedComplex& c, const DiagnoseSettings& cfg) {
  std::set<std::string> wanted;
  for (const auto& name : cfg.checks) {
    if (name == "all") {
      wanted.insert(known_check_names().begin(), known_check_names().end());
    } else if (std::find(known_check_names().begin(), known_check_names().end(), name) !=
               known_check_names().end()) {
      wanted.insert(name);
    } else {
      throw UsageError("unknown check name: " + name);
    }
  }
  if (wanted.empty()) throw UsageError("no checks requested");

  FlowState s0 = initial_state(c, cfg.beta, cfg.gamma, cfg.with_unitary);
  EvolveOptions opts;
  opts.snapshot_every = cfg.snapshot_every;
  opts.flow_poly = cfg.flow_poly;
  const Trajectory traj = evolve(s0, cfg.t_end, cfg.h, standard_observers(s0), opts);

  DiagnosticsReport rep;
  rep.times = traj.times();
  for (std::size_t k = 0; k < traj.observer_names.size(); ++k) {
    std::string name = traj.observer_names[k];
    if (name == "spec_drift") name = "spectrum_drift";
    std::vector<double> col;
    col.reserve(traj.observer_rows.size());
    for (const auto& row : traj.observer_rows) col.push_back(row[k]);
    rep.series.emplace_back(std::move(name), std::move(col));
  }

  if (wanted.count("structure")) rep.merge(structure_checks(traj));
  if (wanted.count("monotonicity")) rep.merge(monotonicity_report(traj));
  if (wanted.count("positivity")) rep.merge(positivity_scan(traj));
  if (wanted.count("mckean_singer")) rep.merge(mckean_singer_check(traj));

  if (wanted.count("plane")) {
    const Matrix D0 = reconstruct_D(traj.front()).m;
    Eigen::SelfAdjointEigenSolver<Matrix> es(D0 * D0);
    std::vector<DiagnosticsReport> parts;
    std::vector<double> seen;
    for (int i = 0; i < es.eigenvalues().size(); ++i) {
      const double lam = es.eigenvalues()[i];
      if (lam < 1e-8) continue;
      bool dup = false;
      for (double sv : seen) dup = dup || std::abs(sv - lam) < 1e-6;
      if (dup) continue;
      seen.push_back(lam);
      parts.push_back(plane_invariance(es.eigenvectors().col(i), traj));
    }
    if (parts.empty()) {
      DiagnosticsReport none;
      none.add_skipped("plane_span", "no nonzero Laplacian eigenvalues to test");
      rep.merge(none);
    } else {
      rep.merge(fold_max(parts));
    }
  }

  if (wanted.count("fermion_angle")) {
    const Grading& g = traj.front().grading();
    const Matrix D0 = reconstruct_D(traj.front()).m;
    const Matrix L0 = D0 * D0;
    // largest odd-block eigenvalue and its eigenvector, embedded
    Vector best;
    double best_lam = 1e-8;
    for (int p = 1; p < g.degrees(); p += 2) {
      if (g.block_size(p) == 0) continue;
      const Matrix block = L0.block(g.block_start(p), g.block_start(p),
                                    g.block_size(p), g.block_size(p));
      Eigen::SelfAdjointEigenSolver<Matrix> es(block);
      const int last = static_cast<int>(es.eigenvalues().size()) - 1;
      if (last < 0 || es.eigenvalues()[last] <= best_lam) continue;
      best_lam = es.eigenvalues()[last];
      best = Vector::Zero(g.dim());
      best.segment(g.block_start(p), g.block_size(p)) = es.eigenvectors().col(last);
    }
    DiagnosticsReport frag;
    if (best.size() == 0) {
      frag.add_skipped("fermion_angle_initial", "no odd-degree eigenvector available");
    } else {
      const std::vector<double> alpha = fermion_angle(best, traj);
      frag.add("fermion_angle_initial", std::abs(alpha.front() - M_PI / 2.0), 1e-9,
               "the angle starts at a right angle (D(0)f is bosonic)");
      frag.add("fermion_angle_decrease", std::max(0.0, alpha.back() - alpha.front()),
               1e-9, "the angle at the end of the run is below its start");
      frag.series.emplace_back("angle", alpha);
    }
    rep.merge(frag);
  }

  if (wanted.count("dolbeault")) {
    std::vector<DiagnosticsReport> parts;
    const std::size_t n = traj.snapshots.size();
    for (std::size_t idx : {n / 2, n - 1}) {
      parts.push_back(dolbeault_check(traj.snapshots[idx]));
    }
    rep.merge(fold_max(parts));
  }

  if (wanted.count("cohomology")) rep.merge(cohomology_check(traj));
  if (wanted.count("beta_timechange")) {
    rep.merge(beta_timechange_check(c, cfg.beta, std::min(cfg.t_end, 2.0), cfg.h).report);
  }
  return rep;
}

LogLinearFit log_linear_fit(const std::vector<double>& t, const std::vector<double>& y,
                            double t_lo, double t_hi) {
  if (t.size() != y.size()) throw UsageError("series lengths disagree");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < t_lo || t[i] > t_hi || y[i] <= 0.0) continue;
    const double ly = std::log(y[i]);
    sx += t[i];
    sy += ly;
    sxx += t[i] * t[i];
    sxy += t[i] * ly;
    ++n;
  }
  LogLinearFit fit;
  fit.n = n;
  if (n < 3) return fit;
  const double denom = n * sxx - sx * sx;
  fit.rate = (n * sxy - sx * sy) / denom;
  fit.intercept = (sy - fit.rate * sx) / n;
  double ss_res = 0, ss_tot = 0;
  const double mean = sy / n;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < t_lo || t[i] > t_hi || y[i] <= 0.0) continue;
    const double ly = std::log(y[i]);
    const double pred = fit.intercept + fit.rate * t[i];
    ss_res += (ly - pred) * (ly - pred);
    ss_tot += (ly - mean) * (ly - mean);
  }
  fit.r2 = (ss_tot > 0.0) ? 1.0 - ss_res / ss_tot : 1.0;
  return fit;
}

nlohmann::json report_json(const DiagnosticsReport& r) {
  nlohmann::json j;
  j["all_pass"] = r.all_pass();
  j["checks"] = nlohmann::json::array();
  for (const auto& c : r.checks) {
    j["checks"].push_back({{"name", c.name},
                           {"residual", c.residual},
                           {"tolerance", c.tolerance},
                           {"pass", c.pass},
                           {"skipped", c.skipped},
                           {"statement", c.statement}});
  }
  nlohmann::json series = nlohmann::json::object();
  if (!r.times.empty()) series["t"] = r.times;
  for (const auto& [name, vals] : r.series) series[name] = vals;
  j["series"] = series;
  return j;
}

std::string report_text(const DiagnosticsReport& r) {
  std::ostringstream os;
  std::size_t width = 4;
  for (const auto& c : r.checks) width = std::max(width, c.name.size());
  for (const auto& c : r.checks) {
    os << std::left << std::setw(static_cast<int>(width) + 2) << c.name;
    if (c.skipped) {
      os << "SKIP      " << c.statement << '\n';
      continue;
    }
    os << (c.pass ? "PASS" : "FAIL") << "  " << std::scientific << std::setprecision(3)
       << c.residual << " <= " << c.tolerance << "  " << c.statement << '\n';
  }
  return os.str();
}

std::string series_csv(const DiagnosticsReport& r) {
  std::ostringstream os;
  os << "t";
  for (const auto& [name, vals] : r.series) os << ',' << name;
  os << '\n';
  os << std::setprecision(17);
  for (std::size_t i = 0; i < r.times.size(); ++i) {
    os << r.times[i];
    for (const auto& [name, vals] : r.series) {
      os << ',' << (i < vals.size() ? vals[i] : std::nan(""));
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace diracflow
