#include "diracflow/flow.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <sstream>

#include "diracflow/errors.hpp"

namespace diracflow {

namespace {

bool poly_is_identity(const std::vector<double>& poly) {
  return poly.size() == 1 && poly[0] == 1.0;
}

void validate_poly(const std::vector<double>& poly) {
  for (double c : poly) {
    if (c != 0.0) return;
  }
  throw UsageError("flow polynomial must have a nonzero coefficient");
}

// Horner evaluation of f(L) for L = (d + d* + b)^2 of the given stage.
Matrix poly_of_laplacian(const Matrix& d, const Matrix& b,
                         const std::vector<double>& poly) {
  const Matrix D = d + d.adjoint() + b;
  const Matrix L = D * D;
  const long n = d.rows();
  Matrix F = poly.back() * Matrix::Identity(n, n);
  for (std::size_t i = poly.size() - 1; i-- > 0;) {
    F = F * L;
    F.diagonal().array() += poly[i];
  }
  return F;
}

// Joint stage value: the flow pair, the optional unitary, and any vectors
// transported alongside. RK4 linear combinations act componentwise, so the
// (d, b) arithmetic is bit-identical whether or not U or vectors ride along.
struct Stage {
  Matrix d;
  Matrix b;
  std::optional<Matrix> U;
  std::vector<Vector> v;
};

Stage stage_rhs(const Stage& y, double beta, const std::vector<double>& poly,
                const std::vector<TransportMode>& modes) {
  const cplx coeff(1.0, -beta);
  Stage k;
  k.d = coeff * (y.d * y.b - y.b * y.d);
  k.b = 2.0 * (y.d * y.d.adjoint() - y.d.adjoint() * y.d);
  const bool trivial = poly_is_identity(poly);
  Matrix F;
  if (!trivial) {
    F = poly_of_laplacian(y.d, y.b, poly);
    k.d = F * k.d;
    k.b = F * k.b;
  }
  const bool need_B = y.U.has_value() ||
                      std::find(modes.begin(), modes.end(), TransportMode::harmonic) != modes.end();
  Matrix B;
  if (need_B) {
    B = y.d - y.d.adjoint() + cplx(0.0, beta) * y.b;
    if (!trivial) B = F * B;
  }
  if (y.U) k.U = B * *y.U;
  k.v.reserve(y.v.size());
  for (std::size_t i = 0; i < y.v.size(); ++i) {
    if (modes[i] == TransportMode::cocycle) {
      k.v.push_back(-coeff * (y.b * y.v[i]));
    } else {
      k.v.push_back(B * y.v[i]);
    }
  }
  return k;
}

Stage stage_axpy(const Stage& y, double a, const Stage& k) {
  Stage out;
  out.d = y.d + a * k.d;
  out.b = y.b + a * k.b;
  if (y.U) out.U = *y.U + a * *k.U;
  out.v.reserve(y.v.size());
  for (std::size_t i = 0; i < y.v.size(); ++i) out.v.push_back(y.v[i] + a * k.v[i]);
  return out;
}

void rk4_step(Stage& y, double h, double beta, const std::vector<double>& poly,
              const std::vector<TransportMode>& modes) {
  const Stage k1 = stage_rhs(y, beta, poly, modes);
  const Stage k2 = stage_rhs(stage_axpy(y, h / 2.0, k1), beta, poly, modes);
  const Stage k3 = stage_rhs(stage_axpy(y, h / 2.0, k2), beta, poly, modes);
  const Stage k4 = stage_rhs(stage_axpy(y, h, k3), beta, poly, modes);
  y.d += (h / 6.0) * (k1.d + 2.0 * k2.d + 2.0 * k3.d + k4.d);
  y.b += (h / 6.0) * (k1.b + 2.0 * k2.b + 2.0 * k3.b + k4.b);
  if (y.U) *y.U += (h / 6.0) * (*k1.U + 2.0 * *k2.U + 2.0 * *k3.U + *k4.U);
  for (std::size_t i = 0; i < y.v.size(); ++i) {
    y.v[i] += (h / 6.0) * (k1.v[i] + 2.0 * k2.v[i] + 2.0 * k3.v[i] + k4.v[i]);
  }
}

struct StepPlan {
  long n_full = 0;
  double h = 0.0;       // signed
  double h_last = 0.0;  // signed, 0 if none
  long total_steps() const { return n_full + (h_last != 0.0 ? 1 : 0); }
};

StepPlan plan_steps(double t0, double t_end, double h) {
  if (h == 0.0) throw UsageError("step size must be nonzero");
  const double span = t_end - t0;
  const double mag = std::abs(span);
  const double hmag = std::abs(h);
  if (mag == 0.0 || hmag > mag * (1.0 + 1e-12)) {
    throw UsageError("step size exceeds the integration span");
  }
  const double dir = span > 0.0 ? 1.0 : -1.0;
  StepPlan plan;
  plan.h = dir * hmag;
  const long rounded = std::lround(mag / hmag);
  if (rounded > 0 && std::abs(static_cast<double>(rounded) * hmag - mag) <= 1e-9 * std::max(1.0, mag)) {
    plan.n_full = rounded;
  } else {
    plan.n_full = static_cast<long>(std::floor(mag / hmag));
    plan.h_last = dir * (mag - static_cast<double>(plan.n_full) * hmag);
  }
  return plan;
}

void check_finite(const Stage& y, double t) {
  if (y.d.allFinite() && y.b.allFinite() && (!y.U || y.U->allFinite())) return;
  std::ostringstream os;
  os << "state became non-finite near t = " << t;
  throw NumericError(os.str());
}

double commutator_residual(const Matrix& d, const Matrix& b, double beta,
                           const std::vector<double>& poly) {
  const cplx coeff(1.0, -beta);
  Matrix d_dot = coeff * (d * b - b * d);
  Matrix b_dot = 2.0 * (d * d.adjoint() - d.adjoint() * d);
  const Matrix D = d + d.adjoint() + b;
  const Matrix B = d - d.adjoint() + cplx(0.0, beta) * b;
  Matrix dense = B * D - D * B;
  if (!poly_is_identity(poly)) {
    const Matrix F = poly_of_laplacian(d, b, poly);
    d_dot = F * d_dot;
    b_dot = F * b_dot;
    dense = F * dense;
  }
  const Matrix split_full = d_dot + d_dot.adjoint() + b_dot;
  if (split_full.size() == 0) return 0.0;
  return (split_full - dense).cwiseAbs().maxCoeff();
}

double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

}  // namespace

FlowState initial_state(const OrientedComplex& c, double beta,
                        const std::vector<double>& gamma, bool with_unitary) {
  GradedOperator D0 = dirac(c, gamma);
  SplitParts parts = split(D0);
  FlowState s;
  s.d = parts.raising;
  s.b = GradedOperator{Matrix::Zero(D0.dim(), D0.dim()), D0.grading};
  s.t = 0.0;
  s.beta = beta;
  s.gamma = gamma;
  if (with_unitary) {
    s.U = GradedOperator{Matrix::Identity(D0.dim(), D0.dim()), D0.grading};
  }
  return s;
}

GradedOperator reconstruct_D(const FlowState& s) {
  return {s.d.m + s.d.m.adjoint() + s.b.m, s.grading()};
}

GradedOperator reconstruct_B(const FlowState& s) {
  return {s.d.m - s.d.m.adjoint() + cplx(0.0, s.beta) * s.b.m, s.grading()};
}

GradedOperator reconstruct_C(const FlowState& s) {
  return {s.d.m + s.d.m.adjoint(), s.grading()};
}

FlowRhs rhs(const FlowState& s) {
  const cplx coeff(1.0, -s.beta);
  return {coeff * (s.d.m * s.b.m - s.b.m * s.d.m),
          2.0 * (s.d.m * s.d.m.adjoint() - s.d.m.adjoint() * s.d.m)};
}

FlowRhs higher_flow_rhs(const FlowState& s, const std::vector<double>& poly) {
  validate_poly(poly);
  FlowRhs base = rhs(s);
  if (poly_is_identity(poly)) return base;
  const Matrix F = poly_of_laplacian(s.d.m, s.b.m, poly);
  return {F * base.d_dot, F * base.b_dot};
}

double rhs_commutator_residual(const FlowState& s, const std::vector<double>& poly) {
  validate_poly(poly);
  return commutator_residual(s.d.m, s.b.m, s.beta, poly);
}

FlowState step_rk4(const FlowState& s, double h, const std::vector<double>& poly) {
  if (h == 0.0) throw UsageError("step size must be nonzero");
  validate_poly(poly);
  Stage y{s.d.m, s.b.m, s.U ? std::optional<Matrix>(s.U->m) : std::nullopt, {}};
  rk4_step(y, h, s.beta, poly, {});
  check_finite(y, s.t + h);
  FlowState out = s;
  out.d.m = std::move(y.d);
  out.b.m = std::move(y.b);
  out.t = s.t + h;
  if (out.U) out.U->m = std::move(*y.U);
  return out;
}

std::vector<Observer> standard_observers(const FlowState& initial) {
  const std::vector<double> spec0 = sorted_spectrum(reconstruct_D(initial).m);
  std::vector<Observer> obs;
  obs.push_back({"tr_M", [](const FlowState& s) {
                   return 2.0 * s.d.m.squaredNorm();
                 }});
  obs.push_back({"tr_b2", [](const FlowState& s) {
                   return (s.b.m * s.b.m).trace().real();
                 }});
  obs.push_back({"spec_drift", [spec0](const FlowState& s) {
                   const std::vector<double> spec = sorted_spectrum(reconstruct_D(s).m);
                   double drift = 0.0;
                   for (std::size_t i = 0; i < spec.size(); ++i) {
                     drift = std::max(drift, std::abs(spec[i] - spec0[i]));
                   }
                   return drift;
                 }});
  obs.push_back({"str_U_re", [](const FlowState& s) {
                   return s.U ? supertrace(*s.U).real() : std::nan("");
                 }});
  obs.push_back({"str_U_im", [](const FlowState& s) {
                   return s.U ? supertrace(*s.U).imag() : std::nan("");
                 }});
  obs.push_back({"norm_d", [](const FlowState& s) { return max_abs(s.d.m); }});
  return obs;
}

std::vector<double> Trajectory::times() const {
  std::vector<double> out;
  out.reserve(snapshots.size());
  for (const auto& s : snapshots) out.push_back(s.t);
  return out;
}

Trajectory evolve(const FlowState& s, double t_end, double h,
                  const std::vector<Observer>& observers, const EvolveOptions& opts) {
  if (opts.snapshot_every < 1) throw UsageError("snapshot_every must be at least 1");
  validate_poly(opts.flow_poly);
  const StepPlan plan = plan_steps(s.t, t_end, h);

  Trajectory traj;
  traj.h = plan.h;
  traj.n_full_steps = plan.n_full;
  traj.h_last = plan.h_last;
  traj.snapshot_every = opts.snapshot_every;
  traj.flow_poly = opts.flow_poly;
  for (const auto& o : observers) traj.observer_names.push_back(o.name);

  FlowState cur = s;
  Stage y{cur.d.m, cur.b.m, cur.U ? std::optional<Matrix>(cur.U->m) : std::nullopt, {}};
  const long total = plan.total_steps();

  auto record = [&](double t) {
    cur.d.m = y.d;
    cur.b.m = y.b;
    cur.t = t;
    if (cur.U) cur.U->m = *y.U;
    traj.snapshots.push_back(cur);
    std::vector<double> row;
    row.reserve(observers.size());
    for (const auto& o : observers) row.push_back(o.fn(traj.snapshots.back()));
    traj.observer_rows.push_back(std::move(row));
  };

  record(s.t);
  for (long i = 1; i <= total; ++i) {
    if (opts.commutator_guard) {
      const double resid = commutator_residual(y.d, y.b, cur.beta, opts.flow_poly);
      if (resid > 1e-12) {
        std::ostringstream os;
        os << "split rhs disagrees with the dense commutator by " << resid;
        throw NumericError(os.str());
      }
    }
    const double hi = (i <= plan.n_full) ? plan.h : plan.h_last;
    const double ti = (i == total) ? t_end : s.t + static_cast<double>(i) * plan.h;
    rk4_step(y, hi, cur.beta, opts.flow_poly, {});
    check_finite(y, ti);
    if (y.U && opts.renorm_check_every > 0 && i % opts.renorm_check_every == 0) {
      const Matrix gram = y.U->adjoint() * *y.U;
      const Matrix eye = Matrix::Identity(gram.rows(), gram.cols());
      if ((gram - eye).cwiseAbs().maxCoeff() > opts.renorm_threshold) {
        Eigen::JacobiSVD<Matrix> svd(*y.U, Eigen::ComputeFullU | Eigen::ComputeFullV);
        *y.U = svd.matrixU() * svd.matrixV().adjoint();
      }
    }
    if (i % opts.snapshot_every == 0 || i == total) record(ti);
  }
  return traj;
}

double unitary_conjugation_residual(const FlowState& s, const GradedOperator& D0) {
  if (!s.U) throw UsageError("state does not carry the unitary");
  const Matrix rebuilt = s.U->m * D0.m * s.U->m.adjoint();
  return max_abs(reconstruct_D(s).m - rebuilt);
}

std::vector<std::vector<Vector>> transport_cocycle(const std::vector<Vector>& fs,
                                                   const Trajectory& traj,
                                                   TransportMode mode) {
  if (traj.snapshots.empty()) throw UsageError("empty trajectory");
  const FlowState& s0 = traj.front();
  for (const Vector& f : fs) {
    if (f.size() != s0.d.m.rows()) throw UsageError("vector length disagrees with the operator dimension");
  }
  const std::vector<TransportMode> modes(fs.size(), mode);
  Stage y{s0.d.m, s0.b.m, std::nullopt, fs};
  std::vector<std::vector<Vector>> out(fs.size());
  for (std::size_t k = 0; k < fs.size(); ++k) {
    out[k].reserve(traj.snapshots.size());
    out[k].push_back(fs[k]);
  }
  const long total = traj.n_full_steps + (traj.h_last != 0.0 ? 1 : 0);
  for (long i = 1; i <= total; ++i) {
    const double hi = (i <= traj.n_full_steps) ? traj.h : traj.h_last;
    rk4_step(y, hi, s0.beta, traj.flow_poly, modes);
    if (i % traj.snapshot_every == 0 || i == total) {
      for (std::size_t k = 0; k < fs.size(); ++k) out[k].push_back(y.v[k]);
    }
  }
  for (const auto& series : out) {
    if (series.size() != traj.snapshots.size()) {
      throw NumericError("transport grid fell out of step with the trajectory");
    }
  }
  return out;
}

std::vector<Vector> transport_cocycle(const Vector& f, const Trajectory& traj,
                                      TransportMode mode) {
  return transport_cocycle(std::vector<Vector>{f}, traj, mode).front();
}

std::optional<double> convergence_time(const Trajectory& traj, double thresh) {
  const auto& snaps = traj.snapshots;
  const double t_last = snaps.back().t;
  std::vector<double> nd;
  nd.reserve(snaps.size());
  for (const auto& s : snaps) nd.push_back(max_abs(s.d.m));
  for (std::size_t i = 0; i < snaps.size(); ++i) {
    if (snaps[i].t + 1.0 > t_last + 1e-9) break;
    bool ok = true;
    for (std::size_t j = i; j < snaps.size() && snaps[j].t <= snaps[i].t + 1.0; ++j) {
      if (nd[j] >= thresh) {
        ok = false;
        break;
      }
    }
    if (ok) return snaps[i].t;
  }
  return std::nullopt;
}

}  // namespace diracflow
