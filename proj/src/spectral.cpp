#include "diracflow/spectral.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <thread>

#include "diracflow/errors.hpp"

namespace diracflow {

namespace {

constexpr double kPi = 3.14159265358979323846;

cplx branch_factor(cplx s) { return 1.0 + std::exp(cplx(0.0, -kPi) * s); }

}  // namespace

ZetaSpec zeta_spectrum(const GradedOperator& op, double kernel_tol) {
  if (kernel_tol <= 0.0) throw UsageError("kernel tolerance must be positive");
  ZetaSpec z;
  for (double lam : sorted_spectrum(op.m)) {
    if (lam > kernel_tol) z.positive_eigenvalues.push_back(lam);
  }
  return z;
}

cplx dirac_zeta(const ZetaSpec& z, cplx s) {
  if (z.positive_eigenvalues.empty()) {
    throw UsageError("zeta of an empty spectrum is undefined");
  }
  cplx sum = 0.0;
  for (double lam : z.positive_eigenvalues) {
    if (lam <= 0.0) throw UsageError("zeta spectrum must be strictly positive");
    sum += std::exp(-s * std::log(lam));
  }
  return branch_factor(s) * sum;
}

cplx circle_graph_zeta(int n, cplx s, ZetaExponent exponent) {
  if (n < 3) throw UsageError("cycle zeta needs n >= 3");
  const cplx power = exponent == ZetaExponent::as_printed ? s : -s;
  cplx sum = 0.0;
  for (int k = 1; k < n; ++k) {
    const double base = std::sin(kPi * static_cast<double>(k) / static_cast<double>(n));
    sum += std::exp(power * std::log(base));
  }
  return branch_factor(s) * sum;
}

std::vector<ZetaGridPoint> zeta_grid(int n, double re_lo, double re_hi,
                                     double im_lo, double im_hi, double step,
                                     ZetaExponent exponent, int threads) {
  if (step <= 0.0 || re_hi < re_lo || im_hi < im_lo) {
    throw UsageError("malformed zeta grid window");
  }
  const auto count = [step](double lo, double hi) {
    return static_cast<int>(std::floor((hi - lo) / step + 1e-9)) + 1;
  };
  const int n_re = count(re_lo, re_hi);
  const int n_im = count(im_lo, im_hi);
  std::vector<ZetaGridPoint> pts(static_cast<std::size_t>(n_re) * n_im);
  const auto fill_rows = [&](int row_begin, int row_end) {
    for (int j = row_begin; j < row_end; ++j) {
      const double im = im_lo + j * step;
      for (int i = 0; i < n_re; ++i) {
        const double re = re_lo + i * step;
        ZetaGridPoint& p = pts[static_cast<std::size_t>(j) * n_re + i];
        p.re_s = re;
        p.im_s = im;
        p.value = circle_graph_zeta(n, cplx(re, im), exponent);
      }
    }
  };
  const int n_threads = std::clamp(threads, 1, n_im);
  if (n_threads == 1) {
    fill_rows(0, n_im);
  } else {
    std::vector<std::thread> pool;
    const int chunk = (n_im + n_threads - 1) / n_threads;
    for (int w = 0; w < n_threads; ++w) {
      const int lo = w * chunk;
      const int hi = std::min(n_im, lo + chunk);
      if (lo < hi) pool.emplace_back(fill_rows, lo, hi);
    }
    for (auto& th : pool) th.join();
  }
  return pts;
}

std::string zeta_grid_csv(const std::vector<ZetaGridPoint>& pts) {
  std::ostringstream os;
  os << "re_s,im_s,re_zeta,im_zeta,abs_zeta\n";
  os.precision(12);
  for (const auto& p : pts) {
    os << p.re_s << ',' << p.im_s << ',' << p.value.real() << ',' << p.value.imag()
       << ',' << std::abs(p.value) << '\n';
  }
  return os.str();
}

namespace {

struct WaveModes {
  Eigen::SelfAdjointEigenSolver<Matrix> es;
  explicit WaveModes(const GradedOperator& L) : es(L.m) {
    if (self_adjoint_residual(L.m) > 1e-9) {
      throw UsageError("wave operator must be self-adjoint");
    }
    if (es.eigenvalues().minCoeff() < -1e-9) {
      throw UsageError("wave operator must be positive semidefinite");
    }
  }
};

}  // namespace

WaveSolution wave_solve(const GradedOperator& L, const Vector& u0,
                        const Vector& v0, double t, bool project_kernel_velocity) {
  if (u0.size() != L.m.rows() || v0.size() != L.m.rows()) {
    throw UsageError("wave initial data has the wrong dimension");
  }
  const WaveModes modes(L);
  const Vector cu = modes.es.eigenvectors().adjoint() * u0;
  const Vector cv = modes.es.eigenvectors().adjoint() * v0;
  double kernel_velocity = 0.0;
  Vector out_u = Vector::Zero(u0.size());
  Vector out_v = Vector::Zero(u0.size());
  for (int i = 0; i < cu.size(); ++i) {
    const double lam = modes.es.eigenvalues()[i];
    if (lam <= 1e-9) {
      kernel_velocity = std::hypot(kernel_velocity, std::abs(cv[i]));
      out_u[i] = cu[i];  // kernel position is frozen, velocity dropped
      out_v[i] = 0.0;
    } else {
      const double w = std::sqrt(lam);
      out_u[i] = std::cos(w * t) * cu[i] + std::sin(w * t) / w * cv[i];
      out_v[i] = -w * std::sin(w * t) * cu[i] + std::cos(w * t) * cv[i];
    }
  }
  if (kernel_velocity > 1e-9 && !project_kernel_velocity) {
    throw UsageError(
        "initial velocity has a kernel component; pass the projection flag to drop it");
  }
  WaveSolution sol;
  sol.u = modes.es.eigenvectors() * out_u;
  sol.v = modes.es.eigenvectors() * out_v;
  return sol;
}

double wave_energy(const GradedOperator& L, const Vector& u, const Vector& v) {
  return v.squaredNorm() + (u.dot(L.m * u)).real();
}

namespace {

double commutator_opnorm(const Matrix& C, const Eigen::VectorXd& ext) {
  Matrix X = C;
  for (int i = 0; i < C.rows(); ++i) {
    for (int j = 0; j < C.cols(); ++j) {
      X(i, j) *= ext[j] - ext[i];  // [C, diag(e)](i,j) = C_ij (e_j - e_i)
    }
  }
  Eigen::JacobiSVD<Matrix> svd(X);
  return svd.singularValues().size() ? svd.singularValues()[0] : 0.0;
}

// Vertex labels need not be contiguous; positions index the value vector.
std::map<int, int> vertex_positions(const OrientedComplex& c) {
  std::map<int, int> pos;
  if (c.simplices.empty()) return pos;
  for (const auto& v : c.simplices[0]) pos[v[0]] = static_cast<int>(pos.size());
  return pos;
}

// Mean extension of vertex values to all simplices, as a diagonal.
Eigen::VectorXd mean_extension(const OrientedComplex& c, const std::map<int, int>& pos,
                               const Eigen::VectorXd& u) {
  Eigen::VectorXd ext(c.total_dim);
  int idx = 0;
  for (const auto& group : c.simplices) {
    for (const auto& simplex : group) {
      double acc = 0.0;
      for (int v : simplex) acc += u[pos.at(v)];
      ext[idx++] = acc / static_cast<double>(simplex.size());
    }
  }
  return ext;
}

// Nelder-Mead minimization, dimension n >= 1, small and dependency-free.
template <typename F>
double nelder_mead(F&& f, Eigen::VectorXd& x, double scale, int max_iter) {
  const int n = static_cast<int>(x.size());
  std::vector<Eigen::VectorXd> pts(static_cast<std::size_t>(n) + 1, x);
  std::vector<double> val(static_cast<std::size_t>(n) + 1);
  for (int i = 1; i <= n; ++i) pts[static_cast<std::size_t>(i)][i - 1] += scale;
  for (std::size_t i = 0; i < pts.size(); ++i) val[i] = f(pts[i]);
  for (int iter = 0; iter < max_iter; ++iter) {
    std::vector<std::size_t> order(pts.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return val[a] < val[b]; });
    const std::size_t best = order.front(), worst = order.back();
    if (val[worst] - val[best] < 1e-14 * (1.0 + std::abs(val[best]))) break;
    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
    for (std::size_t k = 0; k + 1 < order.size(); ++k) centroid += pts[order[k]];
    centroid /= static_cast<double>(n);
    const Eigen::VectorXd refl = centroid + (centroid - pts[worst]);
    const double f_refl = f(refl);
    if (f_refl < val[best]) {
      const Eigen::VectorXd expd = centroid + 2.0 * (centroid - pts[worst]);
      const double f_expd = f(expd);
      if (f_expd < f_refl) {
        pts[worst] = expd;
        val[worst] = f_expd;
      } else {
        pts[worst] = refl;
        val[worst] = f_refl;
      }
    } else if (f_refl < val[order[order.size() - 2]]) {
      pts[worst] = refl;
      val[worst] = f_refl;
    } else {
      const Eigen::VectorXd contr = centroid + 0.5 * (pts[worst] - centroid);
      const double f_contr = f(contr);
      if (f_contr < val[worst]) {
        pts[worst] = contr;
        val[worst] = f_contr;
      } else {
        for (std::size_t k = 1; k < order.size(); ++k) {
          pts[order[k]] = pts[best] + 0.5 * (pts[order[k]] - pts[best]);
          val[order[k]] = f(pts[order[k]]);
        }
      }
    }
  }
  std::size_t arg = 0;
  for (std::size_t i = 1; i < val.size(); ++i)
    if (val[i] < val[arg]) arg = i;
  x = pts[arg];
  return val[arg];
}

}  // namespace

double connes_distance(const GradedOperator& C, const OrientedComplex& c,
                       int x, int y, int n_starts, std::uint64_t seed) {
  const std::map<int, int> pos = vertex_positions(c);
  const int n_vertices = static_cast<int>(pos.size());
  if (!pos.count(x) || !pos.count(y)) {
    throw UsageError("unknown vertex label");
  }
  if (C.m.rows() != c.total_dim) {
    throw UsageError("operator dimension disagrees with the complex");
  }
  if (x == y) return 0.0;

  // u = 1 at x, 0 at y; the other vertices are free coordinates.
  std::vector<int> free_idx;
  for (const auto& [label, p] : pos) {
    if (label != x && label != y) free_idx.push_back(p);
  }
  const auto assemble = [&](const Eigen::VectorXd& free_vals) {
    Eigen::VectorXd u = Eigen::VectorXd::Zero(n_vertices);
    u[pos.at(x)] = 1.0;
    for (std::size_t k = 0; k < free_idx.size(); ++k) {
      u[free_idx[k]] = free_vals[static_cast<int>(k)];
    }
    return u;
  };
  const auto objective = [&](const Eigen::VectorXd& free_vals) {
    return commutator_opnorm(C.m, mean_extension(c, pos, assemble(free_vals)));
  };

  const int k = static_cast<int>(free_idx.size());
  double best = std::numeric_limits<double>::infinity();
  Eigen::VectorXd best_free = Eigen::VectorXd::Zero(k);

  if (n_vertices <= 4) {
    // exact grid over the free coordinates, then a local polish
    const double lo = -1.5, hi = 2.5, step = 0.02;
    const int m = static_cast<int>(std::lround((hi - lo) / step)) + 1;
    Eigen::VectorXd vals = Eigen::VectorXd::Zero(k);
    const long total = static_cast<long>(std::pow(m, k));
    for (long it = 0; it < std::max(1L, total); ++it) {
      long rem = it;
      for (int d = 0; d < k; ++d) {
        vals[d] = lo + static_cast<double>(rem % m) * step;
        rem /= m;
      }
      const double v = objective(vals);
      if (v < best) {
        best = v;
        best_free = vals;
      }
    }
    if (k > 0 && best > 1e-12) {
      best = std::min(best, nelder_mead(objective, best_free, 0.02, 400));
    }
  } else {
    std::mt19937_64 rng(seed * 2654435761u + 12345u);
    std::normal_distribution<double> gauss(0.5, 1.0);
    for (int attempt = 0; attempt < std::max(1, n_starts); ++attempt) {
      Eigen::VectorXd start = Eigen::VectorXd::Zero(k);
      if (attempt > 0) {
        for (int d = 0; d < k; ++d) start[d] = gauss(rng);
      }
      double v = objective(start);
      if (k > 0) v = std::min(v, nelder_mead(objective, start, 0.25, 600 * k));
      if (v < best) {
        best = v;
        best_free = start;
      }
    }
  }

  if (best < 1e-9) return std::numeric_limits<double>::infinity();
  return 1.0 / best;
}

namespace {

double traj_trace_M(const FlowState& s) { return 2.0 * s.d.m.squaredNorm(); }

double traj_trace_M_dot(const FlowState& s) {
  const FlowRhs k = rhs(s);
  return 4.0 * (k.d_dot * s.d.m.adjoint()).trace().real();
}

}  // namespace

InflationReport inflation_report(const Trajectory& traj) {
  const auto& snaps = traj.snapshots;
  if (snaps.size() < 3) throw UsageError("trajectory too short for an inflation report");
  for (const auto& s : snaps) {
    if (s.t < -1e-12) throw UsageError("inflation statements apply to t >= 0");
  }
  InflationReport rep;
  rep.times = traj.times();
  const std::size_t n = snaps.size();
  rep.tr_M.reserve(n);
  rep.neg_dtrM_exact.reserve(n);
  for (const auto& s : snaps) {
    rep.tr_M.push_back(traj_trace_M(s));
    rep.neg_dtrM_exact.push_back(-traj_trace_M_dot(s));
  }
  rep.neg_dtrM.assign(n, 0.0);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    rep.neg_dtrM[i] =
        -(rep.tr_M[i + 1] - rep.tr_M[i - 1]) / (rep.times[i + 1] - rep.times[i - 1]);
  }
  rep.neg_dtrM[0] = -(-3.0 * rep.tr_M[0] + 4.0 * rep.tr_M[1] - rep.tr_M[2]) /
                    (2.0 * (rep.times[1] - rep.times[0]));
  rep.neg_dtrM[n - 1] =
      -(3.0 * rep.tr_M[n - 1] - 4.0 * rep.tr_M[n - 2] + rep.tr_M[n - 3]) /
      (2.0 * (rep.times[n - 1] - rep.times[n - 2]));

  std::size_t arg = 0;
  rep.min_derivative = rep.neg_dtrM_exact[0];
  for (std::size_t i = 0; i < n; ++i) {
    if (rep.neg_dtrM_exact[i] > rep.neg_dtrM_exact[arg]) arg = i;
    rep.min_derivative = std::min(rep.min_derivative, rep.neg_dtrM_exact[i]);
  }
  rep.bump_t = rep.times[arg];
  rep.bump_value = rep.neg_dtrM_exact[arg];
  rep.initial_derivative = rep.neg_dtrM_exact.front();
  rep.final_derivative = rep.neg_dtrM_exact.back();

  rep.checks.add("inflation_nonnegative", std::max(0.0, -rep.min_derivative), 1e-9,
                 "-d/dt tr M never goes negative");
  rep.checks.add("inflation_initial_zero", std::abs(rep.initial_derivative), 1e-6,
                 "the decay rate starts at zero");
  rep.checks.add("inflation_final_zero", std::abs(rep.final_derivative), 1e-6,
                 "the decay rate has died off by the end of the run");

  if (rep.times.back() - rep.bump_t < 2.0) {
    rep.partial = true;
  } else {
    const double lo = rep.bump_t + 0.5 * (rep.times.back() - rep.bump_t);
    rep.tail = log_linear_fit(rep.times, rep.neg_dtrM_exact, lo, rep.times.back());
  }
  return rep;
}

}  // namespace diracflow
