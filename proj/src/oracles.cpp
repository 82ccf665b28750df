#include "diracflow/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "diracflow/errors.hpp"

namespace diracflow {

namespace {

// Minimal complex type usable at double and __float128 precision. Only
// ring operations appear, so no libquadmath dependency is needed.
template <typename R>
struct QC {
  R re{};
  R im{};
  QC() = default;
  QC(R r, R i) : re(r), im(i) {}
  QC operator+(const QC& o) const { return {re + o.re, im + o.im}; }
  QC operator-(const QC& o) const { return {re - o.re, im - o.im}; }
  QC operator*(const QC& o) const { return {re * o.re - im * o.im, re * o.im + im * o.re}; }
  QC conj() const { return {re, -im}; }
};

template <typename R>
QC<R> operator*(R a, const QC<R>& z) {
  return {a * z.re, a * z.im};
}

template <typename R>
R gabs(R x) {
  return x < R(0) ? -x : x;
}

template <typename R>
R abs2(const QC<R>& z) {
  return z.re * z.re + z.im * z.im;
}

template <typename R>
struct K3V {
  R b1, b2, b4, b5, b6;
  QC<R> d1, d2;
};

template <typename R>
K3V<R> k3_rhs_t(const K3V<R>& s, R beta) {
  const R a1 = abs2(s.d1);
  const R a2 = abs2(s.d2);
  const QC<R> c(R(1), -beta);
  K3V<R> k;
  k.b1 = R(-4) * a1;
  k.b2 = R(2) * a1;
  k.b4 = R(4) * a1 - R(2) * a2;
  k.b5 = R(2) * a1 + R(2) * a2;
  k.b6 = R(6) * a2;
  k.d1 = (s.b1 - s.b2 - s.b4 - s.b5) * (c * s.d1);
  k.d2 = (s.b4 - R(2) * s.b5 - s.b6) * (c * s.d2);
  return k;
}

template <typename R>
K3V<R> k3_axpy(const K3V<R>& y, R a, const K3V<R>& k) {
  return {y.b1 + a * k.b1, y.b2 + a * k.b2, y.b4 + a * k.b4,
          y.b5 + a * k.b5, y.b6 + a * k.b6,
          y.d1 + a * k.d1, y.d2 + a * k.d2};
}

template <typename R>
void k3_rk4(K3V<R>& y, R h, R beta) {
  const K3V<R> k1 = k3_rhs_t(y, beta);
  const K3V<R> k2 = k3_rhs_t(k3_axpy(y, h / R(2), k1), beta);
  const K3V<R> k3 = k3_rhs_t(k3_axpy(y, h / R(2), k2), beta);
  const K3V<R> k4 = k3_rhs_t(k3_axpy(y, h, k3), beta);
  const R w = h / R(6);
  y.b1 += w * (k1.b1 + R(2) * k2.b1 + R(2) * k3.b1 + k4.b1);
  y.b2 += w * (k1.b2 + R(2) * k2.b2 + R(2) * k3.b2 + k4.b2);
  y.b4 += w * (k1.b4 + R(2) * k2.b4 + R(2) * k3.b4 + k4.b4);
  y.b5 += w * (k1.b5 + R(2) * k2.b5 + R(2) * k3.b5 + k4.b5);
  y.b6 += w * (k1.b6 + R(2) * k2.b6 + R(2) * k3.b6 + k4.b6);
  y.d1 = y.d1 + w * (k1.d1 + R(2) * k2.d1 + R(2) * k3.d1 + k4.d1);
  y.d2 = y.d2 + w * (k1.d2 + R(2) * k2.d2 + R(2) * k3.d2 + k4.d2);
}

// Incidence patterns of the triangle complex, ascending orientations,
// index order v1 v2 v3 e12 e13 e23 t123.
constexpr int kEdgeRows[3][7] = {{-1, 1, 0, 0, 0, 0, 0},
                                 {-1, 0, 1, 0, 0, 0, 0},
                                 {0, -1, 1, 0, 0, 0, 0}};
constexpr int kTriRow[7] = {0, 0, 0, 1, -1, 1, 0};
constexpr int kEdgeK[3][3] = {{0, 1, -1}, {1, 0, 1}, {-1, 1, 0}};

template <typename R>
struct M7 {
  QC<R> a[7][7]{};
};

template <typename R>
M7<R> mul(const M7<R>& x, const M7<R>& y) {
  M7<R> z;
  for (int i = 0; i < 7; ++i)
    for (int k = 0; k < 7; ++k) {
      const QC<R> xik = x.a[i][k];
      if (xik.re == R(0) && xik.im == R(0)) continue;
      for (int j = 0; j < 7; ++j) z.a[i][j] = z.a[i][j] + xik * y.a[k][j];
    }
  return z;
}

template <typename R>
M7<R> adj(const M7<R>& x) {
  M7<R> z;
  for (int i = 0; i < 7; ++i)
    for (int j = 0; j < 7; ++j) z.a[i][j] = x.a[j][i].conj();
  return z;
}

template <typename R>
struct Full7 {
  M7<R> d, b;
};

template <typename R>
Full7<R> full_rhs(const Full7<R>& y, R beta) {
  const QC<R> c(R(1), -beta);
  const M7<R> da = adj(y.d);
  const M7<R> db = mul(y.d, y.b);
  const M7<R> bd = mul(y.b, y.d);
  const M7<R> dd = mul(y.d, da);
  const M7<R> d2 = mul(da, y.d);
  Full7<R> k;
  for (int i = 0; i < 7; ++i)
    for (int j = 0; j < 7; ++j) {
      k.d.a[i][j] = c * (db.a[i][j] - bd.a[i][j]);
      k.b.a[i][j] = R(2) * (dd.a[i][j] - d2.a[i][j]);
    }
  return k;
}

template <typename R>
Full7<R> full_axpy(const Full7<R>& y, R a, const Full7<R>& k) {
  Full7<R> z;
  for (int i = 0; i < 7; ++i)
    for (int j = 0; j < 7; ++j) {
      z.d.a[i][j] = y.d.a[i][j] + a * k.d.a[i][j];
      z.b.a[i][j] = y.b.a[i][j] + a * k.b.a[i][j];
    }
  return z;
}

template <typename R>
void full_rk4(Full7<R>& y, R h, R beta) {
  const Full7<R> k1 = full_rhs(y, beta);
  const Full7<R> k2 = full_rhs(full_axpy(y, h / R(2), k1), beta);
  const Full7<R> k3 = full_rhs(full_axpy(y, h / R(2), k2), beta);
  const Full7<R> k4 = full_rhs(full_axpy(y, h, k3), beta);
  const R w = h / R(6);
  for (int i = 0; i < 7; ++i)
    for (int j = 0; j < 7; ++j) {
      y.d.a[i][j] = y.d.a[i][j] + w * (k1.d.a[i][j] + R(2) * k2.d.a[i][j] + R(2) * k3.d.a[i][j] + k4.d.a[i][j]);
      y.b.a[i][j] = y.b.a[i][j] + w * (k1.b.a[i][j] + R(2) * k2.b.a[i][j] + R(2) * k3.b.a[i][j] + k4.b.a[i][j]);
    }
}

template <typename R>
Full7<R> embed_t(const K3V<R>& s) {
  Full7<R> f;
  for (int e = 0; e < 3; ++e)
    for (int v = 0; v < 3; ++v)
      if (kEdgeRows[e][v] != 0) f.d.a[3 + e][v] = R(kEdgeRows[e][v]) * s.d1;
  for (int e = 0; e < 3; ++e)
    if (kTriRow[3 + e] != 0) f.d.a[6][3 + e] = R(kTriRow[3 + e]) * s.d2;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) f.b.a[i][j] = QC<R>(i == j ? s.b1 : s.b2, R(0));
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      f.b.a[3 + i][3 + j] = QC<R>(i == j ? s.b4 : R(kEdgeK[i][j]) * s.b5, R(0));
  f.b.a[6][6] = QC<R>(s.b6, R(0));
  return f;
}

template <typename R>
K3V<R> project_t(const Full7<R>& f) {
  K3V<R> s;
  R diag = R(0), off = R(0);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      if (i == j)
        diag = diag + f.b.a[i][j].re;
      else
        off = off + f.b.a[i][j].re;
    }
  s.b1 = diag / R(3);
  s.b2 = off / R(6);
  R ediag = R(0), ek = R(0);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      if (i == j)
        ediag = ediag + f.b.a[3 + i][3 + j].re;
      else
        ek = ek + R(kEdgeK[i][j]) * f.b.a[3 + i][3 + j].re;
    }
  s.b4 = ediag / R(3);
  s.b5 = ek / R(6);
  s.b6 = f.b.a[6][6].re;
  QC<R> d1acc(R(0), R(0)), d2acc(R(0), R(0));
  for (int e = 0; e < 3; ++e)
    for (int v = 0; v < 3; ++v)
      if (kEdgeRows[e][v] != 0) d1acc = d1acc + R(kEdgeRows[e][v]) * f.d.a[3 + e][v];
  for (int e = 0; e < 3; ++e)
    if (kTriRow[3 + e] != 0) d2acc = d2acc + R(kTriRow[3 + e]) * f.d.a[6][3 + e];
  s.d1 = R(1) / R(6) * d1acc;
  s.d2 = R(1) / R(3) * d2acc;
  return s;
}

// Entrywise gap between the embedded reduced state and the full state. The
// projection would average away exactly the ansatz-breaking directions, so
// the comparison must happen on the full matrices.
template <typename R>
R k3_gap(const K3V<R>& red, const Full7<R>& full) {
  const Full7<R> emb = embed_t(red);
  R g = R(0);
  for (int i = 0; i < 7; ++i)
    for (int j = 0; j < 7; ++j) {
      g = std::max(g, gabs(emb.d.a[i][j].re - full.d.a[i][j].re));
      g = std::max(g, gabs(emb.d.a[i][j].im - full.d.a[i][j].im));
      g = std::max(g, gabs(emb.b.a[i][j].re - full.b.a[i][j].re));
      g = std::max(g, gabs(emb.b.a[i][j].im - full.b.a[i][j].im));
    }
  return g;
}

template <typename R>
K3Comparison k3_compare_t(double gamma0, double gamma1, double beta,
                          double t_end, double h) {
  if (h <= 0.0 || t_end <= 0.0) throw UsageError("comparison needs positive span and step");
  K3V<R> red{R(0), R(0), R(0), R(0), R(0),
             QC<R>(R(gamma0), R(0)), QC<R>(R(gamma1), R(0))};
  Full7<R> full = embed_t(red);
  const double mag = t_end;
  long n = std::lround(mag / h);
  double h_last = 0.0;
  if (n <= 0 || std::abs(static_cast<double>(n) * h - mag) > 1e-9 * std::max(1.0, mag)) {
    n = static_cast<long>(std::floor(mag / h));
    h_last = mag - static_cast<double>(n) * h;
  }
  const R rbeta = R(beta);
  K3Comparison cmp;
  R worst = R(0);
  const long total = n + (h_last != 0.0 ? 1 : 0);
  for (long i = 1; i <= total; ++i) {
    const R hi = R(i <= n ? h : h_last);
    k3_rk4(red, hi, rbeta);
    full_rk4(full, hi, rbeta);
    const R gap = k3_gap(red, full);
    if (gap > worst) worst = gap;
    if (i == total) cmp.final_gap = static_cast<double>(gap);
  }
  cmp.max_gap = static_cast<double>(worst);
  return cmp;
}

// Scalar two-point reduction, used to locate the d' extremum numerically.
struct K2Pair {
  double d, b;
};

K2Pair k2_rhs_pair(const K2Pair& y) { return {-4.0 * y.b * y.d, 2.0 * y.d * y.d}; }

K2Pair k2_integrate(double t, double h) {
  K2Pair y{1.0, 0.0};
  const long n = std::lround(t / h);
  const double hh = (n > 0) ? t / static_cast<double>(n) : 0.0;
  for (long i = 0; i < n; ++i) {
    const K2Pair k1 = k2_rhs_pair(y);
    const K2Pair k2 = k2_rhs_pair({y.d + hh / 2 * k1.d, y.b + hh / 2 * k1.b});
    const K2Pair k3 = k2_rhs_pair({y.d + hh / 2 * k2.d, y.b + hh / 2 * k2.b});
    const K2Pair k4 = k2_rhs_pair({y.d + hh * k3.d, y.b + hh * k3.b});
    y.d += hh / 6 * (k1.d + 2 * k2.d + 2 * k3.d + k4.d);
    y.b += hh / 6 * (k1.b + 2 * k2.b + 2 * k3.b + k4.b);
  }
  return y;
}

double k2_dprime_at(double t) {
  const K2Pair y = k2_integrate(t, 1e-4);
  return -4.0 * y.b * y.d;
}

}  // namespace

K2State k2_closed_form(double t) {
  const double s8 = std::sqrt(8.0);
  return {1.0 / std::cosh(s8 * t), std::tanh(s8 * t) / std::sqrt(2.0), t};
}

K2Inflection k2_inflection() {
  K2Inflection out;
  out.t_star = std::atanh(1.0 / std::sqrt(2.0)) / std::sqrt(8.0);
  out.slope_star = -1.0 / std::sqrt(2.0);
  // golden-section minimum of d'(t) on a bracket around the extremum
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double lo = 0.05, hi = 0.8;
  double x1 = hi - phi * (hi - lo), x2 = lo + phi * (hi - lo);
  double f1 = k2_dprime_at(x1), f2 = k2_dprime_at(x2);
  while (hi - lo > 1e-10) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - phi * (hi - lo);
      f1 = k2_dprime_at(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + phi * (hi - lo);
      f2 = k2_dprime_at(x2);
    }
  }
  out.t_star_numeric = (lo + hi) / 2.0;
  out.slope_numeric = k2_dprime_at(out.t_star_numeric);
  return out;
}

K3Reduced k3_initial_state(double gamma0, double gamma1) {
  K3Reduced s;
  s.d1 = cplx(gamma0, 0.0);
  s.d2 = cplx(gamma1, 0.0);
  return s;
}

K3Reduced k3_reduced_rhs(const K3Reduced& s, double beta) {
  const K3V<double> v{s.b1, s.b2, s.b4, s.b5, s.b6,
                      QC<double>(s.d1.real(), s.d1.imag()),
                      QC<double>(s.d2.real(), s.d2.imag())};
  const K3V<double> k = k3_rhs_t(v, beta);
  K3Reduced out;
  out.b1 = k.b1;
  out.b2 = k.b2;
  out.b4 = k.b4;
  out.b5 = k.b5;
  out.b6 = k.b6;
  out.d1 = cplx(k.d1.re, k.d1.im);
  out.d2 = cplx(k.d2.re, k.d2.im);
  return out;
}

void k3_embed(const K3Reduced& s, Matrix& d_out, Matrix& b_out) {
  const K3V<double> v{s.b1, s.b2, s.b4, s.b5, s.b6,
                      QC<double>(s.d1.real(), s.d1.imag()),
                      QC<double>(s.d2.real(), s.d2.imag())};
  const Full7<double> f = embed_t(v);
  d_out = Matrix::Zero(7, 7);
  b_out = Matrix::Zero(7, 7);
  for (int i = 0; i < 7; ++i)
    for (int j = 0; j < 7; ++j) {
      d_out(i, j) = cplx(f.d.a[i][j].re, f.d.a[i][j].im);
      b_out(i, j) = cplx(f.b.a[i][j].re, f.b.a[i][j].im);
    }
}

K3Reduced k3_project(const Matrix& d, const Matrix& b) {
  if (d.rows() != 7 || d.cols() != 7 || b.rows() != 7 || b.cols() != 7) {
    throw UsageError("projection expects 7x7 operators");
  }
  Full7<double> f;
  for (int i = 0; i < 7; ++i)
    for (int j = 0; j < 7; ++j) {
      f.d.a[i][j] = QC<double>(d(i, j).real(), d(i, j).imag());
      f.b.a[i][j] = QC<double>(b(i, j).real(), b(i, j).imag());
    }
  const K3V<double> v = project_t(f);
  K3Reduced out;
  out.b1 = v.b1;
  out.b2 = v.b2;
  out.b4 = v.b4;
  out.b5 = v.b5;
  out.b6 = v.b6;
  out.d1 = cplx(v.d1.re, v.d1.im);
  out.d2 = cplx(v.d2.re, v.d2.im);
  return out;
}

K3Comparison k3_compare_reduced_full(double gamma0, double gamma1, double beta,
                                     double t_end, double h, bool quad) {
#if defined(__SIZEOF_FLOAT128__)
  using WideReal = __float128;
#else
  using WideReal = long double;
#endif
  if (quad) return k3_compare_t<WideReal>(gamma0, gamma1, beta, t_end, h);
  return k3_compare_t<double>(gamma0, gamma1, beta, t_end, h);
}

CircleModelState circle_model_init(int N) {
  if (N < 1) throw UsageError("mode cutoff must be at least 1");
  const int dim = 2 * N + 1;
  CircleModelState s;
  s.A = Matrix::Zero(dim, dim);
  for (int k = 0; k < dim; ++k) s.A(k, k) = cplx(0.0, static_cast<double>(k - N));
  s.B = Matrix::Zero(dim, dim);
  s.C = Matrix::Zero(dim, dim);
  s.t = 0.0;
  s.N = N;
  return s;
}

CircleTrajectory circle_model_evolve(const CircleModelState& s, double t_end,
                                     double h, int snapshot_every) {
  if (snapshot_every < 1) throw UsageError("snapshot_every must be at least 1");
  if (h <= 0.0) throw UsageError("step size must be positive");
  const double span = t_end - s.t;
  if (span <= 0.0 || h > span * (1.0 + 1e-12)) {
    throw UsageError("step size exceeds the integration span");
  }
  long n = std::lround(span / h);
  double h_last = 0.0;
  if (n <= 0 || std::abs(static_cast<double>(n) * h - span) > 1e-9 * std::max(1.0, span)) {
    n = static_cast<long>(std::floor(span / h));
    h_last = span - static_cast<double>(n) * h;
  }
  const Matrix block_B0 = s.B * s.B + s.A * s.A.adjoint();
  const Matrix block_C0 = s.C * s.C + s.A.adjoint() * s.A;

  CircleTrajectory traj;
  traj.observer_names = {"norm_A", "invariant_BA_AC", "drift_B2_AAs", "drift_C2_AsA"};

  // B never feeds back into the system
  auto rhs3 = [](const Matrix& A, const Matrix& C) {
    struct K {
      Matrix A, B, C;
    } k{2.0 * (A * C), 2.0 * (A * A.adjoint()), -2.0 * (A.adjoint() * A)};
    return k;
  };

  Matrix A = s.A, B = s.B, C = s.C;
  auto record = [&](double t) {
    CircleModelState snap;
    snap.A = A;
    snap.B = B;
    snap.C = C;
    snap.t = t;
    snap.N = s.N;
    traj.snapshots.push_back(std::move(snap));
    const double norm_A = A.cwiseAbs().maxCoeff();
    const double inv = (B * A + A * C).cwiseAbs().maxCoeff();
    const double dB = (B * B + A * A.adjoint() - block_B0).cwiseAbs().maxCoeff();
    const double dC = (C * C + A.adjoint() * A - block_C0).cwiseAbs().maxCoeff();
    traj.observer_rows.push_back({norm_A, inv, dB, dC});
  };

  record(s.t);
  const long total = n + (h_last != 0.0 ? 1 : 0);
  for (long i = 1; i <= total; ++i) {
    const double hi = (i <= n) ? h : h_last;
    const auto k1 = rhs3(A, C);
    const auto k2 = rhs3(A + hi / 2 * k1.A, C + hi / 2 * k1.C);
    const auto k3 = rhs3(A + hi / 2 * k2.A, C + hi / 2 * k2.C);
    const auto k4 = rhs3(A + hi * k3.A, C + hi * k3.C);
    A += hi / 6 * (k1.A + 2.0 * k2.A + 2.0 * k3.A + k4.A);
    B += hi / 6 * (k1.B + 2.0 * k2.B + 2.0 * k3.B + k4.B);
    C += hi / 6 * (k1.C + 2.0 * k2.C + 2.0 * k3.C + k4.C);
    if (!A.allFinite() || !B.allFinite() || !C.allFinite()) {
      std::ostringstream os;
      os << "circle model state became non-finite near t = " << s.t + static_cast<double>(i) * h;
      throw NumericError(os.str());
    }
    if (i % snapshot_every == 0 || i == total) {
      record(i == total ? t_end : s.t + static_cast<double>(i) * h);
    }
  }
  return traj;
}

}  // namespace diracflow
