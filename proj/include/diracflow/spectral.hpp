#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "diracflow/complex.hpp"
#include "diracflow/diagnostics.hpp"
#include "diracflow/flow.hpp"
#include "diracflow/operators.hpp"

namespace diracflow {

// Positive half of a symmetric operator spectrum, multiplicities included.
struct ZetaSpec {
  std::vector<double> positive_eigenvalues;  // sorted ascending, all > 0
};

// Positive eigenvalues of a self-adjoint operator, kernel removed.
ZetaSpec zeta_spectrum(const GradedOperator& op, double kernel_tol = 1e-12);

// (1 + e^{-i pi s}) sum lambda^{-s} over the positive eigenvalues.
// Empty spectrum is an error; powers are principal (lambda > 0).
cplx dirac_zeta(const ZetaSpec& z, cplx s);

// The printed cycle-graph formula sums sin(pi k/n) to the power +s; the
// spectral reading uses the power -s. Both are available.
enum class ZetaExponent { as_printed, spectral };

// (1 + e^{-i pi s}) sum_{k=1}^{n-1} sin^{+/-s}(pi k / n), n >= 3.
cplx circle_graph_zeta(int n, cplx s, ZetaExponent exponent = ZetaExponent::as_printed);

struct ZetaGridPoint {
  double re_s = 0.0;
  double im_s = 0.0;
  cplx value;
};

// Rectangular grid evaluation of circle_graph_zeta, row-major over
// im_s (outer) then re_s (inner). threads > 1 splits the rows.
std::vector<ZetaGridPoint> zeta_grid(int n, double re_lo, double re_hi,
                                     double im_lo, double im_hi, double step,
                                     ZetaExponent exponent, int threads = 1);

// CSV with header re_s,im_s,re_zeta,im_zeta,abs_zeta.
std::string zeta_grid_csv(const std::vector<ZetaGridPoint>& pts);

struct WaveSolution {
  Vector u;  // position at t
  Vector v;  // velocity at t
};

// d'Alembert solution of u'' = -L u via the eigendecomposition of L:
// each positive mode evolves as cos(sqrt(l) t) u0 + sin(sqrt(l) t)/sqrt(l) v0,
// kernel modes keep u0 constant. v0 must be orthogonal to the kernel within
// 1e-9 unless project_kernel_velocity is set, which removes that component.
WaveSolution wave_solve(const GradedOperator& L, const Vector& u0,
                        const Vector& v0, double t,
                        bool project_kernel_velocity = false);

// ||v||^2 + <u, L u>, conserved along wave_solve in t.
double wave_energy(const GradedOperator& L, const Vector& u, const Vector& v);

// Connes pseudo-distance between vertices x and y of c under the operator
// norm constraint ||[C, f_hat]|| <= 1, where f_hat extends a real vertex
// function to every simplex by the arithmetic mean of its vertex values
// (a documented convention). Computed as sup (f(x)-f(y))/||[C, f_hat]||:
// exact-grid brute force plus polish for <= 4 vertices, seeded multi-start
// local search otherwise. Returns +infinity when some direction separates
// x from y with a vanishing commutator. x == y gives 0; unknown vertices
// are usage errors.
double connes_distance(const GradedOperator& C, const OrientedComplex& c,
                       int x, int y, int n_starts = 20, std::uint64_t seed = 0);

struct InflationReport {
  std::vector<double> times;
  std::vector<double> tr_M;
  std::vector<double> neg_dtrM;        // finite-difference -d/dt tr M
  std::vector<double> neg_dtrM_exact;  // same quantity from the rhs, exact per snapshot
  double bump_t = 0.0;                 // argmax of the exact derivative series
  double bump_value = 0.0;
  double initial_derivative = 0.0;     // exact values at the ends
  double final_derivative = 0.0;
  double min_derivative = 0.0;         // most negative exact value seen
  LogLinearFit tail;                   // fit of the exact series past the bump
  bool partial = false;                // run too short for a tail fit
  DiagnosticsReport checks;            // positivity and endpoint assertions
};

// Decay report for tr M along a trajectory with t >= 0: series, the
// inflation bump (maximum of -d/dt tr M), endpoint derivative checks and
// a log-linear tail fit. Runs shorter than 2 time units past the bump get
// partial = true and no tail fit.
InflationReport inflation_report(const Trajectory& traj);

}  // namespace diracflow
