#pragma once

#include <string>
#include <vector>

#include "diracflow/operators.hpp"

namespace diracflow {

// ---- two-point graph ----

// Closed-form reduced variables. d^2 + 2b^2 = 1 holds identically.
struct K2State {
  double d;
  double b;
  double t;
};

// d = sech(sqrt8 t), b = tanh(sqrt8 t)/sqrt2
K2State k2_closed_form(double t);

// Extremum of the decaying d-component. slope_star is the extremum of
// d(d)/dtau on the half-speed parameterization tau = 2t; slope_numeric is the
// raw d'(t) extremum from an integrated trajectory, exactly twice slope_star
// by the chain rule. Locations agree.
struct K2Inflection {
  double t_star;
  double slope_star;
  double t_star_numeric;
  double slope_numeric;
};

K2Inflection k2_inflection();

// ---- triangle graph, symmetric ansatz ----

// Reduced variables of the 7x7 flow under the symmetry ansatz
//   b|vertices = b1 I + b2 (J - I),  b|edges = b4 I + b5 K,  b|triangle = b6,
//   d|edges<-vertices = d1 E,        d|triangle<-edges = d2 T.
// The off-diagonal vertex entries stay equal, so one b2 covers them.
struct K3Reduced {
  double b1 = 0.0, b2 = 0.0, b4 = 0.0, b5 = 0.0, b6 = 0.0;
  cplx d1{0.0, 0.0}, d2{0.0, 0.0};
};

// b = 0, d1 = gamma0, d2 = gamma1
K3Reduced k3_initial_state(double gamma0, double gamma1);

// Scalar reduction of the split flow:
//   b1' = -4|d1|^2           b2' = 2|d1|^2
//   b4' = 4|d1|^2 - 2|d2|^2  b5' = 2|d1|^2 + 2|d2|^2   b6' = 6|d2|^2
//   d1' = (1-i beta)(b1 - b2 - b4 - b5) d1
//   d2' = (1-i beta)(b4 - 2 b5 - b6) d2
K3Reduced k3_reduced_rhs(const K3Reduced& s, double beta);

// Full 7x7 (d, b) pair for the ansatz, ordered v1 v2 v3 e12 e13 e23 t123 with
// ascending-vertex orientations.
void k3_embed(const K3Reduced& s, Matrix& d_out, Matrix& b_out);

// Averaging projection onto the ansatz coordinates (exact inverse of
// k3_embed on its image).
K3Reduced k3_project(const Matrix& d, const Matrix& b);

struct K3Comparison {
  double max_gap = 0.0;   // max over sampled steps and components
  double final_gap = 0.0; // at t_end
};

// Integrates the reduced scalars and the full 7x7 split flow side by side
// with the same RK4 step and reports the worst projected disagreement.
// The scaled coupling opens a strong transverse instability of the ansatz
// manifold, which amplifies double roundoff beyond any useful tolerance by
// t = 3; quad = true runs both integrations in __float128 so the comparison
// measures the systems, not the noise floor.
K3Comparison k3_compare_reduced_full(double gamma0, double gamma1, double beta,
                                     double t_end, double h, bool quad);

// ---- truncated Fourier circle model ----

struct CircleModelState {
  Matrix A;
  Matrix B;
  Matrix C;
  double t = 0.0;
  int N = 0;
};

// A = diag(i n) for n = -N..N, B = C = 0
CircleModelState circle_model_init(int N);

struct CircleTrajectory {
  std::vector<CircleModelState> snapshots;
  std::vector<std::string> observer_names;
  std::vector<std::vector<double>> observer_rows;
};

// RK4 on A' = 2AC, B' = 2AA*, C' = -2A*A with observers norm_A,
// invariant_BA_AC (stays zero), and max drift of the blocks B^2 + AA* and
// C^2 + A*A from their initial values.
CircleTrajectory circle_model_evolve(const CircleModelState& s, double t_end,
                                     double h, int snapshot_every = 10);

}  // namespace diracflow
