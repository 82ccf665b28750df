#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "diracflow/complex.hpp"
#include "diracflow/operators.hpp"

namespace diracflow {

// Split state of the deformation. d holds only degree-raising blocks, b only
// diagonal blocks; both stay exactly banded under stepping because every
// right-hand side term preserves the band.
struct FlowState {
  GradedOperator d;
  GradedOperator b;
  double t = 0.0;
  double beta = 0.0;
  std::vector<double> gamma;
  std::optional<GradedOperator> U;

  const Grading& grading() const { return d.grading; }
};

FlowState initial_state(const OrientedComplex& c, double beta = 0.0,
                        const std::vector<double>& gamma = {},
                        bool with_unitary = true);

GradedOperator reconstruct_D(const FlowState& s);  // d + d* + b
GradedOperator reconstruct_B(const FlowState& s);  // d - d* + i beta b
GradedOperator reconstruct_C(const FlowState& s);  // d + d*

struct FlowRhs {
  Matrix d_dot;
  Matrix b_dot;
};

// d' = (1 - i beta)(db - bd), b' = 2(dd* - d*d)
FlowRhs rhs(const FlowState& s);

// rhs left-multiplied by f(L), f given by ascending-power coefficients.
// L is conserved, so evaluating it from the current state is the constant one.
FlowRhs higher_flow_rhs(const FlowState& s, const std::vector<double>& poly);

// Max entry gap between the reassembled split rhs and f(L)(BD - DB).
double rhs_commutator_residual(const FlowState& s,
                               const std::vector<double>& poly = {1.0});

// One classical RK4 step; U advances on U' = f(L) B U when carried.
FlowState step_rk4(const FlowState& s, double h,
                   const std::vector<double>& poly = {1.0});

struct Observer {
  std::string name;
  std::function<double(const FlowState&)> fn;
};

// tr_M, tr_b2, spec_drift, str_U_re, str_U_im, norm_d (drift is measured
// against the spectrum of the state passed here).
std::vector<Observer> standard_observers(const FlowState& initial);

struct Trajectory {
  std::vector<FlowState> snapshots;
  std::vector<std::string> observer_names;
  std::vector<std::vector<double>> observer_rows;  // one row per snapshot
  double h = 0.0;       // signed step used
  long n_full_steps = 0;
  double h_last = 0.0;  // signed remainder step, 0 when the span divides evenly
  int snapshot_every = 1;
  std::vector<double> flow_poly{1.0};

  std::vector<double> times() const;
  const FlowState& front() const { return snapshots.front(); }
  const FlowState& back() const { return snapshots.back(); }
};

struct EvolveOptions {
  int snapshot_every = 1;
  std::vector<double> flow_poly{1.0};
  double renorm_threshold = 1e-10;  // on ||U*U - I||, checked every renorm_check_every steps
  int renorm_check_every = 100;
  bool commutator_guard = true;     // cross-check split rhs against the dense commutator per step
};

Trajectory evolve(const FlowState& s, double t_end, double h,
                  const std::vector<Observer>& observers = {},
                  const EvolveOptions& opts = {});

// ||(d + d* + b) - U D0 U*|| max-entry
double unitary_conjugation_residual(const FlowState& s, const GradedOperator& D0);

enum class TransportMode {
  cocycle,   // v' = -(1 - i beta) b v; keeps ker d and im d
  harmonic,  // v' = f(L) B v; keeps ker L
};

// Value of the transported vector at every snapshot of traj. The (d, b) pair
// is re-integrated jointly from the first snapshot with the recorded step
// plan, so the sampling grid matches the trajectory exactly.
std::vector<Vector> transport_cocycle(const Vector& f, const Trajectory& traj,
                                      TransportMode mode = TransportMode::cocycle);

// Same, several vectors in one pass; result[i] is the series for fs[i].
std::vector<std::vector<Vector>> transport_cocycle(
    const std::vector<Vector>& fs, const Trajectory& traj,
    TransportMode mode = TransportMode::cocycle);

// Earliest snapshot time from which max|d| stays below thresh for a full time
// unit; empty when the trajectory never sustains that.
std::optional<double> convergence_time(const Trajectory& traj,
                                       double thresh = 1e-7);

}  // namespace diracflow
