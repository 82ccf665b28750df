#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "diracflow/complex.hpp"
#include "json.hpp"

namespace diracflow {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

// Form-degree block structure of the flat index space.
struct Grading {
  std::vector<int> degree_of_index;  // size dim()
  std::vector<int> offsets;          // size degrees()+1; block p = [offsets[p], offsets[p+1])

  int dim() const { return static_cast<int>(degree_of_index.size()); }
  int degrees() const { return static_cast<int>(offsets.size()) - 1; }
  int block_start(int p) const { return offsets[p]; }
  int block_size(int p) const { return offsets[p + 1] - offsets[p]; }

  static Grading from_f_vector(const std::vector<int>& f);
  bool operator==(const Grading&) const = default;
};

// Square complex matrix carrying a form-degree grading.
struct GradedOperator {
  Matrix m;
  Grading grading;

  int dim() const { return grading.dim(); }
  auto block(int p, int q) {
    return m.block(grading.block_start(p), grading.block_start(q),
                   grading.block_size(p), grading.block_size(q));
  }
  auto block(int p, int q) const {
    return m.block(grading.block_start(p), grading.block_start(q),
                   grading.block_size(p), grading.block_size(q));
  }
};

// Signed incidence operator d with d_{ji} = +-1 for codimension-1 faces,
// alternating-face-sum signs in the simplex's stored vertex order.
// Strictly block-raising; d*d = 0 exactly (integer entries).
GradedOperator exterior_derivative(const OrientedComplex& c);

// D = sum_p gamma_p (d_p + d_p^T), real symmetric. gamma empty = all ones;
// a zero coupling for a present degree is a validation error.
GradedOperator dirac(const OrientedComplex& c, const std::vector<double>& gamma = {});

// L = D^2, block-diagonal with respect to the grading.
GradedOperator laplacian(const GradedOperator& D);

// P with (Pf)_sigma = (-1)^{deg sigma} f_sigma; {P, D} = 0, P^2 = 1.
GradedOperator parity_operator(const Grading& g);

struct SplitParts {
  GradedOperator raising;   // blocks p -> p+1
  GradedOperator diagonal;  // blocks p -> p
  GradedOperator lowering;  // blocks p -> p-1
};

// Splits X into raising/diagonal/lowering band parts. Any entry with
// |degree jump| >= 2 above tol is a structure violation (NumericError).
SplitParts split(const GradedOperator& X, double tol = 1e-9);

// sum_p (-1)^p tr(block_p)
cplx supertrace(const GradedOperator& X);

// Kernel dimension of the degree-p block of L: eigenvalues with |l| < tol.
// Requires a 10^3 spectral gap between kept and discarded eigenvalues.
int betti(const GradedOperator& L, int p, double tol = 1e-8);

// max |X - X^dagger| entry
double self_adjoint_residual(const Matrix& m);

// {"n": v, "grading": [...], "re": [row-major], "im": [row-major]}
nlohmann::json dump_matrix(const GradedOperator& X);
GradedOperator load_matrix(const nlohmann::json& j);

// Sorted real eigenvalues of a self-adjoint graded operator.
std::vector<double> sorted_spectrum(const Matrix& m);

}  // namespace diracflow
