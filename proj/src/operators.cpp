#include "diracflow/operators.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <map>
#include <sstream>

#include "diracflow/errors.hpp"

namespace diracflow {

Grading Grading::from_f_vector(const std::vector<int>& f) {
  Grading g;
  g.offsets.resize(f.size() + 1);
  g.offsets[0] = 0;
  for (std::size_t p = 0; p < f.size(); ++p) {
    g.offsets[p + 1] = g.offsets[p] + f[p];
    for (int i = 0; i < f[p]; ++i) g.degree_of_index.push_back(static_cast<int>(p));
  }
  return g;
}

namespace {

// Sign of the permutation mapping `from` onto `to` (same distinct elements).
int perm_sign(const std::vector<int>& from, const std::vector<int>& to) {
  const int n = static_cast<int>(from.size());
  std::vector<int> p(n);
  for (int i = 0; i < n; ++i) {
    auto it = std::find(to.begin(), to.end(), from[i]);
    p[i] = static_cast<int>(it - to.begin());
  }
  int sign = 1;
  std::vector<bool> seen(n, false);
  for (int i = 0; i < n; ++i) {
    if (seen[i]) continue;
    int len = 0;
    for (int j = i; !seen[j]; j = p[j]) {
      seen[j] = true;
      ++len;
    }
    if (len % 2 == 0) sign = -sign;
  }
  return sign;
}

std::map<std::vector<int>, int> face_index(const OrientedComplex& c) {
  std::map<std::vector<int>, int> idx;
  for (std::size_t k = 0; k < c.simplices.size(); ++k) {
    for (std::size_t i = 0; i < c.simplices[k].size(); ++i) {
      std::vector<int> key = c.simplices[k][i];
      std::sort(key.begin(), key.end());
      idx[key] = c.flat_index(static_cast<int>(k), static_cast<int>(i));
    }
  }
  return idx;
}

}  // namespace

GradedOperator exterior_derivative(const OrientedComplex& c) {
  Grading g = Grading::from_f_vector(c.f_vector);
  GradedOperator d{Matrix::Zero(g.dim(), g.dim()), g};
  auto idx = face_index(c);
  for (std::size_t k = 1; k < c.simplices.size(); ++k) {
    for (std::size_t i = 0; i < c.simplices[k].size(); ++i) {
      const auto& verts = c.simplices[k][i];
      const int row = c.flat_index(static_cast<int>(k), static_cast<int>(i));
      for (std::size_t j = 0; j < verts.size(); ++j) {
        std::vector<int> face = verts;
        face.erase(face.begin() + static_cast<long>(j));
        std::vector<int> key = face;
        std::sort(key.begin(), key.end());
        auto it = idx.find(key);
        if (it == idx.end()) throw NumericError("missing face in complex");
        const auto& stored = c.simplices[k - 1][it->second - g.block_start(static_cast<int>(k - 1))];
        int sign = (j % 2 == 0 ? 1 : -1) * perm_sign(face, stored);
        d.m(row, it->second) += static_cast<double>(sign);
      }
    }
  }
  return d;
}

GradedOperator dirac(const OrientedComplex& c, const std::vector<double>& gamma) {
  GradedOperator d = exterior_derivative(c);
  const int P = d.grading.degrees() - 1;  // number of raising blocks
  std::vector<double> g = gamma;
  if (g.empty()) g.assign(static_cast<std::size_t>(std::max(P, 0)), 1.0);
  if (static_cast<int>(g.size()) != P) {
    std::ostringstream os;
    os << "expected " << P << " coupling(s) for this complex, got " << g.size();
    throw UsageError(os.str());
  }
  for (double gp : g) {
    if (gp == 0.0) throw UsageError("zero coupling would disconnect a degree block");
  }
  GradedOperator D{Matrix::Zero(d.dim(), d.dim()), d.grading};
  for (int p = 0; p < P; ++p) {
    D.block(p + 1, p) = g[static_cast<std::size_t>(p)] * d.block(p + 1, p);
    D.block(p, p + 1) = g[static_cast<std::size_t>(p)] * d.block(p + 1, p).transpose();
  }
  if (self_adjoint_residual(D.m) > 1e-12) throw NumericError("constructed operator not self-adjoint");
  return D;
}

GradedOperator laplacian(const GradedOperator& D) {
  if (self_adjoint_residual(D.m) > 1e-9) throw NumericError("operator not self-adjoint");
  return {D.m * D.m, D.grading};
}

GradedOperator parity_operator(const Grading& g) {
  GradedOperator P{Matrix::Zero(g.dim(), g.dim()), g};
  for (int i = 0; i < g.dim(); ++i) P.m(i, i) = (g.degree_of_index[static_cast<std::size_t>(i)] % 2 == 0) ? 1.0 : -1.0;
  return P;
}

SplitParts split(const GradedOperator& X, double tol) {
  const Grading& g = X.grading;
  SplitParts parts{{Matrix::Zero(g.dim(), g.dim()), g},
                   {Matrix::Zero(g.dim(), g.dim()), g},
                   {Matrix::Zero(g.dim(), g.dim()), g}};
  for (int r = 0; r < g.dim(); ++r) {
    for (int c = 0; c < g.dim(); ++c) {
      const cplx v = X.m(r, c);
      const int jump = g.degree_of_index[static_cast<std::size_t>(r)] - g.degree_of_index[static_cast<std::size_t>(c)];
      if (jump == 1) {
        parts.raising.m(r, c) = v;
      } else if (jump == 0) {
        parts.diagonal.m(r, c) = v;
      } else if (jump == -1) {
        parts.lowering.m(r, c) = v;
      } else if (std::abs(v) > tol) {
        std::ostringstream os;
        os << "entry (" << r << ", " << c << ") jumps " << jump << " degrees with magnitude " << std::abs(v);
        throw NumericError(os.str());
      }
    }
  }
  return parts;
}

cplx supertrace(const GradedOperator& X) {
  cplx s = 0.0;
  for (int i = 0; i < X.dim(); ++i) {
    const int p = X.grading.degree_of_index[static_cast<std::size_t>(i)];
    s += (p % 2 == 0 ? 1.0 : -1.0) * X.m(i, i);
  }
  return s;
}

int betti(const GradedOperator& L, int p, double tol) {
  if (p < 0 || p >= L.grading.degrees()) throw UsageError("degree out of range");
  Eigen::MatrixXcd block = L.block(p, p);
  Eigen::SelfAdjointEigenSolver<Matrix> es(block, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericError("eigensolver failed");
  int count = 0;
  for (int i = 0; i < es.eigenvalues().size(); ++i) {
    const double a = std::abs(es.eigenvalues()[i]);
    if (a < tol) {
      ++count;
    } else if (a < tol * 1e3) {
      std::ostringstream os;
      os << "eigenvalue " << es.eigenvalues()[i] << " in degree " << p
         << " falls in the ambiguity band [" << tol << ", " << tol * 1e3 << ")";
      throw NumericError(os.str());
    }
  }
  return count;
}

double self_adjoint_residual(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

nlohmann::json dump_matrix(const GradedOperator& X) {
  nlohmann::json j;
  const int n = X.dim();
  j["n"] = n;
  j["grading"] = X.grading.degree_of_index;
  std::vector<double> re, im;
  re.reserve(static_cast<std::size_t>(n) * static_cast<std::size_t>(n));
  im.reserve(re.capacity());
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      re.push_back(X.m(r, c).real());
      im.push_back(X.m(r, c).imag());
    }
  }
  j["re"] = re;
  j["im"] = im;
  return j;
}

GradedOperator load_matrix(const nlohmann::json& j) {
  if (!j.contains("n") || !j.contains("grading") || !j.contains("re") || !j.contains("im")) {
    throw UsageError("matrix file needs n, grading, re, im members");
  }
  const int n = j["n"].get<int>();
  std::vector<int> deg = j["grading"].get<std::vector<int>>();
  if (static_cast<int>(deg.size()) != n) throw UsageError("grading length disagrees with n");
  std::vector<double> re = j["re"].get<std::vector<double>>();
  std::vector<double> im = j["im"].get<std::vector<double>>();
  if (static_cast<int>(re.size()) != n * n || static_cast<int>(im.size()) != n * n) {
    throw UsageError("matrix entry arrays must hold n*n values");
  }
  std::vector<int> counts;
  for (int i = 0; i < n; ++i) {
    const int d = deg[static_cast<std::size_t>(i)];
    if (d < 0) throw UsageError("grading entries must be non-negative");
    if (i > 0 && d < deg[static_cast<std::size_t>(i - 1)]) {
      throw UsageError("grading must be non-decreasing");
    }
    if (d >= static_cast<int>(counts.size())) counts.resize(static_cast<std::size_t>(d) + 1, 0);
    ++counts[static_cast<std::size_t>(d)];
  }
  Grading g = Grading::from_f_vector(counts);
  GradedOperator X{Matrix::Zero(n, n), g};
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      const std::size_t k = static_cast<std::size_t>(r) * static_cast<std::size_t>(n) + static_cast<std::size_t>(c);
      X.m(r, c) = cplx(re[k], im[k]);
    }
  }
  return X;
}

std::vector<double> sorted_spectrum(const Matrix& m) {
  if (self_adjoint_residual(m) > 1e-9) throw NumericError("spectrum requested for non-self-adjoint matrix");
  Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericError("eigensolver failed");
  std::vector<double> out(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace diracflow
