#pragma once

// Thin wrappers over LAPACK for the dense eigen- and singular-value problems.
// Matrices are Eigen column-major; inputs are taken by value because LAPACK
// overwrites them.

#include <complex>
#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "npspec/errors.hpp"

namespace npspec::linalg {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor>;
using Vector = Eigen::VectorXd;

inline void check_info(lapack_int info, const char* routine) {
  if (info != 0) {
    throw NumericalError(std::string(routine) + " failed with info = " + std::to_string(info),
                         "linalg");
  }
}

/// Eigenvalues of a symmetric matrix (lower triangle referenced), ascending.
inline Vector symmetric_eigenvalues(Matrix a) {
  const lapack_int n = static_cast<lapack_int>(a.rows());
  Vector w(n);
  if (n == 0) return w;
  check_info(LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'N', 'L', n, a.data(), n, w.data()), "dsyevd");
  return w;
}

struct SymmetricEigensystem {
  Vector values;   // ascending
  Matrix vectors;  // columns
};

inline SymmetricEigensystem symmetric_eigensystem(Matrix a) {
  const lapack_int n = static_cast<lapack_int>(a.rows());
  SymmetricEigensystem out;
  out.values.resize(n);
  if (n > 0) {
    check_info(LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'L', n, a.data(), n, out.values.data()),
               "dsyevd");
  }
  out.vectors = std::move(a);
  return out;
}

/// Eigenvalues of a general real matrix.
inline std::vector<std::complex<double>> general_eigenvalues(Matrix a) {
  const lapack_int n = static_cast<lapack_int>(a.rows());
  std::vector<double> wr(n), wi(n);
  if (n > 0) {
    check_info(LAPACKE_dgeev(LAPACK_COL_MAJOR, 'N', 'N', n, a.data(), n, wr.data(), wi.data(),
                             nullptr, 1, nullptr, 1),
               "dgeev");
  }
  std::vector<std::complex<double>> out(n);
  for (lapack_int i = 0; i < n; ++i) out[i] = {wr[i], wi[i]};
  return out;
}

/// Singular values, descending.
inline Vector singular_values(Matrix a) {
  const lapack_int m = static_cast<lapack_int>(a.rows());
  const lapack_int n = static_cast<lapack_int>(a.cols());
  Vector s(std::min(m, n));
  if (s.size() == 0) return s;
  check_info(LAPACKE_dgesdd(LAPACK_COL_MAJOR, 'N', m, n, a.data(), m, s.data(), nullptr, 1,
                            nullptr, 1),
             "dgesdd");
  return s;
}

/// Largest singular value of the operator x -> apply(x) with adjoint
/// apply_t, by power iteration on A^T A from a fixed start vector.
template <class Apply, class ApplyT>
double spectral_norm(Eigen::Index n, Apply&& apply, ApplyT&& apply_t, int max_iter = 300,
                     double rel_tol = 1e-10) {
  if (n == 0) return 0.0;
  Vector x(n);
  // Deterministic, non-symmetric start so no symmetry class is missed.
  for (Eigen::Index i = 0; i < n; ++i) x[i] = 1.0 + 0.5 * std::sin(1.0 + 0.7 * static_cast<double>(i));
  x.normalize();
  double sigma = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    const Vector y = apply(x);
    const Vector z = apply_t(y);
    const double znorm = z.norm();
    if (znorm == 0.0) return 0.0;
    const double next = std::sqrt(znorm);
    x = z / znorm;
    if (std::abs(next - sigma) <= rel_tol * next) {
      sigma = next;
      break;
    }
    sigma = next;
  }
  return sigma;
}

inline double spectral_norm(const Matrix& a, int max_iter = 300, double rel_tol = 1e-10) {
  return spectral_norm(
      a.cols(), [&](const Vector& x) -> Vector { return a * x; },
      [&](const Vector& y) -> Vector { return a.transpose() * y; }, max_iter, rel_tol);
}

}  // namespace npspec::linalg
