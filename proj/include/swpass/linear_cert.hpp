#pragma once

#include "swpass/linalg.hpp"
#include "swpass/sde_core.hpp"

#include <vector>

namespace swpass {

/// dx = (Ax + Bu) dt + sigma dw, y = Cx.
struct LinearSystem {
  Mat A;      ///< n x n
  Mat B;      ///< n x m
  Mat C;      ///< m x n
  Mat sigma;  ///< n x r

  /// Throws DimensionMismatch on inconsistent shapes.
  void validate() const;
  [[nodiscard]] bool noise_vanishes() const { return sigma.isZero(0.0); }
};

/// Wraps a linear system as an ItoSystem over the given domain box.
[[nodiscard]] ItoSystem to_ito_system(const LinearSystem& sys, Box domain);

struct LinearCertificate {
  bool pass = false;
  double coupling_residual = 0.0;  ///< max |C - B^T D|
  double lyap_max_eig = 0.0;       ///< largest eigenvalue of DA + A^T D
};

/// Checks C = B^T D (to 1e-9) and DA + A^T D negative definite.
///
/// D is symmetrized when its asymmetry is at most 1e-10; larger asymmetry
/// throws NotSymmetric, and a non-positive eigenvalue throws NotPositiveDefinite.
[[nodiscard]] LinearCertificate verify_linear_weak_passivity(const LinearSystem& sys, const Mat& D);

/// Solves A^T D + D A = -Q through the n^2 x n^2 Kronecker system.
/// Throws SingularSystem when A has eigenvalues summing to (numerically) zero.
[[nodiscard]] Mat lyapunov_solve(const Mat& A, const Mat& Q);

/// sqrt(tr{D sigma sigma^T} / -lambda_max). Throws DomainError if lambda_max >= 0.
[[nodiscard]] double linear_passive_radius(const Mat& D, const Mat& sigma, double lyap_max_eig);

/// All eigenvalues of a symmetric matrix in ascending order, by cyclic Jacobi
/// rotations until the off-diagonal Frobenius norm is at most 1e-12 (relative
/// to the matrix norm). Throws NotSymmetric if asymmetry exceeds 1e-10.
[[nodiscard]] std::vector<double> symmetric_eigenvalues(const Mat& M);

/// Smallest eigenvalue of a symmetric matrix (same solver).
[[nodiscard]] double min_eigenvalue(const Mat& M);
[[nodiscard]] double max_eigenvalue(const Mat& M);

}  // namespace swpass
