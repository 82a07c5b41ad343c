#include "swpass/linear_cert.hpp"

#include "swpass/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace swpass {

namespace {

constexpr double kSymmetryTol = 1e-10;
constexpr double kCouplingTol = 1e-9;
constexpr double kJacobiTol = 1e-12;
constexpr int kJacobiMaxSweeps = 100;

double asymmetry(const Mat& M) { return (M - M.transpose()).cwiseAbs().maxCoeff(); }

double off_diagonal_norm(const Mat& M) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    for (Eigen::Index j = 0; j < M.cols(); ++j) {
      if (i != j) s += M(i, j) * M(i, j);
    }
  }
  return std::sqrt(s);
}

}  // namespace

std::vector<double> symmetric_eigenvalues(const Mat& M) {
  if (M.rows() != M.cols() || M.rows() == 0) {
    throw DimensionMismatch("symmetric_eigenvalues: matrix must be square and nonempty");
  }
  if (!M.allFinite()) throw NonFinite("symmetric_eigenvalues: non-finite matrix entry");
  if (asymmetry(M) > kSymmetryTol) {
    throw NotSymmetric("symmetric_eigenvalues: matrix is not symmetric");
  }
  Mat a = 0.5 * (M + M.transpose());
  const Eigen::Index n = a.rows();
  const double scale = std::max(1.0, a.norm());

  for (int sweep = 0; sweep < kJacobiMaxSweeps && off_diagonal_norm(a) > kJacobiTol * scale; ++sweep) {
    for (Eigen::Index p = 0; p < n - 1; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        // Rotation angle that annihilates a(p, q).
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
      }
    }
  }

  std::vector<double> eig(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) eig[static_cast<std::size_t>(i)] = a(i, i);
  std::sort(eig.begin(), eig.end());
  return eig;
}

double min_eigenvalue(const Mat& M) { return symmetric_eigenvalues(M).front(); }
double max_eigenvalue(const Mat& M) { return symmetric_eigenvalues(M).back(); }

void LinearSystem::validate() const {
  const Eigen::Index n = A.rows();
  if (n == 0 || A.cols() != n) throw DimensionMismatch("linear system: A must be square and nonempty");
  if (B.rows() != n || B.cols() == 0) throw DimensionMismatch("linear system: B must be n x m");
  if (C.rows() != B.cols() || C.cols() != n) throw DimensionMismatch("linear system: C must be m x n");
  if (sigma.rows() != n || sigma.cols() == 0) throw DimensionMismatch("linear system: sigma must be n x r");
  if (!A.allFinite() || !B.allFinite() || !C.allFinite() || !sigma.allFinite()) {
    throw NonFinite("linear system: non-finite matrix entry");
  }
}

ItoSystem to_ito_system(const LinearSystem& sys, Box domain) {
  sys.validate();
  const Dimensions dims{static_cast<std::size_t>(sys.A.rows()), static_cast<std::size_t>(sys.B.cols()),
                        static_cast<std::size_t>(sys.sigma.cols())};
  return ItoSystem(
      "linear", dims,
      [A = sys.A, B = sys.B](const Vec& x, const Vec& u, Vec& f) { f.noalias() = A * x + B * u; },
      [S = sys.sigma](const Vec&, const Vec&, Mat& h) { h = S; },
      [C = sys.C](const Vec& x, const Vec&, Vec& y) { y.noalias() = C * x; }, false, std::move(domain));
}

LinearCertificate verify_linear_weak_passivity(const LinearSystem& sys, const Mat& D) {
  sys.validate();
  const Eigen::Index n = sys.A.rows();
  if (D.rows() != n || D.cols() != n) throw DimensionMismatch("verify: D must be n x n");
  if (asymmetry(D) > kSymmetryTol) throw NotSymmetric("verify: D is not symmetric");
  const Mat Ds = 0.5 * (D + D.transpose());
  if (!(min_eigenvalue(Ds) > 0.0)) throw NotPositiveDefinite("verify: D must be positive definite");

  LinearCertificate cert;
  cert.coupling_residual = (sys.C - sys.B.transpose() * Ds).cwiseAbs().maxCoeff();
  const Mat lyap = Ds * sys.A + sys.A.transpose() * Ds;
  cert.lyap_max_eig = max_eigenvalue(0.5 * (lyap + lyap.transpose()));
  cert.pass = cert.coupling_residual <= kCouplingTol && cert.lyap_max_eig < 0.0;
  return cert;
}

Mat lyapunov_solve(const Mat& A, const Mat& Q) {
  const Eigen::Index n = A.rows();
  if (n == 0 || A.cols() != n || Q.rows() != n || Q.cols() != n) {
    throw DimensionMismatch("lyapunov_solve: A and Q must be square of equal size");
  }
  if (!A.allFinite() || !Q.allFinite()) throw NonFinite("lyapunov_solve: non-finite input");
  if (asymmetry(Q) > kSymmetryTol) throw NotSymmetric("lyapunov_solve: Q is not symmetric");

  // Column-major vec: vec(A^T D) = (I kron A^T) vec(D), vec(D A) = (A^T kron I) vec(D).
  const Eigen::Index nn = n * n;
  Mat K = Mat::Zero(nn, nn);
  const Mat At = A.transpose();
  for (Eigen::Index j = 0; j < n; ++j) {
    K.block(j * n, j * n, n, n) += At;
    for (Eigen::Index i = 0; i < n; ++i) {
      K.block(i * n, j * n, n, n) += At(i, j) * Mat::Identity(n, n);
    }
  }
  const Mat negQ = -Q;
  const Eigen::Map<const Vec> rhs(negQ.data(), nn);

  Eigen::FullPivLU<Mat> lu(K);
  if (!lu.isInvertible() || lu.rcond() < 1e-14) {
    throw SingularSystem("lyapunov_solve: A has eigenvalues summing to zero (Kronecker matrix singular)");
  }
  const Vec d = lu.solve(rhs);
  Mat D = Eigen::Map<const Mat>(d.data(), n, n);
  return 0.5 * (D + D.transpose());
}

double linear_passive_radius(const Mat& D, const Mat& sigma, double lyap_max_eig) {
  if (!(lyap_max_eig < 0.0)) {
    throw DomainError("linear_passive_radius: lambda_max must be negative");
  }
  if (D.rows() != D.cols() || sigma.rows() != D.rows()) {
    throw DimensionMismatch("linear_passive_radius: D is n x n, sigma is n x r");
  }
  const double tr = (D * sigma * sigma.transpose()).trace();
  return std::sqrt(std::max(0.0, tr) / -lyap_max_eig);
}

}  // namespace swpass
