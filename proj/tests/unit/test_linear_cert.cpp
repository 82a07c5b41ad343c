#include "swpass/errors.hpp"
#include "swpass/linear_cert.hpp"
#include "swpass/rng.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace swpass;

namespace {

Mat diag(std::initializer_list<double> d) {
  Vec v(static_cast<Eigen::Index>(d.size()));
  Eigen::Index i = 0;
  for (double x : d) v(i++) = x;
  return v.asDiagonal();
}

Mat random_matrix(CounterRng& rng, int n) {
  Mat m(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) m(i, j) = 2.0 * rng.uniform() - 1.0;
  }
  return m;
}

}  // namespace

TEST(LinearCert, ScalarPasses) {
  const LinearSystem sys{Mat::Constant(1, 1, -1.0), Mat::Ones(1, 1), Mat::Ones(1, 1), Mat::Ones(1, 1)};
  const LinearCertificate c = verify_linear_weak_passivity(sys, Mat::Ones(1, 1));
  EXPECT_TRUE(c.pass);
  EXPECT_EQ(c.coupling_residual, 0.0);
  EXPECT_DOUBLE_EQ(c.lyap_max_eig, -2.0);
  EXPECT_NEAR(linear_passive_radius(Mat::Ones(1, 1), sys.sigma, c.lyap_max_eig), std::sqrt(0.5), 1e-15);
}

TEST(LinearCert, DiagonalExampleAndRadius) {
  const Mat I = Mat::Identity(2, 2);
  const LinearSystem sys{diag({-1.0, -2.0}), I, I, 0.1 * I};
  const LinearCertificate c = verify_linear_weak_passivity(sys, I);
  EXPECT_TRUE(c.pass);
  EXPECT_DOUBLE_EQ(c.lyap_max_eig, -2.0);
  EXPECT_NEAR(linear_passive_radius(I, sys.sigma, c.lyap_max_eig), 0.1, 1e-12);
  EXPECT_EQ(linear_passive_radius(I, Mat::Zero(2, 2), c.lyap_max_eig), 0.0);
}

TEST(LinearCert, UnstableFails) {
  const Mat I = Mat::Identity(2, 2);
  const LinearCertificate c = verify_linear_weak_passivity(LinearSystem{diag({1.0, -2.0}), I, I, I}, I);
  EXPECT_FALSE(c.pass);
  EXPECT_DOUBLE_EQ(c.lyap_max_eig, 2.0);
  EXPECT_THROW((void)linear_passive_radius(I, I, c.lyap_max_eig), DomainError);
}

TEST(LinearCert, CouplingMismatchFails) {
  const Mat I = Mat::Identity(2, 2);
  Mat C = I;
  C(0, 1) = 0.5;
  const LinearCertificate c = verify_linear_weak_passivity(LinearSystem{diag({-1.0, -2.0}), I, C, I}, I);
  EXPECT_FALSE(c.pass);
  EXPECT_DOUBLE_EQ(c.coupling_residual, 0.5);
}

TEST(LinearCert, StorageMatrixChecks) {
  const Mat I = Mat::Identity(2, 2);
  const LinearSystem sys{diag({-1.0, -2.0}), I, I, I};
  Mat skew = I;
  skew(0, 1) = 0.1;
  EXPECT_THROW((void)verify_linear_weak_passivity(sys, skew), NotSymmetric);
  EXPECT_THROW((void)verify_linear_weak_passivity(sys, diag({1.0, -1.0})), NotPositiveDefinite);
  Mat nearly = I;
  nearly(0, 1) = 1e-12;
  EXPECT_NO_THROW((void)verify_linear_weak_passivity(sys, nearly));
}

TEST(LinearCert, RadiusScalesWithNoise) {
  const Mat D = diag({2.0, 1.0});
  Mat S(2, 1);
  S << 0.3, 0.4;
  const double r1 = linear_passive_radius(D, S, -1.5);
  EXPECT_NEAR(linear_passive_radius(D, 3.0 * S, -1.5), 3.0 * r1, 1e-14);
}

TEST(Lyapunov, ClosedForms) {
  EXPECT_NEAR(lyapunov_solve(Mat::Constant(1, 1, -1.0), Mat::Constant(1, 1, 2.0))(0, 0), 1.0, 1e-14);
  const Mat D = lyapunov_solve(diag({-1.0, -2.0}), Mat::Identity(2, 2));
  EXPECT_TRUE(D.isApprox(diag({0.5, 0.25}), 1e-14));
  EXPECT_THROW((void)lyapunov_solve(diag({1.0, -1.0}), Mat::Identity(2, 2)), SingularSystem);
}

TEST(Lyapunov, RandomStableResidual) {
  CounterRng rng(31);
  for (int trial = 0; trial < 10; ++trial) {
    Mat A = random_matrix(rng, 5);
    const double shift = Eigen::EigenSolver<Mat>(A).eigenvalues().real().maxCoeff() + 0.5;
    A -= shift * Mat::Identity(5, 5);
    Mat L = random_matrix(rng, 5);
    const Mat Q = L * L.transpose() + Mat::Identity(5, 5);
    const Mat D = lyapunov_solve(A, Q);
    EXPECT_LE((A.transpose() * D + D * A + Q).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_EQ(D, D.transpose());
  }
}

TEST(Eigen, SymmetricExamples) {
  EXPECT_EQ(symmetric_eigenvalues(Mat::Identity(3, 3)), (std::vector<double>{1.0, 1.0, 1.0}));
  const auto d = symmetric_eigenvalues(diag({3.0, 1.0, 2.0}));
  EXPECT_EQ(d, (std::vector<double>{1.0, 2.0, 3.0}));
  Mat m(2, 2);
  m << 2.0, 1.0, 1.0, 2.0;
  const auto e = symmetric_eigenvalues(m);
  EXPECT_NEAR(e[0], 1.0, 1e-14);
  EXPECT_NEAR(e[1], 3.0, 1e-14);
}

TEST(Eigen, AgreesWithCharacteristicPolynomialAndTrace) {
  CounterRng rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    const Mat r = random_matrix(rng, 2);
    const Mat m = r + r.transpose();
    const double tr = m.trace();
    const double det = m.determinant();
    const double disc = std::sqrt(tr * tr / 4.0 - det);
    const auto e = symmetric_eigenvalues(m);
    EXPECT_NEAR(e[0], tr / 2.0 - disc, 1e-12);
    EXPECT_NEAR(e[1], tr / 2.0 + disc, 1e-12);
  }
  for (int trial = 0; trial < 10; ++trial) {
    const Mat r = random_matrix(rng, 6);
    const Mat m = r + r.transpose();
    const auto e = symmetric_eigenvalues(m);
    double sum = 0.0, sq = 0.0;
    for (double x : e) {
      sum += x;
      sq += x * x;
    }
    EXPECT_NEAR(sum, m.trace(), 1e-12);
    EXPECT_NEAR(sq, m.squaredNorm(), 1e-11);
    EXPECT_TRUE(std::is_sorted(e.begin(), e.end()));
  }
}
