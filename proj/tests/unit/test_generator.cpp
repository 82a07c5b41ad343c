#include "models.hpp"

#include "swpass/cstr.hpp"
#include "swpass/generator.hpp"
#include "swpass/rng.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

using namespace swpass;
using swpass::fixtures::ou;
using swpass::fixtures::v1;

namespace {

StorageFunction x_squared() {
  return StorageFunction([](const Vec& x) { return x.squaredNorm(); }, [](const Vec& x) -> Vec { return 2.0 * x; },
                         [](const Vec& x) -> Mat { return 2.0 * Mat::Identity(x.size(), x.size()); });
}

}  // namespace

TEST(Generator, ConstantStorageGivesZero) {
  const StorageFunction V = StorageFunction::constant(1.0);
  EXPECT_EQ(generator_apply(ou(), V, v1(3.0), v1(0.4)), 0.0);
  EXPECT_EQ(generator_apply(build_cstr_io(CstrParams{}), V, fixtures::v2(5.5, 3.0), v1(0.0)), 0.0);
}

TEST(Generator, OuWithSquare) {
  const StorageFunction V = x_squared();
  for (double x : {-3.0, -0.5, 0.0, 1.0, 2.5}) {
    EXPECT_NEAR(generator_apply(ou(), V, v1(x), v1(0.0)), -2.0 * x * x + 1.0, 1e-12);
  }
  EXPECT_DOUBLE_EQ(generator_apply(ou(), V, v1(0.0), v1(0.0)), 1.0);
}

TEST(Generator, LinearClosedFormAnalyticAndFiniteDifference) {
  Mat A(2, 2), B(2, 1), C(1, 2), S(2, 2), D(2, 2);
  A << -1.0, 0.3, -0.2, -2.0;
  B << 1.0, 0.5;
  C << 1.0, 0.5;
  S << 0.2, 0.0, 0.1, 0.3;
  D << 2.0, 0.4, 0.4, 1.0;
  const LinearSystem lin{A, B, C, S};
  const ItoSystem sys = to_ito_system(lin, Box{Vec::Constant(2, -5.0), Vec::Constant(2, 5.0)});
  const StorageFunction V = StorageFunction::quadratic(D, Vec::Zero(2));
  const StorageFunction Vfd = V.finite_difference_only();
  CounterRng rng(11);
  for (int i = 0; i < 100; ++i) {
    Vec x(2), u(1);
    x << 4.0 * rng.uniform() - 2.0, 4.0 * rng.uniform() - 2.0;
    u << 2.0 * rng.uniform() - 1.0;
    const double oracle = x.dot(D * (A * x + B * u)) + 0.5 * (D * S * S.transpose()).trace();
    EXPECT_NEAR(generator_apply(sys, V, x, u), oracle, 1e-10 * std::max(1.0, std::abs(oracle)));
    EXPECT_NEAR(generator_apply(sys, Vfd, x, u), oracle, 1e-4 * std::max(1.0, std::abs(oracle)));
  }
}

TEST(Generator, LinearInStorage) {
  const ItoSystem sys = ou(0.8);
  const StorageFunction a = x_squared();
  const StorageFunction b = StorageFunction::quadratic(Mat::Constant(1, 1, 3.0), v1(0.5));
  const StorageFunction combo = StorageFunction::combine(2.0, a, -0.5, b);
  for (double x : {-1.5, 0.2, 2.0}) {
    const double lhs = generator_apply(sys, combo, v1(x), v1(0.3));
    const double rhs = 2.0 * generator_apply(sys, a, v1(x), v1(0.3)) - 0.5 * generator_apply(sys, b, v1(x), v1(0.3));
    EXPECT_NEAR(lhs, rhs, 1e-12);
  }
}

TEST(Generator, PlantOverloadUsesResolvedInput) {
  const Plant plant(close_loop(ou(), FeedbackLaw::scalar(1.0)));
  // closed drift -2x, so L[x^2] = -4x^2 + 1
  EXPECT_NEAR(generator_apply(plant, x_squared(), v1(1.5)), -4.0 * 2.25 + 1.0, 1e-12);
}

TEST(DerivativeConsistency, QuadraticsAreExact) {
  const std::vector<Vec> pts{fixtures::v2(0.1, -0.3), fixtures::v2(2.0, 1.0), fixtures::v2(-4.0, 7.5)};
  EXPECT_LE(check_derivative_consistency(StorageFunction::quadratic(Mat::Identity(2, 2), Vec::Zero(2)), pts), 1e-6);
  const std::vector<Vec> pts1{v1(3.6), v1(5.0), v1(6.2)};
  EXPECT_LE(check_derivative_consistency(cstr_storage(CstrParams{}), pts1), 1e-6);
}

TEST(DerivativeConsistency, DetectsWrongGradient) {
  const StorageFunction wrong([](const Vec& x) { return x.squaredNorm(); },
                              [](const Vec& x) -> Vec { return 3.0 * x; });
  const std::vector<Vec> pts{v1(1.0), v1(-2.0)};
  EXPECT_NEAR(check_derivative_consistency(wrong, pts), 0.5, 1e-6);
}

TEST(StorageFunction, FiniteDifferenceHessianOfCubic) {
  const StorageFunction V([](const Vec& x) { return x(0) * x(0) * x(0) + x(0) * x(1); });
  Mat H = V.hessian(fixtures::v2(1.0, 2.0));
  EXPECT_NEAR(H(0, 0), 6.0, 1e-5);
  EXPECT_NEAR(H(0, 1), 1.0, 1e-6);
  EXPECT_NEAR(H(1, 0), 1.0, 1e-6);
  EXPECT_NEAR(H(1, 1), 0.0, 1e-6);
}
