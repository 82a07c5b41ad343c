#include "models.hpp"

#include "swpass/cstr.hpp"
#include "swpass/errors.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace swpass;
using swpass::fixtures::ou;
using swpass::fixtures::v1;
using swpass::fixtures::v2;

TEST(ItoSystem, OuFieldsAtTwo) {
  const ItoSystem sys = ou(0.7);
  const FieldValues fv = evaluate_fields(sys, v1(2.0), v1(0.0));
  EXPECT_DOUBLE_EQ(fv.drift(0), -2.0);
  EXPECT_DOUBLE_EQ(fv.diffusion(0, 0), 0.7);
  EXPECT_DOUBLE_EQ(fv.output(0), 2.0);
}

TEST(ItoSystem, RawCstrFields) {
  const ItoSystem sys = build_cstr(CstrParams{});
  const FieldValues fv = evaluate_fields(sys, v2(5.5, 3.0), v1(0.33));
  EXPECT_NEAR(fv.drift(0), -4.51, 1e-12);
  EXPECT_NEAR(fv.drift(1), 4.51, 1e-12);
  EXPECT_NEAR(fv.diffusion(0, 0), -0.165, 1e-15);
  EXPECT_NEAR(fv.diffusion(1, 0), 0.165, 1e-15);
}

TEST(ItoSystem, LinearAtOrigin) {
  LinearSystem lin{Mat::Identity(2, 2) * -1.0, Mat::Identity(2, 2), Mat::Identity(2, 2), Mat::Identity(2, 2) * 0.3};
  const ItoSystem sys = to_ito_system(lin, Box{Vec::Constant(2, -1.0), Vec::Constant(2, 1.0)});
  const FieldValues fv = evaluate_fields(sys, Vec::Zero(2), Vec::Zero(2));
  EXPECT_TRUE(fv.drift.isZero(0.0));
  EXPECT_TRUE(fv.output.isZero(0.0));
  EXPECT_TRUE(fv.diffusion.isApprox(lin.sigma));
}

TEST(ItoSystem, NonFiniteEvaluatorIsReported) {
  ItoSystem sys(
      "log", {1, 1, 1}, [](const Vec& x, const Vec&, Vec& f) { f = x.array().log(); },
      [](const Vec&, const Vec&, Mat& h) { h.setOnes(1, 1); }, [](const Vec& x, const Vec&, Vec& y) { y = x; },
      false, Box{v1(0.5), v1(2.0)});
  EXPECT_THROW((void)sys.evaluate(v1(-1.0), v1(0.0)), NonFinite);
  EXPECT_THROW((void)sys.evaluate(Vec::Zero(2), v1(0.0)), DimensionMismatch);
}

TEST(ItoSystem, WrongShapeRejectedAtConstruction) {
  auto make = [] {
    return ItoSystem(
        "bad", {2, 1, 1}, [](const Vec&, const Vec&, Vec& f) { f = Vec::Zero(3); },
        [](const Vec&, const Vec&, Mat& h) { h = Mat::Zero(2, 1); },
        [](const Vec&, const Vec&, Vec& y) { y = Vec::Zero(1); }, false, Box{Vec::Zero(2), Vec::Ones(2)});
  };
  EXPECT_THROW(make(), DimensionMismatch);
}

TEST(FeedbackLaw, RejectsNonPositiveAndRectangular) {
  EXPECT_THROW(FeedbackLaw::scalar(0.0), NotPositiveDefinite);
  EXPECT_THROW(FeedbackLaw::scalar(-1.0), NotPositiveDefinite);
  EXPECT_THROW(FeedbackLaw(Mat::Ones(1, 2)), DimensionMismatch);
  Mat skew(2, 2);
  skew << 1.0, 0.5, 0.0, 1.0;
  EXPECT_THROW(FeedbackLaw{skew}, NotSymmetric);
}

TEST(ClosedSystem, CstrExplicitFeedback) {
  const ClosedSystem closed = close_loop(build_cstr_io(CstrParams{}), FeedbackLaw::scalar(1.0));
  EXPECT_NEAR(resolve_implicit_input(closed, v2(5.5, 3.0))(0), -1.5, 1e-12);
}

TEST(ClosedSystem, ScalarGain) {
  const ClosedSystem closed = close_loop(ou(), FeedbackLaw::scalar(2.0));
  for (double x : {-3.0, 0.0, 0.25, 4.0}) EXPECT_DOUBLE_EQ(resolve_implicit_input(closed, v1(x))(0), -2.0 * x);
}

TEST(ClosedSystem, ImplicitOutputFixedPoint) {
  ItoSystem sys(
      "implicit", {1, 1, 1}, [](const Vec& x, const Vec& u, Vec& f) { f = -x + u; },
      [](const Vec&, const Vec&, Mat& h) { h.setOnes(1, 1); },
      [](const Vec& x, const Vec& u, Vec& y) { y = x + 0.1 * u; }, true, Box{v1(-5.0), v1(5.0)});
  const ClosedSystem closed = close_loop(sys, FeedbackLaw::scalar(1.0));
  for (double x : {-2.0, 0.5, 3.0}) {
    const Vec u = resolve_implicit_input(closed, v1(x));
    EXPECT_NEAR(u(0), -x / 1.1, 1e-9);
    Vec y(1);
    sys.output(v1(x), u, y);
    EXPECT_LE(std::abs(u(0) + y(0)), closed.options().tol);
  }
}

TEST(ClosedSystem, DivergentIterationThrows) {
  ItoSystem sys(
      "stiff", {1, 1, 1}, [](const Vec& x, const Vec& u, Vec& f) { f = -x + u; },
      [](const Vec&, const Vec&, Mat& h) { h.setOnes(1, 1); },
      [](const Vec& x, const Vec& u, Vec& y) { y = x + 5.0 * u; }, true, Box{v1(-5.0), v1(5.0)});
  const ClosedSystem closed = close_loop(sys, FeedbackLaw::scalar(1.0));
  EXPECT_THROW((void)resolve_implicit_input(closed, v1(1.0)), NoFixedPoint);
}

TEST(Plant, ClosedLinearLoop) {
  LinearSystem lin{Mat::Constant(1, 1, -1.0), Mat::Ones(1, 1), Mat::Ones(1, 1), Mat::Constant(1, 1, 0.1)};
  const Plant plant(close_loop(to_ito_system(lin, Box{v1(-5.0), v1(5.0)}), FeedbackLaw::scalar(1.0)));
  Vec u(1), f(1);
  Mat h(1, 1);
  plant.fields(v1(1.5), u, f, h);
  EXPECT_DOUBLE_EQ(f(0), -3.0);
  EXPECT_DOUBLE_EQ(h(0, 0), 0.1);
}

TEST(Plant, FixedInputShapeChecked) {
  EXPECT_THROW(Plant(ou(), Vec::Zero(2)), DimensionMismatch);
  const Plant p = Plant::open_loop(ou());
  EXPECT_DOUBLE_EQ(p.input(v1(3.0))(0), 0.0);
}
