#include "models.hpp"

#include "swpass/cstr.hpp"
#include "swpass/passivity.hpp"
#include "swpass/sampling.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace swpass;
using swpass::fixtures::ou;
using swpass::fixtures::v1;
using swpass::fixtures::v2;

namespace {

StorageFunction x_squared() { return StorageFunction::quadratic(Mat::Constant(1, 1, 2.0), v1(0.0)); }
StorageFunction half_square() { return StorageFunction::quadratic(Mat::Identity(1, 1), v1(0.0)); }

ShellSpec shell1(double inner, double outer, double eps = 0.0) {
  ShellSpec s;
  s.center = v1(0.0);
  s.inner_radius = inner;
  s.outer_radius = outer;
  s.epsilon = eps;
  return s;
}

Plant cstr_sub_plant(std::optional<double> gain) {
  const Decomposition d = build_cstr_subsystem(CstrParams{});
  if (gain) return Plant(close_loop(d.subsystem, FeedbackLaw::scalar(*gain)));
  return Plant::open_loop(d.subsystem);
}

ShellSpec cstr_shell(double inner) {
  ShellSpec s;
  s.center = v1(5.0);
  s.inner_radius = inner;
  s.outer_radius = 3.5;
  s.epsilon = 1.0;
  return s;
}

}  // namespace

TEST(Sampling, RadicalInverseAndHalton) {
  EXPECT_DOUBLE_EQ(radical_inverse(1, 2), 0.5);
  EXPECT_DOUBLE_EQ(radical_inverse(3, 2), 0.75);
  EXPECT_DOUBLE_EQ(radical_inverse(1, 3), 1.0 / 3.0);
  const Vec h = halton_point(1, 2);
  EXPECT_DOUBLE_EQ(h(0), 0.5);
  EXPECT_DOUBLE_EQ(h(1), 1.0 / 3.0);
}

TEST(Sampling, AnnulusPointsStayInShell) {
  const AnnulusSampler s(v2(1.0, -1.0), 0.5, 2.0, 3);
  EXPECT_NEAR((s.point(0) - s.center()).norm(), 0.5, 1e-12);
  for (std::uint64_t i = 0; i < 500; ++i) {
    const double r = (s.point(i) - s.center()).norm();
    EXPECT_GE(r, 0.5 - 1e-12);
    EXPECT_LE(r, 2.0 + 1e-12);
  }
}

TEST(WeakPassivity, DeterministicGradientSystem) {
  const Plant plant = Plant::open_loop(ou(0.0));
  const PassivityReport r = weak_passivity_scan(plant, half_square(), shell1(0.0, 10.0));
  EXPECT_NEAR(r.worst_margin, 0.0, 1e-15);
  EXPECT_TRUE(r.passivity_pass);
  EXPECT_FALSE(r.rank_pass);
}

TEST(WeakPassivity, CstrPassesOutsideRadius) {
  const double R = cstr_delta_and_radius(CstrParams{}).R;
  for (std::optional<double> gain : {std::optional<double>{}, std::optional<double>{1.0}}) {
    const Plant plant = cstr_sub_plant(gain);
    const PassivityReport r = weak_passivity_scan(plant, cstr_storage(CstrParams{}), cstr_shell(R));
    EXPECT_TRUE(r.passivity_pass);
    EXPECT_LE(r.worst_margin, 0.0);
    EXPECT_TRUE(r.rank_pass);
    EXPECT_TRUE(r.center_is_sampled_minimum);
  }
}

TEST(WeakPassivity, CstrFailsInsideRadius) {
  const PassivityReport r = weak_passivity_scan(cstr_sub_plant(std::nullopt), cstr_storage(CstrParams{}), cstr_shell(0.01));
  EXPECT_FALSE(r.passivity_pass);
  EXPECT_GT(r.worst_margin, 0.0);
}

TEST(StrictPassivity, CstrStateStrictOutsideRadius) {
  const CstrRadius rad = cstr_delta_and_radius(CstrParams{});
  const PassivityReport r = strict_weak_passivity_scan(cstr_sub_plant(1.0), cstr_storage(CstrParams{}),
                                                       cstr_shell(rad.R), StrictKind::state, rad.delta);
  EXPECT_TRUE(r.passivity_pass);
  EXPECT_EQ(r.condition, "strict_state");
}

TEST(StrictPassivity, ZeroDeltaMatchesWeak) {
  const Plant plant(close_loop(ou(0.5), FeedbackLaw::scalar(1.0)));
  const PassivityReport w = weak_passivity_scan(plant, half_square(), shell1(0.5, 4.0));
  const PassivityReport s = strict_weak_passivity_scan(plant, half_square(), shell1(0.5, 4.0), StrictKind::output, 0.0);
  EXPECT_DOUBLE_EQ(w.worst_margin, s.worst_margin);
}

TEST(StrictPassivity, OuStateClosedFormMargin) {
  // u = -x: L[V] = -2x^2 + 1/2, -u y = x^2, delta x^2 = x^2, so the margin is 1/2 everywhere
  const Plant plant(close_loop(ou(), FeedbackLaw::scalar(1.0)));
  const PassivityReport r = strict_weak_passivity_scan(plant, half_square(), shell1(1.0, 10.0), StrictKind::state, 1.0);
  EXPECT_NEAR(r.worst_margin, 0.5, 1e-9);
  EXPECT_FALSE(r.passivity_pass);
}

TEST(DriftRate, ClosedForms) {
  EXPECT_NEAR(drift_rate_scan(Plant::open_loop(ou()), x_squared(), shell1(1.0, 10.0)), 1.0, 1e-12);
  EXPECT_NEAR(drift_rate_scan(Plant::open_loop(ou(0.0)), half_square(), shell1(1.0, 10.0)), 1.0, 1e-12);
  const double R = cstr_delta_and_radius(CstrParams{}).R;
  EXPECT_GT(drift_rate_scan(cstr_sub_plant(1.0), cstr_storage(CstrParams{}), cstr_shell(R)), 0.0);
}

TEST(GeneratorBound, ClosedForms) {
  const Box box{v1(-10.0), v1(10.0)};
  EXPECT_NEAR(generator_bound_scan(Plant::open_loop(ou()), x_squared(), box), 1.0, 1e-12);
  EXPECT_EQ(generator_bound_scan(Plant::open_loop(ou()), StorageFunction::constant(2.0), box), 0.0);
  Mat A(2, 2), S(2, 2), D(2, 2);
  A << -1.0, 0.0, 0.0, -2.0;
  S << 0.3, 0.1, 0.0, 0.2;
  D << 1.0, 0.2, 0.2, 2.0;
  const LinearSystem lin{A, Mat::Identity(2, 2), Mat::Identity(2, 2), S};
  const Box box2{Vec::Constant(2, -3.0), Vec::Constant(2, 3.0)};
  const double C = generator_bound_scan(Plant::open_loop(to_ito_system(lin, box2)),
                                        StorageFunction::quadratic(D, Vec::Zero(2)), box2);
  EXPECT_NEAR(C, 0.5 * (D * S * S.transpose()).trace(), 1e-12);
}

TEST(DiffusionRank, Cases) {
  EXPECT_NEAR(diffusion_rank_check(Plant::open_loop(ou(1.0)), v1(0.0), 2.0), 1.0, 1e-12);
  const double r = 0.5;
  const double sub = diffusion_rank_check(cstr_sub_plant(std::nullopt), v1(5.0), r);
  EXPECT_GE(sub, std::pow(0.03 * (5.0 - r), 2) - 1e-12);
  EXPECT_LE(sub, 0.0225);
  const Plant full = Plant::open_loop(build_cstr_io(CstrParams{}));
  EXPECT_LE(std::abs(diffusion_rank_check(full, v2(5.0, 3.5), 0.5)), 1e-12);
}

TEST(Bump, KnotsAreTwiceDifferentiable) {
  const double knots[] = {0.5, 1.5, 2.5};
  for (int j = 0; j < 3; ++j) {
    for (int d = 0; d <= 2; ++d) {
      EXPECT_LE(std::abs(bump_piece(j, knots[j], d) - bump_piece(j + 1, knots[j], d)), 1e-9)
          << "knot " << knots[j] << " derivative " << d;
    }
  }
  EXPECT_DOUBLE_EQ(bump_profile(0.0), 0.0);
  EXPECT_DOUBLE_EQ(bump_profile(3.0), 23.0 / 12.0);
  EXPECT_DOUBLE_EQ(bump_profile(0.2, 2), 2.0);
}

TEST(InstabilityWitness, ClosedForms) {
  EXPECT_NEAR(instability_witness(Plant::open_loop(ou(1.0)), v1(0.0)), 12.0 / 23.0, 1e-12);
  EXPECT_EQ(instability_witness(Plant::open_loop(ou(0.0)), v1(0.0)), 0.0);
  const CstrParams p;
  const double w = instability_witness(Plant::open_loop(build_cstr_io(p)), p.desired_state());
  EXPECT_NEAR(w, 12.0 / 23.0 * 0.045, 1e-12);
}

TEST(ShellSpec, Validation) {
  EXPECT_THROW(shell1(2.0, 1.0).validate(), ValidationError);
  ShellSpec s = shell1(0.0, 1.0);
  s.samples = 0;
  EXPECT_THROW(s.validate(), ValidationError);
}
