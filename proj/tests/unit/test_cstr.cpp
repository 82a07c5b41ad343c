#include "models.hpp"

#include "swpass/cstr.hpp"
#include "swpass/errors.hpp"
#include "swpass/rng.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace swpass;
using swpass::fixtures::v1;
using swpass::fixtures::v2;

TEST(Cstr, ParameterValidation) {
  CstrParams p;
  EXPECT_NO_THROW(p.validate());
  EXPECT_TRUE(p.noise_is_small());
  p.x1_dag = 9.0;
  EXPECT_THROW(p.validate(), DomainError);
  p = CstrParams{};
  p.sigma = 0.0;
  EXPECT_THROW(p.validate(), DomainError);
}

TEST(Cstr, RawEquilibrium) {
  const CstrParams p;
  const double q = 5.0 / 3.5;
  EXPECT_NEAR(p.equilibrium_flow(), q, 1e-15);
  const FieldValues fv = build_cstr(p).evaluate(v2(5.0, 3.5), v1(q));
  EXPECT_NEAR(fv.drift(0), 0.0, 1e-12);
  EXPECT_NEAR(fv.drift(1), 0.0, 1e-12);
  const FieldValues zero = build_cstr(p).evaluate(v2(0.0, 3.5), v1(q));
  EXPECT_EQ(zero.diffusion(0, 0), 0.0);
  EXPECT_EQ(zero.diffusion(1, 0), 0.0);
}

TEST(Cstr, ShiftedInputModel) {
  const CstrParams p;
  const ItoSystem raw = build_cstr(p);
  const ItoSystem io = build_cstr_io(p);
  CounterRng rng(6);
  for (int i = 0; i < 50; ++i) {
    const Vec x = v2(8.5 * rng.uniform(), 8.5 * rng.uniform());
    const double u = rng.uniform() - 0.5;
    const FieldValues a = raw.evaluate(x, v1(u + p.equilibrium_flow()));
    const FieldValues b = io.evaluate(x, v1(u));
    EXPECT_NEAR((a.drift - b.drift).cwiseAbs().maxCoeff(), 0.0, 1e-12);
    EXPECT_EQ(a.diffusion, b.diffusion);
  }
  EXPECT_EQ(io.evaluate(v2(5.0, 1.0), v1(0.0)).output(0), 0.0);
  EXPECT_DOUBLE_EQ(io.evaluate(v2(5.5, 3.0), v1(0.0)).output(0), 1.5);
}

TEST(Cstr, DeltaRadiusAgainstSignChangeScan) {
  const CstrParams p;
  const CstrRadius r = cstr_delta_and_radius(p);
  EXPECT_NEAR(r.delta, 8.5 / 7.0, 1e-15);
  // R is where delta d^2 = sigma^2 (x_dag + d)^2 / 2 changes sign for d > 0
  auto g = [&](double d) { return r.delta * d * d - 0.5 * p.sigma * p.sigma * (p.x1_dag + d) * (p.x1_dag + d); };
  double lo = 1e-6, hi = 1.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (g(mid) < 0.0 ? lo : hi) = mid;
  }
  EXPECT_NEAR(r.R, 0.5 * (lo + hi), 1e-12);
  EXPECT_NEAR(r.R, 0.0981, 1e-4);
  EXPECT_NEAR(r.epsilon_max, p.c_in - r.R - p.x1_dag, 1e-15);
  EXPECT_NEAR(r.epsilon_max, 3.4019, 1e-4);
}

TEST(Cstr, InequalityChainOutsideRadius) {
  const CstrParams p;
  const CstrRadius r = cstr_delta_and_radius(p);
  for (int i = 0; i <= 8500; ++i) {
    const double x = i * 1e-3;
    const double d = x - p.x1_dag;
    if (std::abs(d) < r.R) continue;
    EXPECT_LE(-2.0 * r.delta * d * d + 0.5 * p.sigma * p.sigma * x * x, -r.delta * d * d + 1e-12) << x;
  }
}

TEST(Cstr, RadiusLimits) {
  CstrParams p;
  p.sigma = 1e-9;
  EXPECT_LT(cstr_delta_and_radius(p).R, 1e-7);
  p.sigma = 2.0;
  p.k = 1.0;
  EXPECT_THROW((void)cstr_delta_and_radius(p), DomainError);
}

TEST(Cstr, SmallExperimentBundle) {
  CstrExperimentConfig cfg;
  cfg.gain = 1.0;
  cfg.sim = SimConfig{1e-3, 60.0, 11, 1, std::nullopt};
  cfg.burn_in = 10.0;
  cfg.ensemble_paths = 200;
  cfg.sample_path_t_end = 2.0;
  cfg.scan_samples = 256;
  const CstrExperimentResult res = run_cstr_experiment(cfg);
  EXPECT_LE(res.conservation_max_error, 1e-9);
  EXPECT_EQ(res.controller, "K=1");
  EXPECT_GT(res.band_x1.half_width, 0.0);
  EXPECT_LT(res.band_x1.half_width, 0.2);
  EXPECT_NEAR(res.band_x1.half_width, res.band_x2.half_width, 0.03);
  EXPECT_EQ(res.snapshots.measures.front().size(), 5u);
  EXPECT_EQ(res.sample_path.size(), 201u);
  EXPECT_NEAR(res.witness, 12.0 / 23.0 * 0.045, 1e-12);
  EXPECT_TRUE(res.weak.passivity_pass);
  EXPECT_TRUE(res.theorem6.holds);
  ASSERT_TRUE(res.ergodic_x1.has_value());
  EXPECT_EQ(res.ergodic_x1->total_bins(), 64u);
}
