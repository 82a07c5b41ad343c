#include "models.hpp"

#include "swpass/cstr.hpp"
#include "swpass/decomposition.hpp"
#include "swpass/errors.hpp"
#include "swpass/rng.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace swpass;
using swpass::fixtures::v1;
using swpass::fixtures::v2;

TEST(Decomposition, CstrSubsystemMatchesReducedModel) {
  const CstrParams p;
  const Decomposition d = build_cstr_subsystem(p);
  EXPECT_LE(d.report.worst_residual, 1e-10);
  EXPECT_EQ(d.subsystem.n(), 1u);
  const ItoSystem full = build_cstr_io(p);
  CounterRng rng(4);
  for (int i = 0; i < 50; ++i) {
    const double x1 = 8.5 * rng.uniform();
    const double u = 2.0 * rng.uniform() - 1.0;
    const FieldValues sub = d.subsystem.evaluate(v1(x1), v1(u));
    const FieldValues f = full.evaluate(v2(x1, p.c_in - x1), v1(u));
    // pushforward through T = [[1,0],[1,1]]
    EXPECT_NEAR(sub.drift(0), f.drift(0), 1e-12);
    EXPECT_NEAR(sub.diffusion(0, 0), f.diffusion(0, 0), 1e-12);
    EXPECT_NEAR(sub.output(0), f.output(0), 1e-12);
    EXPECT_NEAR(f.drift(0) + f.drift(1), 0.0, 1e-12);
    EXPECT_EQ(f.diffusion(0, 0) + f.diffusion(1, 0), 0.0);
    const double reduced = -p.k * x1 + p.k * p.x1_dag * (p.c_in - x1) / (p.c_in - p.x1_dag) + (p.c_in - x1) * u;
    EXPECT_NEAR(sub.drift(0), reduced, 1e-12);
  }
}

TEST(Decomposition, IdentityOnRawCstrRejected) {
  const AffineDecomposition id{Mat::Identity(2, 2), Vec::Zero(2), 1};
  EXPECT_THROW((void)build_decomposition(build_cstr(CstrParams{}), id, v1(3.5), Box{v1(0.0), v1(8.5)}),
               NotDecomposition);
}

TEST(Decomposition, IdentityOnFrozenSecondState) {
  ItoSystem sys(
      "frozen", {2, 1, 1}, [](const Vec& x, const Vec& u, Vec& f) { f = v2(-x(0) + u(0), 0.0); },
      [](const Vec&, const Vec&, Mat& h) { h = Mat::Zero(2, 1); h(0, 0) = 1.0; },
      [](const Vec& x, const Vec&, Vec& y) { y = v1(x(0)); }, false, Box{Vec::Constant(2, -3.0), Vec::Constant(2, 3.0)});
  const AffineDecomposition id{Mat::Identity(2, 2), Vec::Zero(2), 1};
  const Decomposition d = build_decomposition(sys, id, v1(0.7), Box{v1(-3.0), v1(3.0)});
  EXPECT_EQ(d.report.worst_residual, 0.0);
  const Trajectory tr = simulate_path(Plant::open_loop(sys), v2(1.0, 0.7), SimConfig{1e-3, 2.0, 1, 1, std::nullopt});
  EXPECT_EQ(verify_invariant_coordinate(tr, id, 1e-12).max_drift, 0.0);
}

TEST(Decomposition, MapValidation) {
  EXPECT_THROW((AffineDecomposition{Mat::Zero(2, 2), Vec::Zero(2), 1}.validate()), SingularSystem);
  EXPECT_THROW((AffineDecomposition{Mat::Identity(2, 2), Vec::Zero(2), 2}.validate()), ValidationError);
  const AffineDecomposition m = cstr_decomposition();
  const Vec x = v2(5.5, 3.0);
  EXPECT_TRUE(m.inverse(m.forward(x)).isApprox(x, 1e-15));
  EXPECT_GT(m.condition_number(), 1.0);
}

TEST(InvariantCoordinate, CstrPathConserved) {
  const CstrParams p;
  const Plant plant(close_loop(build_cstr_io(p), FeedbackLaw::scalar(1.0)));
  const Trajectory tr = simulate_path(plant, v2(5.5, 3.0), SimConfig{1e-3, 100.0, 9, 100, std::nullopt});
  const InvariantCheck chk = verify_invariant_coordinate(tr, cstr_decomposition(), 1e-9);
  EXPECT_TRUE(chk.pass);
  EXPECT_LE(chk.max_drift, 1e-9);
}

TEST(InvariantCoordinate, PerturbedNoiseDrifts) {
  const CstrParams p;
  ItoSystem leaky(
      "leaky", {2, 1, 1},
      [](const Vec& x, const Vec&, Vec& f) { f = v2(-x(0) + 1.4 * (8.5 - x(0)), x(0) - 1.4 * x(1)); },
      [](const Vec& x, const Vec&, Mat& h) { h = Mat(2, 1); h << -0.03 * x(0), 0.02 * x(0); },
      [](const Vec& x, const Vec&, Vec& y) { y = v1(x(0)); }, false, Box{Vec::Zero(2), Vec::Constant(2, 8.5)});
  const Trajectory tr = simulate_path(Plant::open_loop(leaky), v2(5.0, 3.5), SimConfig{1e-3, 10.0, 9, 10, std::nullopt});
  EXPECT_FALSE(verify_invariant_coordinate(tr, cstr_decomposition(), 1e-9).pass);
}

TEST(LiftedMeasure, PointMassLifts) {
  const HistogramMeasure sub(Box{v1(4.0), v1(6.0)}, {4}, {0.0, 1.0, 0.0, 0.0}, 0.0);
  const LiftedMeasure lm = lift_measure(sub, cstr_decomposition(), v1(8.5));
  const Vec pt = lm.support_point(1);
  EXPECT_NEAR(pt(0), 4.75, 1e-15);
  EXPECT_NEAR(pt(1), 8.5 - 4.75, 1e-15);
  EXPECT_NEAR(lm.total_mass(), 1.0, 1e-15);
}

TEST(LiftedMeasure, BoxQueryMatchesSubMass) {
  const HistogramMeasure sub(Box{v1(4.0), v1(6.0)}, {4}, {0.1, 0.4, 0.3, 0.2}, 0.0);
  const LiftedMeasure lm = lift_measure(sub, cstr_decomposition(), v1(8.5));
  // [4.5, 5.5] x [3.0, 4.0] cuts the line x1 + x2 = 8.5 exactly over x1 in [4.5, 5.5]
  EXPECT_NEAR(lm.measure_of_box(Box{v2(4.5, 3.0), v2(5.5, 4.0)}), 0.7, 1e-12);
  EXPECT_NEAR(lm.measure_of_box(Box{v2(4.0, 0.0), v2(6.0, 1.0)}), 0.0, 1e-12);
}
