#include "models.hpp"

#include "swpass/errors.hpp"
#include "swpass/generator.hpp"
#include "swpass/hitting.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace swpass;
using swpass::fixtures::ou;
using swpass::fixtures::v1;

namespace {

StorageFunction x_squared() { return StorageFunction::quadratic(Mat::Constant(1, 1, 2.0), v1(0.0)); }

Trajectory decay_path(double x0, double t_end) {
  return simulate_path(Plant::open_loop(ou(0.0)), v1(x0), SimConfig{1e-4, t_end, 0, 1, std::nullopt});
}

}  // namespace

TEST(FirstPassage, StartInside) {
  const Trajectory tr = decay_path(0.5, 0.1);
  EXPECT_EQ(first_passage(tr, v1(0.0), 1.0).value(), 0.0);
}

TEST(FirstPassage, DeterministicFlow) {
  const Trajectory tr = decay_path(2.0, 1.0);
  EXPECT_NEAR(first_passage(tr, v1(0.0), 1.0).value(), std::log(2.0), 2e-4);
  EXPECT_FALSE(first_passage(tr, v1(0.0), 0.1).has_value());
}

TEST(Recurrence, OuMeanBelowBound) {
  const Plant plant = Plant::open_loop(ou());
  const RecurrenceEstimate est = mean_recurrence_estimate(plant, x_squared(), 1.0, v1(2.0), v1(0.0), 1.0, 2000,
                                                          SimConfig{1e-3, 20.0, 5, 1, std::nullopt});
  EXPECT_DOUBLE_EQ(est.bound, 4.0);
  EXPECT_EQ(est.hits + est.censored, 2000u);
  EXPECT_LT(est.mean, 4.0);
  EXPECT_FALSE(est.violated);
}

TEST(Recurrence, OnSurfaceIsImmediate) {
  const Plant plant = Plant::open_loop(ou());
  const RecurrenceEstimate est = mean_recurrence_estimate(plant, x_squared(), 1.0, v1(1.0), v1(0.0), 1.0, 50,
                                                          SimConfig{1e-3, 1.0, 5, 1, std::nullopt});
  EXPECT_EQ(est.mean, 0.0);
  EXPECT_GE(est.bound, 0.0);
}

TEST(Episodes, NeverHigh) {
  const EpisodeTimes e = alternating_hitting_times(decay_path(1.0, 1.0), x_squared(), 1.0, 2.0);
  EXPECT_TRUE(e.taus.empty());
}

TEST(Episodes, DecayFromAbove) {
  const EpisodeTimes e = alternating_hitting_times(decay_path(std::sqrt(3.0), 3.0), x_squared(), 1.0, 2.0);
  ASSERT_EQ(e.taus.size(), 2u);
  EXPECT_TRUE(e.started_above);
  EXPECT_EQ(e.taus[0], 0.0);
  EXPECT_NEAR(e.taus[1], 0.5 * std::log(3.0), 2e-4);
}

TEST(Episodes, ScannerAlternates) {
  EpisodeScanner s(1.0, 2.0);
  const double vs[] = {0.5, 1.5, 2.5, 1.5, 0.9, 3.0, 0.2};
  for (int i = 0; i < 7; ++i) s.observe(i, vs[i]);
  const EpisodeTimes& e = s.times();
  ASSERT_EQ(e.taus.size(), 4u);
  EXPECT_FALSE(e.started_above);
  EXPECT_EQ(e.taus[0], 2.0);
  EXPECT_EQ(e.taus[1], 4.0);
  EXPECT_EQ(e.taus[2], 5.0);
  EXPECT_EQ(e.taus[3], 6.0);
  const EpisodeStatistics st = episode_statistics(e);
  EXPECT_EQ(st.descent.count, 2u);
  EXPECT_DOUBLE_EQ(st.descent.mean, 1.5);
  EXPECT_EQ(st.excursion.count, 1u);
  EXPECT_DOUBLE_EQ(st.excursion.mean, 1.0);
}

TEST(Episodes, StartedAboveDropsFirstDescent) {
  EpisodeTimes e;
  e.taus = {0.0, 3.0, 4.0, 5.0};
  e.started_above = true;
  const EpisodeStatistics st = episode_statistics(e);
  EXPECT_EQ(st.descent.count, 1u);
  EXPECT_DOUBLE_EQ(st.descent.mean, 1.0);
}

TEST(Occupation, AlwaysTrue) {
  const Trajectory tr = decay_path(1.0, 1.0);
  EXPECT_EQ(occupation_fraction(tr, [](const Vec&) { return true; }, 0.2), 1.0);
  EXPECT_THROW((void)occupation_fraction(tr, [](const Vec&) { return true; }, 5.0), DomainError);
}

TEST(Lemma3, ClosedForms) {
  const Lemma3Bounds a = lemma3_bounds(1.0, 1.0, 1.0, 2.0);
  EXPECT_DOUBLE_EQ(a.excursion_lower, 0.25);
  EXPECT_DOUBLE_EQ(a.descent_upper, 1.0);
  EXPECT_DOUBLE_EQ(a.occupation_upper, 0.8);
  const Lemma3Bounds b = lemma3_bounds(2.0, 1.0, 1.0, 4.0);
  EXPECT_DOUBLE_EQ(b.excursion_lower, 9.0 / 8.0);
  EXPECT_DOUBLE_EQ(b.descent_upper, 1.5);
  EXPECT_DOUBLE_EQ(b.occupation_upper, 8.0 / 14.0);
  const Lemma3Bounds c = lemma3_bounds(1.0, 1.0, 1.0, 1.0 + 1e-9);
  EXPECT_LT(c.excursion_lower, 1e-12);
  EXPECT_NEAR(c.occupation_upper, 1.0, 1e-9);
  EXPECT_THROW((void)lemma3_bounds(0.0, 1.0, 1.0, 2.0), DomainError);
  EXPECT_THROW((void)lemma3_bounds(1.0, 1.0, 2.0, 1.0), DomainError);
}
