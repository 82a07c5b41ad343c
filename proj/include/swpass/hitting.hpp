#pragma once

#include "swpass/generator.hpp"
#include "swpass/linalg.hpp"
#include "swpass/simulate.hpp"

#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

namespace swpass {

/// Level sets {V >= V2}, {V <= V1} and a target ball for first passages.
struct HittingConfig {
  double V1 = 1.0;
  double V2 = 2.0;
  Vec ball_center;
  double ball_radius = 1.0;
  std::size_t max_episodes = std::numeric_limits<std::size_t>::max();

  void validate() const;
};

/// First recorded time with |x(t) - center| <= radius; nullopt if never.
/// Grid resolution only: reported times carry an O(dt) bias.
[[nodiscard]] std::optional<double> first_passage(const Trajectory& traj, const Vec& center, double radius);

struct RecurrenceEstimate {
  double mean = 0.0;   ///< over paths that hit before t_end
  double ci95 = 0.0;   ///< 1.96 standard errors
  double bound = 0.0;  ///< V(x0) / k
  std::size_t hits = 0;
  std::size_t censored = 0;  ///< paths that never hit (excluded from the mean)
  bool violated = false;     ///< mean - ci95 > bound
};

/// Monte Carlo mean first-passage time into the ball versus the bound V(x0)/k.
/// Paths stop at their first hit. Throws DomainError unless k > 0.
[[nodiscard]] RecurrenceEstimate mean_recurrence_estimate(const Plant& plant, const StorageFunction& V,
                                                          double k, const Vec& x0, const Vec& center,
                                                          double radius, std::size_t n_paths,
                                                          const SimConfig& cfg, std::size_t threads = 1);

/// Alternating hitting times: even entries are first times with V >= V2,
/// odd entries the following first times with V <= V1. Scanning starts at
/// the initial time; if V(x(0)) >= V2 then tau_0 = 0 and `started_above` is set.
struct EpisodeTimes {
  std::vector<double> taus;
  bool started_above = false;

  [[nodiscard]] std::size_t complete_episodes() const { return taus.size() / 2; }
};

/// Streaming form of alternating_hitting_times.
class EpisodeScanner {
 public:
  EpisodeScanner(double V1, double V2, std::size_t max_episodes = std::numeric_limits<std::size_t>::max());

  /// Feeds the storage value at time t; returns false once max_episodes
  /// complete (even, odd) pairs have been recorded.
  bool observe(double t, double v);

  [[nodiscard]] const EpisodeTimes& times() const { return times_; }

 private:
  double V1_;
  double V2_;
  std::size_t max_episodes_;
  bool seeking_high_ = true;
  bool first_ = true;
  EpisodeTimes times_;
};

[[nodiscard]] EpisodeTimes alternating_hitting_times(
    const Trajectory& traj, const StorageFunction& V, double V1, double V2,
    std::size_t max_episodes = std::numeric_limits<std::size_t>::max());

struct DurationStats {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t count = 0;
};

struct EpisodeStatistics {
  DurationStats excursion;  ///< tau_{2i} - tau_{2i-1}, i >= 1 (low set back to V >= V2)
  DurationStats descent;    ///< tau_{2i-1} - tau_{2i-2}, i >= 1 (V >= V2 down to V <= V1)
};

/// Means and standard errors of the episode durations. When the path started
/// inside {V >= V2} the first descent is excluded.
[[nodiscard]] EpisodeStatistics episode_statistics(const EpisodeTimes& episodes);

/// Time fraction of recorded points with t >= burn_in whose state satisfies
/// the predicate. Throws DomainError unless burn_in < t_end.
[[nodiscard]] double occupation_fraction(const Trajectory& traj, const std::function<bool(const Vec&)>& indicator,
                                         double burn_in);

struct Lemma3Bounds {
  double excursion_lower = 0.0;   ///< (V2 - V1)^2 / (2 C V2)
  double descent_upper = 0.0;     ///< (V2 - V1) / k
  double occupation_upper = 0.0;  ///< 2 C V2 / (2 C V2 + k (V2 - V1))
};

/// Throws DomainError on nonpositive k, C, V1 or V2 <= V1.
[[nodiscard]] Lemma3Bounds lemma3_bounds(double k, double C, double V1, double V2);

}  // namespace swpass
