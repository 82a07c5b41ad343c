#pragma once

#include "swpass/generator.hpp"
#include "swpass/linalg.hpp"
#include "swpass/simulate.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace swpass {

inline constexpr std::size_t kDefaultBins = 64;

/// Box-partitioned empirical probability measure. Bin weights are stored
/// flat in row-major order (last coordinate fastest); mass outside the box,
/// including diverged paths, is kept separately so the total is 1.
class HistogramMeasure {
 public:
  HistogramMeasure(Box box, std::vector<std::size_t> bins, std::vector<double> mass, double out_of_box_mass);

  [[nodiscard]] const Box& box() const { return box_; }
  [[nodiscard]] const std::vector<std::size_t>& bins() const { return bins_; }
  [[nodiscard]] const std::vector<double>& mass() const { return mass_; }
  [[nodiscard]] double out_of_box_mass() const { return out_of_box_mass_; }
  [[nodiscard]] std::size_t dim() const { return bins_.size(); }
  [[nodiscard]] std::size_t total_bins() const { return mass_.size(); }

  /// Flat bin of x; nullopt outside the box. The upper face belongs to the last bin.
  [[nodiscard]] std::optional<std::size_t> bin_of(const Vec& x) const;
  [[nodiscard]] std::vector<std::size_t> multi_index(std::size_t flat) const;
  [[nodiscard]] Vec bin_lo(std::size_t flat) const;
  [[nodiscard]] Vec bin_hi(std::size_t flat) const;
  [[nodiscard]] Vec bin_center(std::size_t flat) const;

  /// Marginal weights along one coordinate.
  [[nodiscard]] std::vector<double> marginal(std::size_t coordinate) const;

  [[nodiscard]] bool same_grid(const HistogramMeasure& other) const;

 private:
  Box box_;
  std::vector<std::size_t> bins_;
  std::vector<double> mass_;
  double out_of_box_mass_;
};

/// Integer bin counts; merging is commutative, so partial accumulators can be
/// combined in any order.
class HistogramAccumulator {
 public:
  HistogramAccumulator(Box box, std::vector<std::size_t> bins);

  void add(const Vec& x);  ///< non-finite or outside the box counts as out-of-box
  void add_out_of_box() { ++out_of_box_; }
  void merge(const HistogramAccumulator& other);
  [[nodiscard]] std::uint64_t count() const;
  [[nodiscard]] HistogramMeasure finish() const;

 private:
  HistogramMeasure grid_;
  std::vector<std::uint64_t> counts_;
  std::uint64_t out_of_box_ = 0;
};

/// Histogram of x(t) over n_paths paths from x0 (path i seeded
/// split_seed(cfg.master_seed, i)). t must lie on the dt grid and not exceed
/// cfg.t_end. Diverged paths count as out-of-box mass.
[[nodiscard]] HistogramMeasure empirical_transition_measure(const Plant& plant, const Vec& x0, double t,
                                                            std::size_t n_paths, const SimConfig& cfg,
                                                            const Box& box, const std::vector<std::size_t>& bins,
                                                            std::size_t threads = 1);

/// Time-occupation histogram of the recorded points with t >= burn_in.
[[nodiscard]] HistogramMeasure ergodic_average_measure(const Trajectory& traj, const Box& box,
                                                       const std::vector<std::size_t>& bins, double burn_in);

/// Same as ergodic_average_measure on simulate_path(plant, x0, cfg), without
/// storing the path.
[[nodiscard]] HistogramMeasure ergodic_average_measure_streaming(const Plant& plant, const Vec& x0,
                                                                 const SimConfig& cfg, const Box& box,
                                                                 const std::vector<std::size_t>& bins,
                                                                 double burn_in);

/// Sum of |mass1 - mass2| plus |oob1 - oob2|, in [0, 2]. Throws GridMismatch.
[[nodiscard]] double l1_distance(const HistogramMeasure& m1, const HistogramMeasure& m2);

struct ConvergenceTable {
  std::vector<double> times;
  /// measures[i][j]: histogram for initial state i at times[j]
  std::vector<std::vector<HistogramMeasure>> measures;
  /// successive[i][j] = L1(measures[i][j], measures[i][j+1])
  std::vector<std::vector<double>> successive;
  struct Pair {
    std::size_t a;
    std::size_t b;
    double l1;
  };
  /// pairwise L1 between initial states at the final time
  std::vector<Pair> cross_initial;
};

/// One ensemble per initial state, histogrammed at every requested time
/// (all on the dt grid, strictly increasing, at least two).
[[nodiscard]] ConvergenceTable convergence_diagnostic(const Plant& plant, const std::vector<Vec>& x0_list,
                                                      const std::vector<double>& times, std::size_t n_paths,
                                                      const SimConfig& cfg, const Box& box,
                                                      const std::vector<std::size_t>& bins,
                                                      std::size_t threads = 1);

/// k (V_B - V0) / (2 C V_B + k (V_B - V0)). Throws DomainError unless
/// V_B > V0 > 0 and k, C > 0.
[[nodiscard]] double theorem6_lower_bound(double k, double C, double V_B, double V0);

/// Sampled inf of V over box points outside the set (the box midpoint and
/// `samples` Halton points). Returns +infinity if no sample lies outside.
[[nodiscard]] double sampled_inf_outside(const StorageFunction& V, const std::function<bool(const Vec&)>& in_set,
                                         const Box& box, std::size_t samples);

/// Sampled sup of V over the closed ball (center, its boundary-inclusive
/// low-discrepancy samples).
[[nodiscard]] double sampled_sup_in_ball(const StorageFunction& V, const Vec& center, double radius,
                                         std::size_t samples, std::uint64_t seed = 0);

/// Smallest w with at least `coverage` of the samples in [center - w, center + w].
[[nodiscard]] double coverage_band(std::span<const double> samples, double center, double coverage);

/// Histogram version along one coordinate: smallest w, among distances from
/// center to bin edges, such that bins lying fully inside [center - w, center + w]
/// carry at least `coverage` mass. Infinity if the box cannot reach it.
[[nodiscard]] double coverage_band(const HistogramMeasure& measure, std::size_t coordinate, double coverage,
                                   double center);

}  // namespace swpass
