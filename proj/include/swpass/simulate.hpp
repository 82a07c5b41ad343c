#pragma once

#include "swpass/linalg.hpp"
#include "swpass/sde_core.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

namespace swpass {

struct SimConfig {
  double dt = 1e-3;
  double t_end = 1.0;
  std::uint64_t master_seed = 0;
  std::size_t record_stride = 1;
  /// Abort threshold on |x|; unset means 1e6 * (1 + |x0|).
  std::optional<double> divergence_bound;

  /// Throws ValidationError unless 0 < dt <= t_end and record_stride divides
  /// the number of steps round(t_end / dt).
  void validate() const;
  [[nodiscard]] std::size_t steps() const;
  [[nodiscard]] std::size_t records() const { return steps() / record_stride + 1; }
  [[nodiscard]] double record_dt() const { return dt * static_cast<double>(record_stride); }
  [[nodiscard]] double bound_for(const Vec& x0) const;
};

/// Recorded Euler-Maruyama path. Column i of `states` / `inputs` is the state
/// and applied input at times[i] = i * record_stride * dt.
struct Trajectory {
  std::vector<double> times;
  Mat states;  ///< n x size()
  Mat inputs;  ///< m x size()
  std::uint64_t seed = 0;
  bool diverged = false;

  [[nodiscard]] std::size_t size() const { return times.size(); }
  [[nodiscard]] Vec state(std::size_t i) const { return states.col(static_cast<Eigen::Index>(i)); }
  [[nodiscard]] double t_end() const { return times.empty() ? 0.0 : times.back(); }
};

/// Called at every recorded point with (record index, t, x, u). Returning
/// false stops the path early.
using PathObserver = std::function<bool(std::size_t, double, const Vec&, const Vec&)>;

struct PathOutcome {
  bool diverged = false;
  bool stopped = false;
  std::size_t records = 0;
};

/// Streams one Euler-Maruyama path
///   x_{k+1} = x_k + f(x_k, u_k) dt + h(x_k, u_k) sqrt(dt) xi_k,
/// xi_k i.i.d. standard normal from CounterRng(path_seed). The path stops
/// (diverged) when a state is non-finite or |x| exceeds the divergence bound;
/// that state is not reported.
PathOutcome run_path(const Plant& plant, const Vec& x0, const SimConfig& cfg, std::uint64_t path_seed,
                     const PathObserver& observer);

/// Single recorded path driven by the given per-path seed.
[[nodiscard]] Trajectory simulate_path(const Plant& plant, const Vec& x0, const SimConfig& cfg,
                                       std::uint64_t path_seed);

/// Single recorded path seeded with cfg.master_seed.
[[nodiscard]] Trajectory simulate_path(const Plant& plant, const Vec& x0, const SimConfig& cfg);

/// Runs fn(i) for i in [0, n) on `threads` workers (0 = hardware concurrency).
/// The first exception by index is rethrown after all workers finish.
void for_each_path(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& fn);

/// Path i uses split_seed(cfg.master_seed, i); output is independent of the thread count.
[[nodiscard]] std::vector<Trajectory> simulate_ensemble(const Plant& plant, const Vec& x0,
                                                        const SimConfig& cfg, std::size_t n_paths,
                                                        std::size_t threads = 1);

}  // namespace swpass
