#include "swpass/simulate.hpp"

#include "swpass/errors.hpp"
#include "swpass/rng.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <thread>

namespace swpass {

void SimConfig::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ValidationError("sim: dt must be positive and finite");
  if (!(t_end >= dt) || !std::isfinite(t_end)) throw ValidationError("sim: need dt <= t_end < infinity");
  if (record_stride < 1) throw ValidationError("sim: record_stride must be >= 1");
  const double ratio = t_end / dt;
  if (ratio > 1e12) throw ValidationError("sim: too many steps");
  if (steps() % record_stride != 0) {
    throw ValidationError("sim: record_stride must divide the step count round(t_end/dt) = " +
                          std::to_string(steps()));
  }
  if (divergence_bound && !(*divergence_bound > 0.0)) {
    throw ValidationError("sim: divergence_bound must be positive");
  }
}

std::size_t SimConfig::steps() const { return static_cast<std::size_t>(std::llround(t_end / dt)); }

double SimConfig::bound_for(const Vec& x0) const {
  return divergence_bound ? *divergence_bound : 1e6 * (1.0 + x0.norm());
}

PathOutcome run_path(const Plant& plant, const Vec& x0, const SimConfig& cfg, std::uint64_t path_seed,
                     const PathObserver& observer) {
  cfg.validate();
  const ItoSystem& sys = plant.system();
  const auto n = static_cast<Eigen::Index>(sys.n());
  const auto m = static_cast<Eigen::Index>(sys.m());
  const auto r = static_cast<Eigen::Index>(sys.r());
  if (x0.size() != n) throw DimensionMismatch("simulate: x0 has wrong dimension");
  if (!x0.allFinite()) throw NonFinite("simulate: x0 is not finite");

  const std::size_t steps = cfg.steps();
  const double dt = cfg.dt;
  const double sqrt_dt = std::sqrt(dt);
  const double bound = cfg.bound_for(x0);
  const double bound_sq = bound * bound;

  CounterRng rng(path_seed);
  Vec x = x0;
  Vec u(m);
  Vec f(n);
  Mat h(n, r);
  Vec dw(r);

  PathOutcome out;
  for (std::size_t k = 0;; ++k) {
    plant.fields(x, u, f, h);
    if (k % cfg.record_stride == 0) {
      ++out.records;
      if (observer && !observer(k / cfg.record_stride, static_cast<double>(k) * dt, x, u)) {
        out.stopped = true;
        return out;
      }
    }
    if (k == steps) break;
    for (Eigen::Index j = 0; j < r; ++j) dw(j) = sqrt_dt * rng.normal();
    double sq = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      double xi = x(i) + dt * f(i);
      for (Eigen::Index j = 0; j < r; ++j) xi += h(i, j) * dw(j);
      x(i) = xi;
      sq += xi * xi;
    }
    if (!(sq <= bound_sq)) {
      out.diverged = true;
      return out;
    }
  }
  return out;
}

Trajectory simulate_path(const Plant& plant, const Vec& x0, const SimConfig& cfg, std::uint64_t path_seed) {
  cfg.validate();
  const auto n = static_cast<Eigen::Index>(plant.system().n());
  const auto m = static_cast<Eigen::Index>(plant.system().m());
  const auto capacity = static_cast<Eigen::Index>(cfg.records());

  Trajectory traj;
  traj.seed = path_seed;
  traj.times.reserve(static_cast<std::size_t>(capacity));
  traj.states.resize(n, capacity);
  traj.inputs.resize(m, capacity);
  const PathOutcome outcome =
      run_path(plant, x0, cfg, path_seed, [&](std::size_t i, double t, const Vec& x, const Vec& u) {
        traj.times.push_back(t);
        traj.states.col(static_cast<Eigen::Index>(i)) = x;
        traj.inputs.col(static_cast<Eigen::Index>(i)) = u;
        return true;
      });
  traj.diverged = outcome.diverged;
  const auto count = static_cast<Eigen::Index>(traj.times.size());
  if (count != capacity) {
    traj.states.conservativeResize(n, count);
    traj.inputs.conservativeResize(m, count);
  }
  return traj;
}

Trajectory simulate_path(const Plant& plant, const Vec& x0, const SimConfig& cfg) {
  return simulate_path(plant, x0, cfg, cfg.master_seed);
}

void for_each_path(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& fn) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, std::max<std::size_t>(n, 1));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(threads);
  std::vector<std::size_t> error_index(threads, n);
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (std::size_t w = 0; w < threads; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += threads) {
        try {
          fn(i);
        } catch (...) {
          errors[w] = std::current_exception();
          error_index[w] = i;
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  std::size_t first = threads;
  for (std::size_t w = 0; w < threads; ++w) {
    if (errors[w] && (first == threads || error_index[w] < error_index[first])) first = w;
  }
  if (first != threads) std::rethrow_exception(errors[first]);
}

std::vector<Trajectory> simulate_ensemble(const Plant& plant, const Vec& x0, const SimConfig& cfg,
                                          std::size_t n_paths, std::size_t threads) {
  if (n_paths < 1) throw ValidationError("ensemble: n_paths must be >= 1");
  cfg.validate();
  std::vector<Trajectory> paths(n_paths);
  for_each_path(n_paths, threads, [&](std::size_t i) {
    paths[i] = simulate_path(plant, x0, cfg, split_seed(cfg.master_seed, i));
  });
  return paths;
}

}  // namespace swpass
