#include "swpass/hitting.hpp"

#include "swpass/errors.hpp"
#include "swpass/rng.hpp"

#include <cmath>

namespace swpass {

void HittingConfig::validate() const {
  if (!(V1 > 0.0) || !(V2 > V1) || !std::isfinite(V2)) throw DomainError("hitting: need 0 < V1 < V2");
  if (!(ball_radius > 0.0)) throw DomainError("hitting: ball_radius must be positive");
  if (max_episodes < 1) throw DomainError("hitting: max_episodes must be >= 1");
}

std::optional<double> first_passage(const Trajectory& traj, const Vec& center, double radius) {
  if (traj.size() > 0 && center.size() != traj.states.rows()) {
    throw DimensionMismatch("first_passage: center has wrong dimension");
  }
  for (std::size_t i = 0; i < traj.size(); ++i) {
    if ((traj.states.col(static_cast<Eigen::Index>(i)) - center).norm() <= radius) return traj.times[i];
  }
  return std::nullopt;
}

namespace {

DurationStats summarize(const std::vector<double>& d) {
  DurationStats s;
  s.count = d.size();
  if (d.empty()) return s;
  double sum = 0.0;
  for (double v : d) sum += v;
  s.mean = sum / static_cast<double>(d.size());
  if (d.size() > 1) {
    double ss = 0.0;
    for (double v : d) ss += (v - s.mean) * (v - s.mean);
    s.std_error = std::sqrt(ss / static_cast<double>(d.size() - 1) / static_cast<double>(d.size()));
  }
  return s;
}

}  // namespace

RecurrenceEstimate mean_recurrence_estimate(const Plant& plant, const StorageFunction& V, double k, const Vec& x0,
                                            const Vec& center, double radius, std::size_t n_paths,
                                            const SimConfig& cfg, std::size_t threads) {
  if (!(k > 0.0)) throw DomainError("recurrence: drift rate k must be positive");
  if (!(radius > 0.0)) throw DomainError("recurrence: radius must be positive");
  if (n_paths < 1) throw ValidationError("recurrence: n_paths must be >= 1");
  if (center.size() != x0.size()) throw DimensionMismatch("recurrence: center has wrong dimension");
  cfg.validate();

  std::vector<double> times(n_paths, std::nan(""));
  for_each_path(n_paths, threads, [&](std::size_t i) {
    run_path(plant, x0, cfg, split_seed(cfg.master_seed, i), [&](std::size_t, double t, const Vec& x, const Vec&) {
      if ((x - center).norm() <= radius) {
        times[i] = t;
        return false;
      }
      return true;
    });
  });

  std::vector<double> hit;
  hit.reserve(n_paths);
  for (double t : times) {
    if (std::isfinite(t)) hit.push_back(t);
  }
  RecurrenceEstimate est;
  est.bound = V.value(x0) / k;
  est.hits = hit.size();
  est.censored = n_paths - hit.size();
  if (hit.empty()) {
    est.mean = std::nan("");
    est.ci95 = std::nan("");
    return est;
  }
  const DurationStats s = summarize(hit);
  est.mean = s.mean;
  est.ci95 = 1.96 * s.std_error;
  est.violated = est.mean - est.ci95 > est.bound;
  return est;
}

EpisodeScanner::EpisodeScanner(double V1, double V2, std::size_t max_episodes)
    : V1_(V1), V2_(V2), max_episodes_(max_episodes) {
  if (!(V1_ < V2_)) throw DomainError("episodes: need V1 < V2");
}

bool EpisodeScanner::observe(double t, double v) {
  if (times_.complete_episodes() >= max_episodes_) return false;
  if (seeking_high_) {
    if (v >= V2_) {
      if (first_) times_.started_above = true;
      times_.taus.push_back(t);
      seeking_high_ = false;
    }
  } else if (v <= V1_) {
    times_.taus.push_back(t);
    seeking_high_ = true;
  }
  first_ = false;
  return times_.complete_episodes() < max_episodes_;
}

EpisodeTimes alternating_hitting_times(const Trajectory& traj, const StorageFunction& V, double V1, double V2,
                                       std::size_t max_episodes) {
  EpisodeScanner scanner(V1, V2, max_episodes);
  for (std::size_t i = 0; i < traj.size(); ++i) {
    if (!scanner.observe(traj.times[i], V.value(traj.state(i)))) break;
  }
  return scanner.times();
}

EpisodeStatistics episode_statistics(const EpisodeTimes& episodes) {
  std::vector<double> excursion;
  std::vector<double> descent;
  const auto& tau = episodes.taus;
  for (std::size_t j = 1; j < tau.size(); ++j) {
    const double d = tau[j] - tau[j - 1];
    if (j % 2 == 1) {
      if (j == 1 && episodes.started_above) continue;
      descent.push_back(d);
    } else {
      excursion.push_back(d);
    }
  }
  return {summarize(excursion), summarize(descent)};
}

double occupation_fraction(const Trajectory& traj, const std::function<bool(const Vec&)>& indicator,
                           double burn_in) {
  if (!(burn_in < traj.t_end())) throw DomainError("occupation: burn_in must be < t_end");
  std::size_t in = 0;
  std::size_t total = 0;
  for (std::size_t i = 0; i < traj.size(); ++i) {
    if (traj.times[i] < burn_in) continue;
    ++total;
    if (indicator(traj.state(i))) ++in;
  }
  return total == 0 ? 0.0 : static_cast<double>(in) / static_cast<double>(total);
}

Lemma3Bounds lemma3_bounds(double k, double C, double V1, double V2) {
  if (!(k > 0.0) || !(C > 0.0) || !(V1 > 0.0) || !(V2 > V1) || !std::isfinite(k) || !std::isfinite(C) ||
      !std::isfinite(V2)) {
    throw DomainError("lemma3_bounds: need k, C, V1 > 0 and V2 > V1");
  }
  const double gap = V2 - V1;
  return {gap * gap / (2.0 * C * V2), gap / k, 2.0 * C * V2 / (2.0 * C * V2 + k * gap)};
}

}  // namespace swpass
