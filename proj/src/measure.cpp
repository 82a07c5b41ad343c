#include "swpass/measure.hpp"

#include "swpass/errors.hpp"
#include "swpass/rng.hpp"
#include "swpass/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace swpass {

namespace {

constexpr double kMassTol = 1e-12;

std::size_t grid_step_index(double t, double dt) {
  const double ratio = t / dt;
  const auto k = static_cast<std::size_t>(std::llround(ratio));
  if (!(t > 0.0) || std::abs(ratio - static_cast<double>(k)) > 1e-6) {
    throw ValidationError("measure: time " + std::to_string(t) + " is not a positive multiple of dt");
  }
  return k;
}

}  // namespace

HistogramMeasure::HistogramMeasure(Box box, std::vector<std::size_t> bins, std::vector<double> mass,
                                   double out_of_box_mass)
    : box_(std::move(box)), bins_(std::move(bins)), mass_(std::move(mass)), out_of_box_mass_(out_of_box_mass) {
  validate_box(box_, "histogram");
  if (bins_.size() != box_.dim()) throw DimensionMismatch("histogram: one bin count per box dimension");
  std::size_t total = 1;
  for (std::size_t b : bins_) {
    if (b < 1) throw DomainError("histogram: bin counts must be >= 1");
    total *= b;
  }
  if (mass_.size() != total) throw DimensionMismatch("histogram: mass vector has wrong length");
  double sum = out_of_box_mass_;
  for (double w : mass_) {
    if (!(w >= 0.0)) throw DomainError("histogram: weights must be nonnegative");
    sum += w;
  }
  if (!(out_of_box_mass_ >= 0.0) || std::abs(sum - 1.0) > kMassTol) {
    throw DomainError("histogram: total mass must be 1");
  }
}

std::optional<std::size_t> HistogramMeasure::bin_of(const Vec& x) const {
  if (static_cast<std::size_t>(x.size()) != dim()) throw DimensionMismatch("histogram: point has wrong dimension");
  std::size_t flat = 0;
  for (std::size_t d = 0; d < dim(); ++d) {
    const auto i = static_cast<Eigen::Index>(d);
    const double lo = box_.lo(i);
    const double hi = box_.hi(i);
    if (!(x(i) >= lo && x(i) <= hi)) return std::nullopt;
    auto b = static_cast<std::size_t>((x(i) - lo) / (hi - lo) * static_cast<double>(bins_[d]));
    b = std::min(b, bins_[d] - 1);
    flat = flat * bins_[d] + b;
  }
  return flat;
}

std::vector<std::size_t> HistogramMeasure::multi_index(std::size_t flat) const {
  std::vector<std::size_t> idx(dim());
  for (std::size_t d = dim(); d-- > 0;) {
    idx[d] = flat % bins_[d];
    flat /= bins_[d];
  }
  return idx;
}

Vec HistogramMeasure::bin_lo(std::size_t flat) const {
  const auto idx = multi_index(flat);
  Vec lo(static_cast<Eigen::Index>(dim()));
  for (std::size_t d = 0; d < dim(); ++d) {
    const auto i = static_cast<Eigen::Index>(d);
    const double width = (box_.hi(i) - box_.lo(i)) / static_cast<double>(bins_[d]);
    lo(i) = box_.lo(i) + static_cast<double>(idx[d]) * width;
  }
  return lo;
}

Vec HistogramMeasure::bin_hi(std::size_t flat) const {
  const auto idx = multi_index(flat);
  Vec hi(static_cast<Eigen::Index>(dim()));
  for (std::size_t d = 0; d < dim(); ++d) {
    const auto i = static_cast<Eigen::Index>(d);
    const double width = (box_.hi(i) - box_.lo(i)) / static_cast<double>(bins_[d]);
    hi(i) = idx[d] + 1 == bins_[d] ? box_.hi(i) : box_.lo(i) + static_cast<double>(idx[d] + 1) * width;
  }
  return hi;
}

Vec HistogramMeasure::bin_center(std::size_t flat) const { return 0.5 * (bin_lo(flat) + bin_hi(flat)); }

std::vector<double> HistogramMeasure::marginal(std::size_t coordinate) const {
  if (coordinate >= dim()) throw DimensionMismatch("histogram: coordinate out of range");
  std::vector<double> out(bins_[coordinate], 0.0);
  for (std::size_t f = 0; f < mass_.size(); ++f) out[multi_index(f)[coordinate]] += mass_[f];
  return out;
}

bool HistogramMeasure::same_grid(const HistogramMeasure& other) const {
  return bins_ == other.bins_ && box_.lo == other.box_.lo && box_.hi == other.box_.hi;
}

namespace {

HistogramMeasure empty_grid(Box box, std::vector<std::size_t> bins) {
  std::size_t total = 1;
  for (std::size_t b : bins) total *= std::max<std::size_t>(b, 1);
  return HistogramMeasure(std::move(box), std::move(bins), std::vector<double>(total, 0.0), 1.0);
}

}  // namespace

HistogramAccumulator::HistogramAccumulator(Box box, std::vector<std::size_t> bins)
    : grid_(empty_grid(std::move(box), std::move(bins))), counts_(grid_.total_bins(), 0) {}

void HistogramAccumulator::add(const Vec& x) {
  if (!x.allFinite()) {
    ++out_of_box_;
    return;
  }
  if (const auto b = grid_.bin_of(x)) {
    ++counts_[*b];
  } else {
    ++out_of_box_;
  }
}

void HistogramAccumulator::merge(const HistogramAccumulator& other) {
  if (!grid_.same_grid(other.grid_)) throw GridMismatch("histogram merge: grids differ");
  for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
  out_of_box_ += other.out_of_box_;
}

std::uint64_t HistogramAccumulator::count() const {
  return std::accumulate(counts_.begin(), counts_.end(), out_of_box_);
}

HistogramMeasure HistogramAccumulator::finish() const {
  const std::uint64_t total = count();
  if (total == 0) throw DomainError("histogram: no samples");
  const double inv = 1.0 / static_cast<double>(total);
  std::vector<double> mass(counts_.size());
  for (std::size_t i = 0; i < counts_.size(); ++i) mass[i] = static_cast<double>(counts_[i]) * inv;
  // Out-of-box mass is the complement so the total is 1 to rounding.
  double inside = 0.0;
  for (double w : mass) inside += w;
  const double oob = out_of_box_ == 0 ? 0.0 : std::max(0.0, 1.0 - inside);
  return HistogramMeasure(grid_.box(), grid_.bins(), std::move(mass), oob);
}

HistogramMeasure empirical_transition_measure(const Plant& plant, const Vec& x0, double t, std::size_t n_paths,
                                              const SimConfig& cfg, const Box& box,
                                              const std::vector<std::size_t>& bins, std::size_t threads) {
  cfg.validate();
  if (n_paths < 1) throw ValidationError("transition measure: n_paths must be >= 1");
  if (t > cfg.t_end + 1e-12 * std::max(1.0, cfg.t_end)) throw DomainError("transition measure: t > t_end");
  const std::size_t k = grid_step_index(t, cfg.dt);

  SimConfig local = cfg;
  local.t_end = static_cast<double>(k) * cfg.dt;
  local.record_stride = k;
  const auto n = static_cast<Eigen::Index>(plant.system().n());
  Mat finals = Mat::Constant(n, static_cast<Eigen::Index>(n_paths), std::nan(""));
  for_each_path(n_paths, threads, [&](std::size_t i) {
    run_path(plant, x0, local, split_seed(cfg.master_seed, i), [&](std::size_t rec, double, const Vec& x, const Vec&) {
      if (rec == 1) finals.col(static_cast<Eigen::Index>(i)) = x;
      return true;
    });
  });

  HistogramAccumulator acc(box, bins);
  for (Eigen::Index i = 0; i < finals.cols(); ++i) acc.add(finals.col(i));
  return acc.finish();
}

HistogramMeasure ergodic_average_measure(const Trajectory& traj, const Box& box, const std::vector<std::size_t>& bins,
                                         double burn_in) {
  if (!(burn_in < traj.t_end())) throw DomainError("ergodic measure: burn_in must be < t_end");
  HistogramAccumulator acc(box, bins);
  for (std::size_t i = 0; i < traj.size(); ++i) {
    if (traj.times[i] >= burn_in) acc.add(traj.state(i));
  }
  return acc.finish();
}

HistogramMeasure ergodic_average_measure_streaming(const Plant& plant, const Vec& x0, const SimConfig& cfg,
                                                   const Box& box, const std::vector<std::size_t>& bins,
                                                   double burn_in) {
  cfg.validate();
  if (!(burn_in < cfg.t_end)) throw DomainError("ergodic measure: burn_in must be < t_end");
  HistogramAccumulator acc(box, bins);
  run_path(plant, x0, cfg, cfg.master_seed, [&](std::size_t, double t, const Vec& x, const Vec&) {
    if (t >= burn_in) acc.add(x);
    return true;
  });
  return acc.finish();
}

double l1_distance(const HistogramMeasure& m1, const HistogramMeasure& m2) {
  if (!m1.same_grid(m2)) throw GridMismatch("l1_distance: measures use different grids");
  double d = std::abs(m1.out_of_box_mass() - m2.out_of_box_mass());
  for (std::size_t i = 0; i < m1.total_bins(); ++i) d += std::abs(m1.mass()[i] - m2.mass()[i]);
  return std::min(d, 2.0);
}

ConvergenceTable convergence_diagnostic(const Plant& plant, const std::vector<Vec>& x0_list,
                                        const std::vector<double>& times, std::size_t n_paths, const SimConfig& cfg,
                                        const Box& box, const std::vector<std::size_t>& bins, std::size_t threads) {
  cfg.validate();
  if (x0_list.empty()) throw ValidationError("convergence: need at least one initial state");
  if (times.size() < 2) throw ValidationError("convergence: need at least two times");
  if (n_paths < 1) throw ValidationError("convergence: n_paths must be >= 1");
  std::vector<std::size_t> steps;
  for (double t : times) {
    if (t == 0.0) {
      steps.push_back(0);
    } else {
      steps.push_back(grid_step_index(t, cfg.dt));
    }
    if (steps.size() > 1 && steps.back() <= steps[steps.size() - 2]) {
      throw ValidationError("convergence: times must be strictly increasing");
    }
  }
  SimConfig local = cfg;
  local.t_end = static_cast<double>(std::max<std::size_t>(steps.back(), 1)) * cfg.dt;
  local.record_stride = 1;

  const auto n = static_cast<Eigen::Index>(plant.system().n());
  const std::size_t nt = times.size();
  ConvergenceTable table;
  table.times = times;
  for (const Vec& x0 : x0_list) {
    // states[j] holds column i = path i at times[j]; NaN marks divergence.
    std::vector<Mat> states(nt, Mat::Constant(n, static_cast<Eigen::Index>(n_paths), std::nan("")));
    for_each_path(n_paths, threads, [&](std::size_t i) {
      std::size_t next = 0;
      run_path(plant, x0, local, split_seed(cfg.master_seed, i), [&](std::size_t k, double, const Vec& x, const Vec&) {
        while (next < nt && steps[next] == k) {
          states[next].col(static_cast<Eigen::Index>(i)) = x;
          ++next;
        }
        return next < nt;
      });
    });
    std::vector<HistogramMeasure> row;
    for (std::size_t j = 0; j < nt; ++j) {
      HistogramAccumulator acc(box, bins);
      for (Eigen::Index i = 0; i < states[j].cols(); ++i) acc.add(states[j].col(i));
      row.push_back(acc.finish());
    }
    std::vector<double> succ;
    for (std::size_t j = 0; j + 1 < nt; ++j) succ.push_back(l1_distance(row[j], row[j + 1]));
    table.successive.push_back(std::move(succ));
    table.measures.push_back(std::move(row));
  }
  for (std::size_t a = 0; a < x0_list.size(); ++a) {
    for (std::size_t b = a + 1; b < x0_list.size(); ++b) {
      table.cross_initial.push_back({a, b, l1_distance(table.measures[a].back(), table.measures[b].back())});
    }
  }
  return table;
}

double theorem6_lower_bound(double k, double C, double V_B, double V0) {
  if (!(k > 0.0) || !(C > 0.0) || !std::isfinite(k) || !std::isfinite(C)) {
    throw DomainError("invariant-measure bound: k and C must be positive");
  }
  if (!(V0 > 0.0) || !(V_B > V0) || !std::isfinite(V_B)) {
    throw DomainError("invariant-measure bound: need V_B > V0 > 0");
  }
  const double gap = k * (V_B - V0);
  return gap / (2.0 * C * V_B + gap);
}

double sampled_inf_outside(const StorageFunction& V, const std::function<bool(const Vec&)>& in_set, const Box& box,
                           std::size_t samples) {
  validate_box(box, "sampled_inf_outside");
  double best = std::numeric_limits<double>::infinity();
  auto visit = [&](const Vec& x) {
    if (!in_set(x)) best = std::min(best, V.value(x));
  };
  visit(box.center());
  for (std::size_t i = 0; i < samples; ++i) visit(box_point(box, i));
  return best;
}

double sampled_sup_in_ball(const StorageFunction& V, const Vec& center, double radius, std::size_t samples,
                           std::uint64_t seed) {
  if (!(radius > 0.0)) throw DomainError("sampled_sup_in_ball: radius must be positive");
  const AnnulusSampler sampler(center, 0.0, radius, seed);
  double best = V.value(center);
  for (std::size_t i = 0; i < samples; ++i) {
    // Each sampled direction is also evaluated on the bounding sphere.
    const Vec x = sampler.point(i);
    best = std::max(best, V.value(x));
    const Vec d = x - center;
    const double r = d.norm();
    if (r > 0.0) best = std::max(best, V.value(center + (radius / r) * d));
  }
  return best;
}

double coverage_band(std::span<const double> samples, double center, double coverage) {
  if (samples.empty()) throw DomainError("coverage_band: no samples");
  if (!(coverage > 0.0 && coverage < 1.0)) throw DomainError("coverage_band: coverage must be in (0, 1)");
  std::vector<double> d(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) d[i] = std::abs(samples[i] - center);
  const auto need = static_cast<std::size_t>(std::ceil(coverage * static_cast<double>(d.size()) - 1e-9));
  const std::size_t idx = std::clamp<std::size_t>(need, 1, d.size()) - 1;
  std::nth_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(idx), d.end());
  return d[idx];
}

double coverage_band(const HistogramMeasure& measure, std::size_t coordinate, double coverage, double center) {
  if (!(coverage > 0.0 && coverage < 1.0)) throw DomainError("coverage_band: coverage must be in (0, 1)");
  const std::vector<double> marg = measure.marginal(coordinate);
  const auto c = static_cast<Eigen::Index>(coordinate);
  const double lo = measure.box().lo(c);
  const double hi = measure.box().hi(c);
  const double width = (hi - lo) / static_cast<double>(marg.size());
  auto edge = [&](std::size_t i) { return i == marg.size() ? hi : lo + static_cast<double>(i) * width; };

  std::vector<double> candidates;
  for (std::size_t i = 0; i <= marg.size(); ++i) candidates.push_back(std::abs(edge(i) - center));
  std::sort(candidates.begin(), candidates.end());
  for (double w : candidates) {
    double inside = 0.0;
    for (std::size_t i = 0; i < marg.size(); ++i) {
      if (edge(i) >= center - w - 1e-12 * width && edge(i + 1) <= center + w + 1e-12 * width) inside += marg[i];
    }
    if (inside >= coverage) return w;
  }
  return std::numeric_limits<double>::infinity();
}

}  // namespace swpass
