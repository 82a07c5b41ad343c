#include "swpass/cstr.hpp"

#include "swpass/errors.hpp"
#include "swpass/rng.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace swpass {

void CstrParams::validate() const {
  if (!(k > 0.0) || !std::isfinite(k)) throw DomainError("cstr: k must be positive");
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw DomainError("cstr: sigma must be positive");
  if (!(x1_dag > 0.0) || !(x1_dag < c_in) || !std::isfinite(c_in)) {
    throw DomainError("cstr: need 0 < x1_dag < c_in");
  }
  if (!(q0 >= 0.0) || !std::isfinite(q0)) throw DomainError("cstr: q0 must be nonnegative");
}

Vec CstrParams::desired_state() const { return (Vec(2) << x1_dag, c_in - x1_dag).finished(); }

namespace {

Box cstr_box(const CstrParams& p) { return {Vec::Zero(2), Vec::Constant(2, p.c_in)}; }

}  // namespace

ItoSystem build_cstr(const CstrParams& p) {
  p.validate();
  return ItoSystem(
      "cstr_raw", {2, 1, 1},
      [p](const Vec& x, const Vec& q, Vec& f) {
        f(0) = -p.k * x(0) + (p.c_in - x(0)) * q(0);
        f(1) = p.k * x(0) - x(1) * q(0);
      },
      [p](const Vec& x, const Vec&, Mat& h) {
        h(0, 0) = -p.sigma * x(0);
        h(1, 0) = p.sigma * x(0);
      },
      [p](const Vec& x, const Vec&, Vec& y) { y(0) = (x(0) - p.x1_dag) * (p.c_in - x(0)); }, false, cstr_box(p));
}

ItoSystem build_cstr_io(const CstrParams& p) {
  p.validate();
  const double qe = p.equilibrium_flow();
  return ItoSystem(
      "cstr", {2, 1, 1},
      [p, qe](const Vec& x, const Vec& u, Vec& f) {
        f(0) = -p.k * x(0) + qe * (p.c_in - x(0)) + (p.c_in - x(0)) * u(0);
        f(1) = p.k * x(0) - qe * x(1) - x(1) * u(0);
      },
      [p](const Vec& x, const Vec&, Mat& h) {
        h(0, 0) = -p.sigma * x(0);
        h(1, 0) = p.sigma * x(0);
      },
      [p](const Vec& x, const Vec&, Vec& y) { y(0) = (x(0) - p.x1_dag) * (p.c_in - x(0)); }, false, cstr_box(p));
}

AffineDecomposition cstr_decomposition() {
  AffineDecomposition map;
  map.T = (Mat(2, 2) << 1.0, 0.0, 1.0, 1.0).finished();
  map.b = Vec::Zero(2);
  map.n1 = 1;
  return map;
}

Decomposition build_cstr_subsystem(const CstrParams& p) {
  const Box sub{Vec::Zero(1), Vec::Constant(1, p.c_in)};
  return build_decomposition(build_cstr_io(p), cstr_decomposition(), Vec::Constant(1, p.c_in), sub);
}

StorageFunction cstr_storage(const CstrParams& p) {
  return StorageFunction::quadratic(Mat::Identity(1, 1), Vec::Constant(1, p.x1_dag));
}

CstrRadius cstr_delta_and_radius(const CstrParams& p) {
  p.validate();
  CstrRadius out;
  out.delta = p.k * p.c_in / (2.0 * (p.c_in - p.x1_dag));
  const double s2 = p.sigma * p.sigma;
  if (!(2.0 * out.delta > s2)) throw DomainError("cstr: passive radius needs 2 delta > sigma^2");
  out.R = (s2 + p.sigma * std::sqrt(2.0 * out.delta)) / (2.0 * out.delta - s2) * p.x1_dag;
  out.epsilon_max = std::min(p.x1_dag - out.R, p.c_in - out.R - p.x1_dag);
  return out;
}

void CstrExperimentConfig::validate() const {
  params.validate();
  sim.validate();
  if (gain && !(*gain > 0.0)) throw DomainError("cstr experiment: gain must be positive");
  if (x0.size() != 2 || !x0.allFinite()) throw DimensionMismatch("cstr experiment: x0 must be a finite 2-vector");
  if (std::abs(x0(0) + x0(1) - params.c_in) > 1e-9 * params.c_in) {
    throw DomainError("cstr experiment: x0 must lie on the manifold x1 + x2 = c_in");
  }
  if (!(burn_in >= 0.0) || !(burn_in < sim.t_end)) throw DomainError("cstr experiment: need 0 <= burn_in < t_end");
  if (ensemble_paths < 1) throw DomainError("cstr experiment: ensemble_paths must be >= 1");
  if (snapshot_times.size() < 2) throw DomainError("cstr experiment: need at least two snapshot times");
  if (!(sample_path_t_end >= sim.dt)) throw DomainError("cstr experiment: sample_path_t_end must be >= dt");
  if (sample_path_stride < 1) throw DomainError("cstr experiment: sample_path_stride must be >= 1");
  if (!(sub_lo < sub_hi)) throw DomainError("cstr experiment: need sub_lo < sub_hi");
  if (bins < 1) throw DomainError("cstr experiment: bins must be >= 1");
  if (!(coverage > 0.0 && coverage < 1.0)) throw DomainError("cstr experiment: coverage must be in (0, 1)");
  if (band_batches < 2) throw DomainError("cstr experiment: band_batches must be >= 2");
  if (scan_samples < 1) throw DomainError("cstr experiment: scan_samples must be >= 1");
  if (theorem6_set_radius && !(*theorem6_set_radius > 0.0)) {
    throw DomainError("cstr experiment: theorem6_set_radius must be positive");
  }
}

namespace {

BandEstimate band_with_batches(const std::vector<double>& samples, double center, double coverage,
                               std::size_t batches) {
  BandEstimate est;
  est.center = center;
  est.samples = samples.size();
  if (samples.empty()) throw DomainError("cstr experiment: no samples after burn-in");
  est.half_width = coverage_band(samples, center, coverage);
  const std::size_t per = samples.size() / batches;
  if (per == 0) return est;
  std::vector<double> widths;
  for (std::size_t b = 0; b < batches; ++b) {
    const std::span<const double> chunk(samples.data() + b * per, per);
    widths.push_back(coverage_band(chunk, center, coverage));
  }
  double mean = 0.0;
  for (double w : widths) mean += w;
  mean /= static_cast<double>(widths.size());
  double ss = 0.0;
  for (double w : widths) ss += (w - mean) * (w - mean);
  est.std_error = std::sqrt(ss / static_cast<double>(widths.size() - 1) / static_cast<double>(widths.size()));
  return est;
}

template <class S>
Plant make_plant(const S& system, const CstrExperimentConfig& cfg, double open_input) {
  if (cfg.gain) return Plant(close_loop(system, FeedbackLaw::scalar(*cfg.gain)));
  return Plant(system, Vec::Constant(1, open_input));
}

}  // namespace

CstrExperimentResult run_cstr_experiment(const CstrExperimentConfig& cfg, std::size_t threads) {
  cfg.validate();
  const CstrParams& p = cfg.params;
  CstrExperimentResult res;
  res.radius = cstr_delta_and_radius(p);
  {
    std::ostringstream os;
    if (cfg.gain) {
      os << "K=" << *cfg.gain;
    } else {
      os << "none";
    }
    res.controller = os.str();
  }
  res.applied_open_loop_input =
      cfg.uncontrolled_flow == UncontrolledFlow::listed_q0 ? p.q0 - p.equilibrium_flow() : 0.0;

  const Decomposition decomp = build_cstr_subsystem(p);
  const ItoSystem full = build_cstr_io(p);
  const Plant sub_plant = make_plant(decomp.subsystem, cfg, res.applied_open_loop_input);
  const Plant full_plant = make_plant(full, cfg, res.applied_open_loop_input);
  const StorageFunction V = cstr_storage(p);
  const Vec xbar0 = Vec::Constant(1, cfg.x0(0));
  const double x2_dag = p.c_in - p.x1_dag;

  // Long subsystem path: bands for x1, ergodic histogram, occupation of B.
  const double r_shell = res.radius.R;
  const double r_set = cfg.theorem6_set_radius.value_or(2.0 * r_shell);
  const Box sub_box{Vec::Constant(1, cfg.sub_lo), Vec::Constant(1, cfg.sub_hi)};
  HistogramAccumulator ergodic(sub_box, {cfg.bins});
  std::vector<double> x1_samples;
  x1_samples.reserve(cfg.sim.records());
  std::size_t in_set = 0;
  SimConfig sub_sim = cfg.sim;
  sub_sim.master_seed = split_seed(cfg.sim.master_seed, 0);
  const PathOutcome sub_out =
      run_path(sub_plant, xbar0, sub_sim, sub_sim.master_seed, [&](std::size_t, double t, const Vec& x, const Vec&) {
        if (t >= cfg.burn_in) {
          ergodic.add(x);
          x1_samples.push_back(x(0));
          if (std::abs(x(0) - p.x1_dag) < r_set) ++in_set;
        }
        return true;
      });
  if (sub_out.diverged) throw Diverged("cstr experiment: subsystem path diverged");
  res.ergodic_x1 = ergodic.finish();
  res.band_x1 = band_with_batches(x1_samples, p.x1_dag, cfg.coverage, cfg.band_batches);

  // Long full-model path: band for x2 and conservation of x1 + x2.
  std::vector<double> x2_samples;
  x2_samples.reserve(cfg.sim.records());
  double conservation = 0.0;
  SimConfig full_sim = cfg.sim;
  full_sim.master_seed = split_seed(cfg.sim.master_seed, 1);
  const PathOutcome full_out =
      run_path(full_plant, cfg.x0, full_sim, full_sim.master_seed, [&](std::size_t, double t, const Vec& x, const Vec&) {
        conservation = std::max(conservation, std::abs(x(0) + x(1) - p.c_in));
        if (t >= cfg.burn_in) x2_samples.push_back(x(1));
        return true;
      });
  if (full_out.diverged) throw Diverged("cstr experiment: full-model path diverged");
  res.band_x2 = band_with_batches(x2_samples, x2_dag, cfg.coverage, cfg.band_batches);

  // Short sample path of the full model.
  SimConfig sample_sim = cfg.sim;
  sample_sim.t_end = cfg.sample_path_t_end;
  sample_sim.record_stride = cfg.sample_path_stride;
  res.sample_path = simulate_path(full_plant, cfg.x0, sample_sim, split_seed(cfg.sim.master_seed, 2));
  for (Eigen::Index i = 0; i < res.sample_path.states.cols(); ++i) {
    conservation = std::max(conservation, std::abs(res.sample_path.states.col(i).sum() - p.c_in));
  }
  res.conservation_max_error = conservation;

  // Ensemble snapshots for the convergence picture.
  SimConfig ens_sim = cfg.sim;
  ens_sim.master_seed = split_seed(cfg.sim.master_seed, 3);
  ens_sim.t_end = std::max(cfg.snapshot_times.back(), cfg.sim.dt);
  ens_sim.record_stride = 1;
  res.snapshots =
      convergence_diagnostic(sub_plant, {xbar0}, cfg.snapshot_times, cfg.ensemble_paths, ens_sim, sub_box,
                             {cfg.bins}, threads);

  // Passivity side conditions on the subsystem.
  ShellSpec shell;
  shell.center = Vec::Constant(1, p.x1_dag);
  shell.inner_radius = r_shell;
  shell.outer_radius = std::min(p.x1_dag, p.c_in - p.x1_dag);
  shell.epsilon = 0.5 * res.radius.epsilon_max;
  shell.samples = cfg.scan_samples;
  shell.seed = cfg.sim.master_seed;
  res.weak = weak_passivity_scan(sub_plant, V, shell);
  res.strict = strict_weak_passivity_scan(sub_plant, V, shell, StrictKind::state, res.radius.delta);
  res.witness = instability_witness(full_plant, p.desired_state());

  InvariantBound& t6 = res.theorem6;
  t6.shell_radius = r_shell;
  t6.set_radius = r_set;
  t6.k = res.strict.k_estimate;
  t6.C = res.strict.C_estimate;
  t6.V_B = sampled_inf_outside(
      V, [&](const Vec& x) { return std::abs(x(0) - p.x1_dag) < r_set; }, decomp.subsystem.domain(),
      cfg.scan_samples);
  t6.V0 = sampled_sup_in_ball(V, shell.center, r_shell, cfg.scan_samples, cfg.sim.master_seed);
  t6.empirical = x1_samples.empty() ? 0.0 : static_cast<double>(in_set) / static_cast<double>(x1_samples.size());
  if (t6.k > 0.0 && t6.C > 0.0 && t6.V_B > t6.V0 && t6.V0 > 0.0) {
    t6.bound = theorem6_lower_bound(t6.k, t6.C, t6.V_B, t6.V0);
    t6.holds = t6.empirical >= t6.bound;
  }
  return res;
}

}  // namespace swpass
