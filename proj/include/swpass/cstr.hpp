#pragma once

#include "swpass/decomposition.hpp"
#include "swpass/generator.hpp"
#include "swpass/measure.hpp"
#include "swpass/passivity.hpp"
#include "swpass/sde_core.hpp"
#include "swpass/simulate.hpp"

#include <optional>
#include <string>
#include <vector>

namespace swpass {

/// Isothermal CSTR with first-order reaction X1 -> X2 and a noisy rate.
struct CstrParams {
  double k = 1.0;        ///< reaction rate coefficient (1/s)
  double sigma = 0.03;   ///< disturbance intensity on k
  double c_in = 8.5;     ///< inlet concentration of X1 (mole/m^3)
  double x1_dag = 5.0;   ///< desired concentration of X1
  double q0 = 0.33;      ///< listed initial flow rate (m^3/s)

  /// Throws DomainError unless 0 < x1_dag < c_in, sigma > 0, k > 0.
  void validate() const;
  /// sigma < 0.1 k; callers warn when false.
  [[nodiscard]] bool noise_is_small() const { return sigma < 0.1 * k; }
  /// Flow rate that makes (x1_dag, c_in - x1_dag) the deterministic equilibrium.
  [[nodiscard]] double equilibrium_flow() const { return k * x1_dag / (c_in - x1_dag); }
  [[nodiscard]] Vec desired_state() const;
};

/// Raw model with input q:
///   dx1 = [-k x1 + (c_in - x1) q] dt - sigma x1 dw
///   dx2 = [ k x1 - x2 q] dt + sigma x1 dw
/// Output is the shifted-pair output (x1 - x1_dag)(c_in - x1).
[[nodiscard]] ItoSystem build_cstr(const CstrParams& p);

/// Input-output form with u = q - equilibrium_flow() and
/// y = (x1 - x1_dag)(c_in - x1).
[[nodiscard]] ItoSystem build_cstr_io(const CstrParams& p);

/// xbar = (x1, x1 + x2).
[[nodiscard]] AffineDecomposition cstr_decomposition();

/// Scalar subsystem in xbar1 on the manifold x1 + x2 = c_in, built through
/// build_decomposition of the input-output model.
[[nodiscard]] Decomposition build_cstr_subsystem(const CstrParams& p);

/// V(xbar1) = 1/2 (xbar1 - x1_dag)^2.
[[nodiscard]] StorageFunction cstr_storage(const CstrParams& p);

struct CstrRadius {
  double delta = 0.0;        ///< k c_in / (2 (c_in - x1_dag))
  double R = 0.0;            ///< (sigma^2 + sigma sqrt(2 delta)) / (2 delta - sigma^2) * x1_dag
  double epsilon_max = 0.0;  ///< min{x1_dag - R, c_in - R - x1_dag}
};

/// Throws DomainError if 2 delta <= sigma^2.
[[nodiscard]] CstrRadius cstr_delta_and_radius(const CstrParams& p);

/// Reading of "without controller".
enum class UncontrolledFlow {
  equilibrium,  ///< u = 0, q = equilibrium_flow()
  listed_q0,    ///< q = q0 held constant
};

struct CstrExperimentConfig {
  CstrParams params;
  std::optional<double> gain;  ///< feedback u = -K y; none = uncontrolled
  UncontrolledFlow uncontrolled_flow = UncontrolledFlow::equilibrium;
  Vec x0 = (Vec(2) << 5.5, 3.0).finished();

  SimConfig sim{1e-3, 2000.0, 20240501, 1, std::nullopt};  ///< long ergodic runs
  double burn_in = 50.0;
  std::size_t ensemble_paths = 10000;
  std::vector<double> snapshot_times{0.0, 0.5, 1.0, 2.0, 3.0};
  double sample_path_t_end = 20.0;
  std::size_t sample_path_stride = 10;

  double sub_lo = 3.5;  ///< histogram box for xbar1
  double sub_hi = 6.5;
  std::size_t bins = kDefaultBins;
  double coverage = 0.9;
  std::size_t band_batches = 20;

  std::size_t scan_samples = kDefaultScanSamples;
  /// Radius of the set B = {|xbar1 - x1_dag| < r} used for the
  /// invariant-measure bound; unset means 2R.
  std::optional<double> theorem6_set_radius;

  void validate() const;
};

struct BandEstimate {
  double center = 0.0;
  double half_width = 0.0;
  double std_error = 0.0;  ///< batch-means standard error
  std::size_t samples = 0;
};

struct InvariantBound {
  double shell_radius = 0.0;
  double set_radius = 0.0;
  double k = 0.0;
  double C = 0.0;
  double V_B = 0.0;
  double V0 = 0.0;
  double bound = 0.0;
  double empirical = 0.0;  ///< occupation fraction of B on the long path
  bool holds = false;
};

struct CstrExperimentResult {
  CstrRadius radius;
  std::string controller;  ///< "none" or "K=<gain>"
  double applied_open_loop_input = 0.0;

  BandEstimate band_x1;  ///< from the xbar1 subsystem path
  BandEstimate band_x2;  ///< from the full two-state path
  double conservation_max_error = 0.0;  ///< max |x1 + x2 - c_in| over full-model paths

  Trajectory sample_path;        ///< full model
  std::optional<HistogramMeasure> ergodic_x1;  ///< time occupation of xbar1
  ConvergenceTable snapshots;    ///< ensemble histograms of xbar1 at snapshot_times

  PassivityReport weak;
  PassivityReport strict;
  double witness = 0.0;  ///< L[U] at the desired state of the full model
  InvariantBound theorem6;
};

[[nodiscard]] CstrExperimentResult run_cstr_experiment(const CstrExperimentConfig& cfg, std::size_t threads = 1);

}  // namespace swpass
