#pragma once

#include "swpass/cstr.hpp"
#include "swpass/generator.hpp"
#include "swpass/linalg.hpp"
#include "swpass/linear_cert.hpp"
#include "swpass/sde_core.hpp"
#include "swpass/simulate.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace swpass {

struct OuParams {
  double theta = 1.0;
  double sigma = 1.0;
};

/// Builtin registry: "ou", "linear", "cstr", "cstr_subS".
struct ModelSpec {
  std::string name = "ou";
  OuParams ou;
  LinearSystem linear;
  CstrParams cstr;
  std::optional<Box> domain;  ///< ou and linear only; default [-10, 10]^n
};

struct StorageSpec {
  std::string type = "quadratic";  ///< "quadratic" or "cstr"
  Mat D;
  Vec center;
};

struct ControllerSpec {
  std::string type = "none";  ///< "none", "feedback" or "fixed"
  Mat K;
  Vec u;
};

struct SimulateSpec {
  std::size_t paths = 1;
};

struct PassivitySpec {
  std::optional<Vec> center;
  std::optional<double> inner_radius;
  std::optional<double> outer_radius;
  std::optional<double> epsilon;
  std::size_t samples = 4096;
  std::string condition = "weak";  ///< "weak", "strict_state", "strict_input", "strict_output"
  double delta = 0.0;
};

struct RecurrenceSpec {
  double k = 1.0;
  double C = 1.0;
  Vec target_center;
  double target_radius = 1.0;
  std::size_t paths = 10000;
  double V1 = 1.0;
  double V2 = 2.0;
  double episode_t_end = 10000.0;
};

struct Theorem6Spec {
  double k = 1.0;
  double C = 1.0;
  Vec center;
  double set_radius = 1.0;    ///< B is the open ball of this radius
  double shell_radius = 1.0;  ///< V0 is the sup of V over this ball
  std::size_t samples = 4096;
};

struct MeasureSpec {
  Box box;
  std::vector<std::size_t> bins;
  std::vector<double> times;
  std::vector<Vec> initial_states;
  std::size_t paths = 100000;
  double burn_in = 10.0;
  double ergodic_t_end = 10000.0;
  std::optional<Theorem6Spec> theorem6;
};

struct CstrSpec {
  std::optional<double> gain;
  std::string uncontrolled_flow = "equilibrium";  ///< or "listed_q0"
  double burn_in = 50.0;
  std::size_t ensemble_paths = 10000;
  std::vector<double> snapshot_times{0.0, 0.5, 1.0, 2.0, 3.0};
  double sample_path_t_end = 20.0;
  std::size_t sample_path_stride = 10;
  double sub_lo = 3.5;
  double sub_hi = 6.5;
  std::size_t bins = 64;
  double coverage = 0.9;
  std::size_t band_batches = 20;
  std::size_t scan_samples = 4096;
  std::optional<double> theorem6_set_radius;
};

struct RunConfig {
  ModelSpec model;
  std::optional<StorageSpec> storage;
  ControllerSpec controller;
  SimConfig sim;
  Vec initial_state;
  std::uint64_t seed = 0;
  std::string output_dir = "out";
  std::optional<SimulateSpec> simulate;
  std::optional<PassivitySpec> passivity;
  std::optional<RecurrenceSpec> recurrence;
  std::optional<MeasureSpec> measure;
  std::optional<CstrSpec> cstr;

  /// Throws ValidationError naming the offending key; unknown keys are rejected.
  [[nodiscard]] static RunConfig from_json(const nlohmann::json& j);
  [[nodiscard]] nlohmann::json to_json() const;
};

[[nodiscard]] RunConfig load_config(const std::filesystem::path& path);

[[nodiscard]] ItoSystem build_model(const ModelSpec& spec);
[[nodiscard]] Plant build_plant(const RunConfig& cfg);
/// Falls back to the CSTR storage for cstr_subS; otherwise requires a storage section.
[[nodiscard]] StorageFunction build_storage(const RunConfig& cfg);
[[nodiscard]] CstrExperimentConfig build_cstr_config(const RunConfig& cfg);

}  // namespace swpass
