#pragma once

#include "swpass/generator.hpp"
#include "swpass/linalg.hpp"
#include "swpass/sde_core.hpp"

#include <cstddef>
#include <cstdint>
#include <string>

namespace swpass {

inline constexpr std::size_t kDefaultScanSamples = 4096;
inline constexpr double kDefaultRankThreshold = 1e-10;

/// Truncated shell inner <= |x - center| <= outer. The unbounded region in the
/// passivity definitions is cut at `outer_radius`; every report records it.
struct ShellSpec {
  Vec center;
  double inner_radius = 0.0;
  double outer_radius = 1.0;
  double epsilon = 0.0;  ///< margin of the rank-check ball, radius inner + epsilon
  std::size_t samples = kDefaultScanSamples;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Which signal xi enters the strict passivity margin + delta |xi|^2.
enum class StrictKind { state, input, output };

[[nodiscard]] std::string to_string(StrictKind kind);
[[nodiscard]] StrictKind strict_kind_from_string(const std::string& s);

struct PassivityReport {
  ShellSpec shell;
  std::string condition = "weak";  ///< "weak" or "strict_<kind>"
  double delta = 0.0;

  /// max over shell samples of L[V] - u^T y (+ delta |xi|^2 for strict variants)
  double worst_margin = 0.0;
  Vec worst_point;
  bool passivity_pass = false;  ///< worst_margin <= 0

  /// -(max L[V]) on the same shell samples; > 0 supports L[V] < -k outside the ball
  double k_estimate = 0.0;
  bool drift_rate_pass = false;

  /// max L[V] over the system domain box
  double C_estimate = 0.0;
  Box C_box;
  std::size_t C_samples = 0;

  /// min over the ball |x - center| < inner + epsilon of lambda_min(h h^T)
  double min_rank_eigenvalue = 0.0;
  double rank_threshold = kDefaultRankThreshold;
  bool rank_pass = false;

  /// Sampled check that V exceeds V(center) on the shell (uniqueness of the
  /// minimum is flagged, not proven).
  bool center_is_sampled_minimum = false;
};

/// Falsification scan of L[V](x) <= u(x)^T y(x) over the truncated shell.
[[nodiscard]] PassivityReport weak_passivity_scan(const Plant& plant, const StorageFunction& V,
                                                  const ShellSpec& shell);

/// Margin L[V] - u^T y + delta |xi|^2, xi = x - center, u, or y per kind.
[[nodiscard]] PassivityReport strict_weak_passivity_scan(const Plant& plant, const StorageFunction& V,
                                                         const ShellSpec& shell, StrictKind kind,
                                                         double delta);

/// -(max sampled L[V]) on the shell.
[[nodiscard]] double drift_rate_scan(const Plant& plant, const StorageFunction& V, const ShellSpec& shell);

/// max sampled L[V] over the box: its midpoint plus `samples` Halton points.
[[nodiscard]] double generator_bound_scan(const Plant& plant, const StorageFunction& V, const Box& box,
                                          std::size_t samples = kDefaultScanSamples);

/// min over the center plus `samples` points of the closed ball of
/// lambda_min(h h^T). Pass iff the result exceeds the threshold.
[[nodiscard]] double diffusion_rank_check(const Plant& plant, const Vec& center, double radius,
                                          std::size_t samples = kDefaultScanSamples,
                                          std::uint64_t seed = 0);

/// Piece `piece` (0..3) of the C^2 bump profile, or its first/second
/// derivative (deriv = 0, 1, 2), evaluated at r regardless of the piece's interval.
[[nodiscard]] double bump_piece(int piece, double r, int deriv);

/// Bump profile Ũ(r) for r >= 0, equal to r^2 near 0 and 23/12 beyond 5/2.
[[nodiscard]] double bump_profile(double r, int deriv = 0);

inline constexpr double kBumpScale = 12.0 / 23.0;

/// U(x) = (12/23) Ũ(|x - center|) with analytic radial derivatives; U in [0, 1].
[[nodiscard]] StorageFunction bump_storage(Vec center);

/// L[U](x_dagger) for the bump centered at x_dagger, which equals
/// (12/23) tr{h h^T}(x_dagger). A positive value means x_dagger cannot be
/// stable in probability.
[[nodiscard]] double instability_witness(const Plant& plant, const Vec& x_dagger);

}  // namespace swpass
