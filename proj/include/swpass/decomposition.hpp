#pragma once

#include "swpass/linalg.hpp"
#include "swpass/measure.hpp"
#include "swpass/sde_core.hpp"
#include "swpass/simulate.hpp"

#include <cstddef>

namespace swpass {

/// Affine coordinate change xbar = T x + b, split into a stochastic block
/// (first n1 coordinates) and a frozen block (remaining n2 = n - n1).
struct AffineDecomposition {
  Mat T;
  Vec b;
  std::size_t n1 = 0;

  /// Throws DimensionMismatch or SingularSystem (T not invertible).
  void validate() const;
  [[nodiscard]] std::size_t n() const { return static_cast<std::size_t>(T.rows()); }
  [[nodiscard]] std::size_t n2() const { return n() - n1; }
  [[nodiscard]] Vec forward(const Vec& x) const { return T * x + b; }
  [[nodiscard]] Vec inverse(const Vec& xbar) const;
  /// 2-norm condition number of T.
  [[nodiscard]] double condition_number() const;
};

struct DecompositionReport {
  double worst_residual = 0.0;  ///< max |rows n1.. of T f| and |rows n1.. of T h| on the sample grid
  double tolerance = 1e-10;
  std::size_t samples = 0;
  double condition_number = 0.0;
};

struct Decomposition {
  ItoSystem subsystem;  ///< dimension n1, same m and r
  AffineDecomposition map;
  Vec xbar2_fixed;
  DecompositionReport report;
};

/// Pushes f and h through the map onto the manifold xbar_2 = xbar2_fixed:
///   fbar(xbar1, u) = (T f(x, u))[0:n1],  hbar = (T h(x, u))[0:n1, :],
///   x = T^{-1}((xbar1, xbar2_fixed) - b).
/// The frozen rows must vanish on `samples` Halton points of
/// sub_domain x [-1, 1]^m; otherwise NotDecomposition is thrown.
[[nodiscard]] Decomposition build_decomposition(const ItoSystem& system, const AffineDecomposition& map,
                                                const Vec& xbar2_fixed, const Box& sub_domain,
                                                std::size_t samples = 256, double tol = 1e-10);

struct InvariantCheck {
  double max_drift = 0.0;  ///< max_t |xbar2(t) - xbar2(0)|_inf
  bool pass = false;
};

[[nodiscard]] InvariantCheck verify_invariant_coordinate(const Trajectory& traj, const AffineDecomposition& map,
                                                         double tol);

/// Product of a subsystem measure with the point mass at xbar2_fixed, living
/// on the manifold Phi^{-1}(R^{n1} x {xbar2_fixed}).
class LiftedMeasure {
 public:
  LiftedMeasure(HistogramMeasure sub, AffineDecomposition map, Vec xbar2_fixed);

  [[nodiscard]] const HistogramMeasure& sub_measure() const { return sub_; }
  [[nodiscard]] Vec support_point(std::size_t bin) const;
  /// Original coordinates of the lifted subsystem point xbar1.
  [[nodiscard]] Vec lift_point(const Vec& xbar1) const;

  /// Mass of an original-coordinate box. For n1 = 1 each bin's segment is
  /// intersected exactly; for n1 > 1 each bin counts by its center.
  [[nodiscard]] double measure_of_box(const Box& box) const;
  [[nodiscard]] double total_mass() const;

 private:
  HistogramMeasure sub_;
  AffineDecomposition map_;
  Vec xbar2_;
};

/// Throws GridMismatch if the measure is not over R^{n1}.
[[nodiscard]] LiftedMeasure lift_measure(const HistogramMeasure& sub, const AffineDecomposition& map,
                                         const Vec& xbar2_fixed);

}  // namespace swpass
