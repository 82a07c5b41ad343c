#pragma once

#include "swpass/linalg.hpp"

#include <cstdint>

namespace swpass {

/// Van der Corput radical inverse of `index` in the given prime base.
[[nodiscard]] double radical_inverse(std::uint64_t index, unsigned base);

/// Point `index` of the Halton sequence in [0,1)^dim (bases 2, 3, 5, ...).
/// Supports dim <= 32.
[[nodiscard]] Vec halton_point(std::uint64_t index, std::size_t dim);

/// Halton point mapped affinely into the box.
[[nodiscard]] Vec box_point(const Box& box, std::uint64_t index);

/// Deterministic sampler of the annulus inner <= |x - center| <= outer.
///
/// Radius: inverse CDF of the r^(n-1) law applied to the base-2 radical
/// inverse of the index, so index 0 lies exactly on the inner sphere.
/// Direction: normalized Gaussian vector from CounterRng(split_seed(seed, index)),
/// so each point depends only on (seed, index).
class AnnulusSampler {
 public:
  AnnulusSampler(Vec center, double inner, double outer, std::uint64_t seed);

  [[nodiscard]] Vec point(std::uint64_t index) const;
  [[nodiscard]] const Vec& center() const { return center_; }
  [[nodiscard]] double inner() const { return inner_; }
  [[nodiscard]] double outer() const { return outer_; }

 private:
  Vec center_;
  double inner_;
  double outer_;
  std::uint64_t seed_;
};

}  // namespace swpass
