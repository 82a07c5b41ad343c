#pragma once

#include <Eigen/Dense>

#include <cstddef>

namespace swpass {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Axis-aligned box [lo, hi] in R^n.
struct Box {
  Vec lo;
  Vec hi;

  [[nodiscard]] std::size_t dim() const { return static_cast<std::size_t>(lo.size()); }
  [[nodiscard]] Vec center() const { return 0.5 * (lo + hi); }
  [[nodiscard]] bool contains(const Vec& x) const {
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      if (!(x(i) >= lo(i) && x(i) <= hi(i))) return false;
    }
    return true;
  }
};

/// Throws DomainError unless lo < hi componentwise and dims agree.
void validate_box(const Box& box, const char* what);

[[nodiscard]] bool all_finite(const Vec& v);
[[nodiscard]] bool all_finite(const Mat& m);

}  // namespace swpass
