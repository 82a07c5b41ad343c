#pragma once

#include "swpass/errors.hpp"
#include "swpass/linear_cert.hpp"
#include "swpass/sde_core.hpp"

namespace swpass::fixtures {

/// dx = (-theta x + u) dt + sigma dw, y = x.
inline ItoSystem ou(double sigma = 1.0, double theta = 1.0, double half_width = 10.0) {
  LinearSystem sys{Mat::Constant(1, 1, -theta), Mat::Identity(1, 1), Mat::Identity(1, 1),
                   Mat::Constant(1, 1, sigma)};
  return to_ito_system(sys, Box{Vec::Constant(1, -half_width), Vec::Constant(1, half_width)});
}

inline Vec v1(double a) { return Vec::Constant(1, a); }

inline Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

}  // namespace swpass::fixtures
