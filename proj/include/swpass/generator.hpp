#pragma once

#include "swpass/linalg.hpp"
#include "swpass/sde_core.hpp"

#include <functional>
#include <optional>
#include <span>

namespace swpass {

/// Central-difference step configuration. Step in coordinate i is
/// max(relative * max(1, |x_i|), floor).
struct FdSteps {
  double gradient_relative = 1e-5;
  double hessian_relative = 1e-4;
  double floor = 1e-7;
};

/// Nonnegative C^2 storage (Lyapunov) candidate V with optional analytic derivatives.
class StorageFunction {
 public:
  using ValueFn = std::function<double(const Vec&)>;
  using GradientFn = std::function<Vec(const Vec&)>;
  using HessianFn = std::function<Mat(const Vec&)>;

  explicit StorageFunction(ValueFn value, GradientFn gradient = {}, HessianFn hessian = {},
                           FdSteps steps = {});

  /// V(x) = 1/2 (x - c)^T D (x - c), with exact derivatives.
  static StorageFunction quadratic(Mat D, Vec center);
  static StorageFunction constant(double c);

  [[nodiscard]] double value(const Vec& x) const { return value_(x); }
  [[nodiscard]] Vec gradient(const Vec& x) const;
  [[nodiscard]] Mat hessian(const Vec& x) const;

  [[nodiscard]] Vec fd_gradient(const Vec& x) const;
  /// Nested central differences of the value function.
  [[nodiscard]] Mat fd_hessian(const Vec& x) const;

  [[nodiscard]] bool has_gradient() const { return static_cast<bool>(gradient_); }
  [[nodiscard]] bool has_hessian() const { return static_cast<bool>(hessian_); }
  [[nodiscard]] const FdSteps& steps() const { return steps_; }

  /// Same value function, derivatives forced to finite differences.
  [[nodiscard]] StorageFunction finite_difference_only() const;

  /// a V1 + b V2; analytic derivatives are kept where both sides have them.
  static StorageFunction combine(double a, const StorageFunction& v1, double b, const StorageFunction& v2);

 private:
  ValueFn value_;
  GradientFn gradient_;
  HessianFn hessian_;
  FdSteps steps_;
};

/// L[V](x) = dV/dx . f(x,u) + 1/2 tr{ d2V/dx2 h(x,u) h(x,u)^T }.
/// Throws NonFinite if derivatives or fields are not finite.
[[nodiscard]] double generator_apply(const ItoSystem& system, const StorageFunction& V, const Vec& x,
                                     const Vec& u);

/// Same, with u resolved by the plant (feedback law or fixed input).
[[nodiscard]] double generator_apply(const Plant& plant, const StorageFunction& V, const Vec& x);

/// Max relative discrepancy between analytic and finite-difference
/// derivatives over the points: |a - fd|_inf / max(|fd|_inf, 1e-6).
/// Returns infinity if anything is NaN. Requires an analytic gradient or Hessian.
[[nodiscard]] double check_derivative_consistency(const StorageFunction& V, std::span<const Vec> points);

}  // namespace swpass
