#include "swpass/generator.hpp"

#include "swpass/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

namespace swpass {

namespace {

double step_for(double xi, double relative, double floor) {
  return std::max(relative * std::max(1.0, std::abs(xi)), floor);
}

double inf_norm(const Mat& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

}  // namespace

StorageFunction::StorageFunction(ValueFn value, GradientFn gradient, HessianFn hessian, FdSteps steps)
    : value_(std::move(value)), gradient_(std::move(gradient)), hessian_(std::move(hessian)), steps_(steps) {
  if (!value_) throw ValidationError("storage function needs a value evaluator");
  if (!(steps_.gradient_relative > 0.0) || !(steps_.hessian_relative > 0.0) || !(steps_.floor > 0.0)) {
    throw ValidationError("finite-difference steps must be positive");
  }
}

StorageFunction StorageFunction::quadratic(Mat D, Vec center) {
  if (D.rows() != D.cols() || D.rows() != center.size()) {
    throw DimensionMismatch("quadratic storage: D must be n x n with n = center size");
  }
  const Mat Ds = 0.5 * (D + D.transpose());
  return StorageFunction(
      [Ds, center](const Vec& x) {
        const Vec d = x - center;
        return 0.5 * d.dot(Ds * d);
      },
      [Ds, center](const Vec& x) -> Vec { return Ds * (x - center); },
      [Ds](const Vec&) -> Mat { return Ds; });
}

StorageFunction StorageFunction::constant(double c) {
  return StorageFunction([c](const Vec&) { return c; }, [](const Vec& x) -> Vec { return Vec::Zero(x.size()); },
                         [](const Vec& x) -> Mat { return Mat::Zero(x.size(), x.size()); });
}

Vec StorageFunction::gradient(const Vec& x) const { return gradient_ ? gradient_(x) : fd_gradient(x); }

Mat StorageFunction::hessian(const Vec& x) const { return hessian_ ? hessian_(x) : fd_hessian(x); }

Vec StorageFunction::fd_gradient(const Vec& x) const {
  Vec g(x.size());
  Vec xp = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double h = step_for(x(i), steps_.gradient_relative, steps_.floor);
    xp(i) = x(i) + h;
    const double vp = value_(xp);
    xp(i) = x(i) - h;
    const double vm = value_(xp);
    xp(i) = x(i);
    g(i) = (vp - vm) / (2.0 * h);
  }
  return g;
}

Mat StorageFunction::fd_hessian(const Vec& x) const {
  const Eigen::Index n = x.size();
  Mat H(n, n);
  Vec h(n);
  for (Eigen::Index i = 0; i < n; ++i) h(i) = step_for(x(i), steps_.hessian_relative, steps_.floor);
  const double v0 = value_(x);
  Vec xp = x;
  for (Eigen::Index i = 0; i < n; ++i) {
    xp(i) = x(i) + h(i);
    const double vp = value_(xp);
    xp(i) = x(i) - h(i);
    const double vm = value_(xp);
    xp(i) = x(i);
    H(i, i) = (vp - 2.0 * v0 + vm) / (h(i) * h(i));
    for (Eigen::Index j = i + 1; j < n; ++j) {
      auto at = [&](double si, double sj) {
        xp(i) = x(i) + si * h(i);
        xp(j) = x(j) + sj * h(j);
        const double v = value_(xp);
        xp(i) = x(i);
        xp(j) = x(j);
        return v;
      };
      const double hij = (at(1, 1) - at(1, -1) - at(-1, 1) + at(-1, -1)) / (4.0 * h(i) * h(j));
      H(i, j) = hij;
      H(j, i) = hij;
    }
  }
  return H;
}

StorageFunction StorageFunction::finite_difference_only() const {
  return StorageFunction(value_, {}, {}, steps_);
}

StorageFunction StorageFunction::combine(double a, const StorageFunction& v1, double b,
                                         const StorageFunction& v2) {
  GradientFn grad;
  HessianFn hess;
  if (v1.has_gradient() && v2.has_gradient()) {
    grad = [a, b, g1 = v1.gradient_, g2 = v2.gradient_](const Vec& x) -> Vec { return a * g1(x) + b * g2(x); };
  }
  if (v1.has_hessian() && v2.has_hessian()) {
    hess = [a, b, h1 = v1.hessian_, h2 = v2.hessian_](const Vec& x) -> Mat { return a * h1(x) + b * h2(x); };
  }
  return StorageFunction([a, b, f1 = v1.value_, f2 = v2.value_](const Vec& x) { return a * f1(x) + b * f2(x); },
                         std::move(grad), std::move(hess), v1.steps_);
}

double generator_apply(const ItoSystem& system, const StorageFunction& V, const Vec& x, const Vec& u) {
  const FieldValues fv = system.evaluate(x, u);
  const Vec g = V.gradient(x);
  const Mat H = V.hessian(x);
  if (g.size() != x.size() || H.rows() != x.size() || H.cols() != x.size()) {
    throw DimensionMismatch("generator: storage derivative has wrong shape");
  }
  if (!g.allFinite() || !H.allFinite()) throw NonFinite("generator: storage derivatives are not finite");
  const Mat hht = fv.diffusion * fv.diffusion.transpose();
  const double out = g.dot(fv.drift) + 0.5 * H.cwiseProduct(hht).sum();
  if (!std::isfinite(out)) throw NonFinite("generator: L[V] is not finite");
  return out;
}

double generator_apply(const Plant& plant, const StorageFunction& V, const Vec& x) {
  if (static_cast<std::size_t>(x.size()) != plant.system().n()) {
    throw DimensionMismatch("generator: state has wrong size");
  }
  if (!x.allFinite()) throw NonFinite("generator: non-finite state");
  return generator_apply(plant.system(), V, x, plant.input(x));
}

double check_derivative_consistency(const StorageFunction& V, std::span<const Vec> points) {
  if (!V.has_gradient() && !V.has_hessian()) {
    throw ValidationError("derivative check needs an analytic gradient or Hessian");
  }
  constexpr double kFloor = 1e-6;
  double worst = 0.0;
  for (const Vec& x : points) {
    if (V.has_gradient()) {
      const Vec a = V.gradient(x);
      const Vec fd = V.fd_gradient(x);
      if (a.size() != fd.size() || !a.allFinite() || !fd.allFinite()) {
        return std::numeric_limits<double>::infinity();
      }
      worst = std::max(worst, inf_norm(a - fd) / std::max(inf_norm(fd), kFloor));
    }
    if (V.has_hessian()) {
      const Mat a = V.hessian(x);
      const Mat fd = V.fd_hessian(x);
      if (a.rows() != fd.rows() || a.cols() != fd.cols() || !a.allFinite() || !fd.allFinite()) {
        return std::numeric_limits<double>::infinity();
      }
      worst = std::max(worst, inf_norm(a - fd) / std::max(inf_norm(fd), kFloor));
    }
    if (std::isnan(worst)) return std::numeric_limits<double>::infinity();
  }
  return worst;
}

}  // namespace swpass
