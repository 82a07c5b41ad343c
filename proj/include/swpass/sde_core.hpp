#pragma once

#include "swpass/linalg.hpp"

#include <cstddef>
#include <functional>
#include <string>
#include <variant>

namespace swpass {

struct Dimensions {
  std::size_t n = 0;  ///< state
  std::size_t m = 0;  ///< input and output
  std::size_t r = 0;  ///< Wiener noise channels
};

struct FieldValues {
  Vec drift;      ///< n
  Mat diffusion;  ///< n x r
  Vec output;     ///< m
};

/// Controlled Ito system dx = f(x,u) dt + h(x,u) dw, y = s(x,u).
///
/// Evaluators write into caller-owned buffers that are already sized
/// (n, n x r, m). They must be pure: the same (x, u) always produces the
/// same result, and they may be called concurrently.
class ItoSystem {
 public:
  using DriftFn = std::function<void(const Vec& x, const Vec& u, Vec& f)>;
  using DiffusionFn = std::function<void(const Vec& x, const Vec& u, Mat& h)>;
  using OutputFn = std::function<void(const Vec& x, const Vec& u, Vec& y)>;

  /// Probes every evaluator once at the domain center with u = 0 and throws
  /// DimensionMismatch if a returned shape is wrong.
  ItoSystem(std::string name, Dimensions dims, DriftFn drift, DiffusionFn diffusion,
            OutputFn output, bool output_depends_on_input, Box domain);

  [[nodiscard]] const std::string& name() const { return name_; }
  [[nodiscard]] const Dimensions& dims() const { return dims_; }
  [[nodiscard]] std::size_t n() const { return dims_.n; }
  [[nodiscard]] std::size_t m() const { return dims_.m; }
  [[nodiscard]] std::size_t r() const { return dims_.r; }
  [[nodiscard]] bool output_depends_on_input() const { return output_depends_on_input_; }
  [[nodiscard]] const Box& domain() const { return domain_; }

  // Unchecked hot-path evaluation; buffers must be presized.
  void drift(const Vec& x, const Vec& u, Vec& f) const { drift_(x, u, f); }
  void diffusion(const Vec& x, const Vec& u, Mat& h) const { diffusion_(x, u, h); }
  void output(const Vec& x, const Vec& u, Vec& y) const { output_(x, u, y); }

  /// Checked evaluation. Throws DimensionMismatch on wrong argument sizes and
  /// NonFinite if an argument or a result contains NaN or infinity.
  [[nodiscard]] FieldValues evaluate(const Vec& x, const Vec& u) const;

 private:
  std::string name_;
  Dimensions dims_;
  DriftFn drift_;
  DiffusionFn diffusion_;
  OutputFn output_;
  bool output_depends_on_input_;
  Box domain_;
};

/// Free-function form of ItoSystem::evaluate.
[[nodiscard]] FieldValues evaluate_fields(const ItoSystem& system, const Vec& x, const Vec& u);

/// Static negative proportional feedback u = -K y with K symmetric positive definite.
class FeedbackLaw {
 public:
  /// Throws NotSymmetric or NotPositiveDefinite.
  explicit FeedbackLaw(Mat gain);

  [[nodiscard]] const Mat& gain() const { return gain_; }
  [[nodiscard]] std::size_t dim() const { return static_cast<std::size_t>(gain_.rows()); }

  static FeedbackLaw scalar(double k);

 private:
  Mat gain_;
};

struct FixedPointOptions {
  double damping = 0.5;
  double tol = 1e-10;
  int max_iters = 200;
};

/// A system closed by an (implicit) feedback law u = -K s(x, u).
class ClosedSystem {
 public:
  ClosedSystem(ItoSystem base, FeedbackLaw law, FixedPointOptions options = {});

  [[nodiscard]] const ItoSystem& base() const { return base_; }
  [[nodiscard]] const FeedbackLaw& law() const { return law_; }
  [[nodiscard]] const FixedPointOptions& options() const { return options_; }

  /// Writes the resolved input into u (presized to m). Throws NoFixedPoint.
  void resolve_input(const Vec& x, Vec& u) const;
  [[nodiscard]] Vec resolve_input(const Vec& x) const;

 private:
  ItoSystem base_;
  FeedbackLaw law_;
  FixedPointOptions options_;
};

[[nodiscard]] Vec resolve_implicit_input(const ClosedSystem& closed, const Vec& x);

/// Throws DimensionMismatch if K is not m x m.
[[nodiscard]] ClosedSystem close_loop(const ItoSystem& system, const FeedbackLaw& law,
                                      FixedPointOptions options = {});

/// Anything that turns a state into (u, f, h): a closed loop, or an open
/// system driven by a constant input. This is the autonomous dx = f dt + h dw
/// view consumed by the simulator, the generator and the scans.
class Plant {
 public:
  Plant(ClosedSystem closed);  // NOLINT(google-explicit-constructor)
  Plant(ItoSystem system, Vec fixed_input);

  /// Open system with u = 0.
  static Plant open_loop(ItoSystem system);

  [[nodiscard]] const ItoSystem& system() const;
  [[nodiscard]] bool is_closed() const { return std::holds_alternative<ClosedSystem>(impl_); }
  [[nodiscard]] const ClosedSystem* closed() const { return std::get_if<ClosedSystem>(&impl_); }

  void input(const Vec& x, Vec& u) const;
  [[nodiscard]] Vec input(const Vec& x) const;

  /// Hot path: resolves u and evaluates drift and diffusion into presized buffers.
  void fields(const Vec& x, Vec& u, Vec& f, Mat& h) const;

 private:
  struct OpenLoop {
    ItoSystem system;
    Vec u;
  };
  std::variant<ClosedSystem, OpenLoop> impl_;
};

}  // namespace swpass
