#include "swpass/sde_core.hpp"

#include "swpass/errors.hpp"
#include "swpass/linear_cert.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <utility>

namespace swpass {

void validate_box(const Box& box, const char* what) {
  if (box.lo.size() != box.hi.size() || box.lo.size() == 0) {
    throw DimensionMismatch(std::string(what) + ": box bounds must be nonempty and of equal length");
  }
  for (Eigen::Index i = 0; i < box.lo.size(); ++i) {
    if (!std::isfinite(box.lo(i)) || !std::isfinite(box.hi(i)) || !(box.lo(i) < box.hi(i))) {
      throw DomainError(std::string(what) + ": box requires finite lo < hi in every dimension");
    }
  }
}

bool all_finite(const Vec& v) { return v.allFinite(); }
bool all_finite(const Mat& m) { return m.allFinite(); }

namespace {

std::string shape_message(const std::string& system, const char* field, Eigen::Index rows,
                          Eigen::Index cols, std::size_t want_rows, std::size_t want_cols) {
  std::ostringstream os;
  os << system << ": " << field << " evaluator returned " << rows << "x" << cols << ", expected "
     << want_rows << "x" << want_cols;
  return os.str();
}

}  // namespace

ItoSystem::ItoSystem(std::string name, Dimensions dims, DriftFn drift, DiffusionFn diffusion,
                     OutputFn output, bool output_depends_on_input, Box domain)
    : name_(std::move(name)),
      dims_(dims),
      drift_(std::move(drift)),
      diffusion_(std::move(diffusion)),
      output_(std::move(output)),
      output_depends_on_input_(output_depends_on_input),
      domain_(std::move(domain)) {
  if (dims_.n == 0 || dims_.m == 0 || dims_.r == 0) {
    throw DimensionMismatch(name_ + ": dimensions n, m, r must be positive");
  }
  if (!drift_ || !diffusion_ || !output_) {
    throw ValidationError(name_ + ": all three evaluators are required");
  }
  validate_box(domain_, name_.c_str());
  if (domain_.dim() != dims_.n) {
    throw DimensionMismatch(name_ + ": domain box dimension differs from n");
  }

  // Probe shapes once; later evaluations trust them.
  const Vec x = domain_.center();
  const Vec u = Vec::Zero(static_cast<Eigen::Index>(dims_.m));
  Vec f = Vec::Constant(static_cast<Eigen::Index>(dims_.n), std::numeric_limits<double>::quiet_NaN());
  Mat h = Mat::Constant(static_cast<Eigen::Index>(dims_.n), static_cast<Eigen::Index>(dims_.r),
                        std::numeric_limits<double>::quiet_NaN());
  Vec y = Vec::Constant(static_cast<Eigen::Index>(dims_.m), std::numeric_limits<double>::quiet_NaN());
  drift_(x, u, f);
  diffusion_(x, u, h);
  output_(x, u, y);
  if (static_cast<std::size_t>(f.size()) != dims_.n) {
    throw DimensionMismatch(shape_message(name_, "drift", f.size(), 1, dims_.n, 1));
  }
  if (static_cast<std::size_t>(h.rows()) != dims_.n || static_cast<std::size_t>(h.cols()) != dims_.r) {
    throw DimensionMismatch(shape_message(name_, "diffusion", h.rows(), h.cols(), dims_.n, dims_.r));
  }
  if (static_cast<std::size_t>(y.size()) != dims_.m) {
    throw DimensionMismatch(shape_message(name_, "output", y.size(), 1, dims_.m, 1));
  }
}

FieldValues ItoSystem::evaluate(const Vec& x, const Vec& u) const {
  if (static_cast<std::size_t>(x.size()) != dims_.n || static_cast<std::size_t>(u.size()) != dims_.m) {
    throw DimensionMismatch(name_ + ": evaluate called with wrong state or input size");
  }
  if (!x.allFinite() || !u.allFinite()) {
    throw NonFinite(name_ + ": non-finite state or input");
  }
  FieldValues out{Vec(static_cast<Eigen::Index>(dims_.n)),
                  Mat(static_cast<Eigen::Index>(dims_.n), static_cast<Eigen::Index>(dims_.r)),
                  Vec(static_cast<Eigen::Index>(dims_.m))};
  drift_(x, u, out.drift);
  diffusion_(x, u, out.diffusion);
  output_(x, u, out.output);
  if (!out.drift.allFinite() || !out.diffusion.allFinite() || !out.output.allFinite()) {
    throw NonFinite(name_ + ": evaluator produced NaN or infinity");
  }
  return out;
}

FieldValues evaluate_fields(const ItoSystem& system, const Vec& x, const Vec& u) {
  return system.evaluate(x, u);
}

FeedbackLaw::FeedbackLaw(Mat gain) : gain_(std::move(gain)) {
  if (gain_.rows() == 0 || gain_.rows() != gain_.cols()) {
    throw DimensionMismatch("feedback gain must be a nonempty square matrix");
  }
  // symmetric_eigenvalues enforces symmetry.
  if (!(min_eigenvalue(gain_) > 0.0)) {
    throw NotPositiveDefinite("feedback gain K must be positive definite");
  }
  gain_ = 0.5 * (gain_ + gain_.transpose()).eval();
}

FeedbackLaw FeedbackLaw::scalar(double k) { return FeedbackLaw(Mat::Constant(1, 1, k)); }

ClosedSystem::ClosedSystem(ItoSystem base, FeedbackLaw law, FixedPointOptions options)
    : base_(std::move(base)), law_(std::move(law)), options_(options) {
  if (law_.dim() != base_.m()) {
    throw DimensionMismatch(base_.name() + ": feedback gain must be m x m with m = " +
                            std::to_string(base_.m()));
  }
  if (!(options_.damping > 0.0 && options_.damping <= 1.0) || !(options_.tol > 0.0) ||
      options_.max_iters < 1) {
    throw ValidationError("fixed-point options: need 0 < damping <= 1, tol > 0, max_iters >= 1");
  }
}

void ClosedSystem::resolve_input(const Vec& x, Vec& u) const {
  const Mat& K = law_.gain();
  const auto m = static_cast<Eigen::Index>(base_.m());
  Vec y(m);
  if (!base_.output_depends_on_input()) {
    u.setZero();
    base_.output(x, u, y);
    u.noalias() = -K * y;
    return;
  }
  u.setZero();
  Vec target(m);
  for (int it = 0; it < options_.max_iters; ++it) {
    base_.output(x, u, y);
    target.noalias() = -K * y;
    if ((u - target).norm() <= options_.tol) return;
    u = (1.0 - options_.damping) * u + options_.damping * target;
  }
  base_.output(x, u, y);
  const double residual = (u + K * y).norm();
  if (!(residual <= options_.tol)) {
    std::ostringstream os;
    os << base_.name() << ": implicit feedback did not converge (residual " << residual << " after "
       << options_.max_iters << " iterations)";
    throw NoFixedPoint(os.str());
  }
}

Vec ClosedSystem::resolve_input(const Vec& x) const {
  if (static_cast<std::size_t>(x.size()) != base_.n()) {
    throw DimensionMismatch(base_.name() + ": resolve_input called with wrong state size");
  }
  if (!x.allFinite()) throw NonFinite(base_.name() + ": non-finite state");
  Vec u(static_cast<Eigen::Index>(base_.m()));
  resolve_input(x, u);
  return u;
}

Vec resolve_implicit_input(const ClosedSystem& closed, const Vec& x) { return closed.resolve_input(x); }

ClosedSystem close_loop(const ItoSystem& system, const FeedbackLaw& law, FixedPointOptions options) {
  return ClosedSystem(system, law, options);
}

Plant::Plant(ClosedSystem closed) : impl_(std::move(closed)) {}

Plant::Plant(ItoSystem system, Vec fixed_input) : impl_(OpenLoop{std::move(system), std::move(fixed_input)}) {
  const auto& open = std::get<OpenLoop>(impl_);
  if (static_cast<std::size_t>(open.u.size()) != open.system.m()) {
    throw DimensionMismatch(open.system.name() + ": fixed input has wrong size");
  }
  if (!open.u.allFinite()) throw NonFinite(open.system.name() + ": fixed input is not finite");
}

Plant Plant::open_loop(ItoSystem system) {
  Vec u = Vec::Zero(static_cast<Eigen::Index>(system.m()));
  return Plant(std::move(system), std::move(u));
}

const ItoSystem& Plant::system() const {
  if (const auto* c = std::get_if<ClosedSystem>(&impl_)) return c->base();
  return std::get<OpenLoop>(impl_).system;
}

void Plant::input(const Vec& x, Vec& u) const {
  if (const auto* c = std::get_if<ClosedSystem>(&impl_)) {
    c->resolve_input(x, u);
  } else {
    u = std::get<OpenLoop>(impl_).u;
  }
}

Vec Plant::input(const Vec& x) const {
  Vec u(static_cast<Eigen::Index>(system().m()));
  input(x, u);
  return u;
}

void Plant::fields(const Vec& x, Vec& u, Vec& f, Mat& h) const {
  input(x, u);
  const ItoSystem& sys = system();
  sys.drift(x, u, f);
  sys.diffusion(x, u, h);
}

}  // namespace swpass
