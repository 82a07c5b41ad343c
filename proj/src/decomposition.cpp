#include "swpass/decomposition.hpp"

#include "swpass/errors.hpp"
#include "swpass/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace swpass {

void AffineDecomposition::validate() const {
  if (T.rows() == 0 || T.rows() != T.cols()) throw DimensionMismatch("decomposition: T must be square");
  if (b.size() != T.rows()) throw DimensionMismatch("decomposition: b must have n entries");
  if (n1 < 1 || n1 >= n()) throw DimensionMismatch("decomposition: need 1 <= n1 < n");
  if (!T.allFinite() || !b.allFinite()) throw NonFinite("decomposition: non-finite map");
  Eigen::FullPivLU<Mat> lu(T);
  if (!lu.isInvertible()) throw SingularSystem("decomposition: T is not invertible");
}

Vec AffineDecomposition::inverse(const Vec& xbar) const { return T.fullPivLu().solve(xbar - b); }

double AffineDecomposition::condition_number() const {
  Eigen::JacobiSVD<Mat> svd(T);
  const auto& s = svd.singularValues();
  return s(0) / s(s.size() - 1);
}

Decomposition build_decomposition(const ItoSystem& system, const AffineDecomposition& map, const Vec& xbar2_fixed,
                                  const Box& sub_domain, std::size_t samples, double tol) {
  map.validate();
  if (map.n() != system.n()) throw DimensionMismatch("decomposition: T must be n x n for the system");
  if (static_cast<std::size_t>(xbar2_fixed.size()) != map.n2()) {
    throw DimensionMismatch("decomposition: xbar2_fixed must have n - n1 entries");
  }
  validate_box(sub_domain, "decomposition sub-domain");
  if (sub_domain.dim() != map.n1) throw DimensionMismatch("decomposition: sub-domain must be n1-dimensional");

  const auto n1 = static_cast<Eigen::Index>(map.n1);
  const auto n2 = static_cast<Eigen::Index>(map.n2());
  const Mat T = map.T;
  const Mat Tinv = T.fullPivLu().inverse();
  const Vec b = map.b;
  const Vec xbar2 = xbar2_fixed;
  auto to_original = [Tinv, b, xbar2, n1, n2](const Vec& xbar1) -> Vec {
    Vec xbar(n1 + n2);
    xbar << xbar1, xbar2;
    return Tinv * (xbar - b);
  };

  // Frozen-row residual on sub_domain x [-1, 1]^m.
  const ItoSystem& base = system;
  const auto m = static_cast<Eigen::Index>(system.m());
  double worst = 0.0;
  Box grid{Vec(n1 + m), Vec(n1 + m)};
  grid.lo << sub_domain.lo, Vec::Constant(m, -1.0);
  grid.hi << sub_domain.hi, Vec::Constant(m, 1.0);
  const std::size_t count = std::max<std::size_t>(samples, 1);
  for (std::size_t i = 0; i < count; ++i) {
    const Vec p = i == 0 ? grid.center() : box_point(grid, i);
    const Vec x = to_original(p.head(n1));
    const FieldValues fv = base.evaluate(x, p.tail(m));
    const Vec tf = T * fv.drift;
    const Mat th = T * fv.diffusion;
    worst = std::max(worst, tf.tail(n2).cwiseAbs().maxCoeff());
    worst = std::max(worst, th.bottomRows(n2).cwiseAbs().maxCoeff());
  }

  DecompositionReport report{worst, tol, count, map.condition_number()};
  if (!(worst <= tol)) {
    std::ostringstream os;
    os << system.name() << ": not a decomposition, frozen-block residual " << worst << " exceeds " << tol;
    throw NotDecomposition(os.str());
  }

  const Dimensions dims{map.n1, system.m(), system.r()};
  ItoSystem sub(
      system.name() + "_subS", dims,
      [base, T, to_original, n1](const Vec& xb, const Vec& u, Vec& f) {
        const Vec x = to_original(xb);
        Vec full(x.size());
        base.drift(x, u, full);
        f = (T * full).head(n1);
      },
      [base, T, to_original, n1](const Vec& xb, const Vec& u, Mat& h) {
        const Vec x = to_original(xb);
        Mat full(x.size(), static_cast<Eigen::Index>(base.r()));
        base.diffusion(x, u, full);
        h = (T * full).topRows(n1);
      },
      [base, to_original](const Vec& xb, const Vec& u, Vec& y) { base.output(to_original(xb), u, y); },
      system.output_depends_on_input(), sub_domain);
  return Decomposition{std::move(sub), map, xbar2_fixed, report};
}

InvariantCheck verify_invariant_coordinate(const Trajectory& traj, const AffineDecomposition& map, double tol) {
  map.validate();
  InvariantCheck out;
  if (traj.size() == 0) {
    out.pass = true;
    return out;
  }
  if (static_cast<std::size_t>(traj.states.rows()) != map.n()) {
    throw DimensionMismatch("invariant check: trajectory dimension differs from the map");
  }
  const auto n2 = static_cast<Eigen::Index>(map.n2());
  const Mat lower = map.T.bottomRows(n2);
  const Vec b2 = map.b.tail(n2);
  const Vec start = lower * traj.states.col(0) + b2;
  for (Eigen::Index i = 0; i < traj.states.cols(); ++i) {
    const Vec cur = lower * traj.states.col(i) + b2;
    out.max_drift = std::max(out.max_drift, (cur - start).cwiseAbs().maxCoeff());
  }
  out.pass = out.max_drift <= tol;
  return out;
}

LiftedMeasure::LiftedMeasure(HistogramMeasure sub, AffineDecomposition map, Vec xbar2_fixed)
    : sub_(std::move(sub)), map_(std::move(map)), xbar2_(std::move(xbar2_fixed)) {
  map_.validate();
  if (sub_.dim() != map_.n1) throw GridMismatch("lift: sub-measure must live on the n1-dimensional block");
  if (static_cast<std::size_t>(xbar2_.size()) != map_.n2()) {
    throw DimensionMismatch("lift: xbar2_fixed must have n - n1 entries");
  }
}

Vec LiftedMeasure::lift_point(const Vec& xbar1) const {
  Vec xbar(static_cast<Eigen::Index>(map_.n()));
  xbar << xbar1, xbar2_;
  return map_.inverse(xbar);
}

Vec LiftedMeasure::support_point(std::size_t bin) const { return lift_point(sub_.bin_center(bin)); }

double LiftedMeasure::measure_of_box(const Box& box) const {
  validate_box(box, "lifted measure query");
  if (box.dim() != map_.n()) throw DimensionMismatch("lifted measure query: box must be n-dimensional");
  double total = 0.0;
  for (std::size_t bin = 0; bin < sub_.total_bins(); ++bin) {
    const double w = sub_.mass()[bin];
    if (w == 0.0) continue;
    if (map_.n1 != 1) {
      if (box.contains(support_point(bin))) total += w;
      continue;
    }
    // x(s) = p0 + s * dir is affine in the scalar subsystem coordinate.
    const double lo = sub_.bin_lo(bin)(0);
    const double hi = sub_.bin_hi(bin)(0);
    const Vec p_lo = lift_point(Vec::Constant(1, lo));
    const Vec p_hi = lift_point(Vec::Constant(1, hi));
    double s0 = 0.0;
    double s1 = 1.0;
    for (Eigen::Index i = 0; i < p_lo.size() && s0 <= s1; ++i) {
      const double a = p_lo(i);
      const double c = p_hi(i) - p_lo(i);
      if (std::abs(c) < 1e-300) {
        if (a < box.lo(i) || a > box.hi(i)) s1 = -1.0;
        continue;
      }
      double t0 = (box.lo(i) - a) / c;
      double t1 = (box.hi(i) - a) / c;
      if (t0 > t1) std::swap(t0, t1);
      s0 = std::max(s0, t0);
      s1 = std::min(s1, t1);
    }
    if (s1 > s0) total += w * (s1 - s0);
  }
  return total;
}

double LiftedMeasure::total_mass() const {
  double sum = sub_.out_of_box_mass();
  for (double w : sub_.mass()) sum += w;
  return sum;
}

LiftedMeasure lift_measure(const HistogramMeasure& sub, const AffineDecomposition& map, const Vec& xbar2_fixed) {
  return LiftedMeasure(sub, map, xbar2_fixed);
}

}  // namespace swpass
