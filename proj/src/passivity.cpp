#include "swpass/passivity.hpp"

#include "swpass/errors.hpp"
#include "swpass/linear_cert.hpp"
#include "swpass/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace swpass {

void ShellSpec::validate() const {
  if (center.size() == 0) throw DimensionMismatch("shell: empty center");
  if (!center.allFinite()) throw NonFinite("shell: non-finite center");
  if (!(inner_radius >= 0.0) || !(outer_radius > inner_radius) || !std::isfinite(outer_radius)) {
    throw DomainError("shell: need 0 <= inner_radius < outer_radius");
  }
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) throw DomainError("shell: epsilon must be >= 0");
  if (samples < 1) throw DomainError("shell: samples must be >= 1");
}

std::string to_string(StrictKind kind) {
  switch (kind) {
    case StrictKind::state: return "state";
    case StrictKind::input: return "input";
    case StrictKind::output: return "output";
  }
  return "state";
}

StrictKind strict_kind_from_string(const std::string& s) {
  if (s == "state") return StrictKind::state;
  if (s == "input") return StrictKind::input;
  if (s == "output") return StrictKind::output;
  throw ValidationError("strict kind must be one of state, input, output (got '" + s + "')");
}

namespace {

void check_dims(const Plant& plant, const Vec& center) {
  if (static_cast<std::size_t>(center.size()) != plant.system().n()) {
    throw DimensionMismatch("scan: center dimension differs from the system state dimension");
  }
}

struct Sample {
  double generator;
  double supply;  // u^T y
  double xi_sq;
  double value;
};

Sample evaluate_sample(const Plant& plant, const StorageFunction& V, const Vec& x, const Vec& center,
                       StrictKind kind) {
  const Vec u = plant.input(x);
  const FieldValues fv = plant.system().evaluate(x, u);
  const double value = V.value(x);
  if (!(value >= 0.0)) throw DomainError("scan: storage function is negative or NaN at a shell sample");
  double xi_sq = 0.0;
  switch (kind) {
    case StrictKind::state: xi_sq = (x - center).squaredNorm(); break;
    case StrictKind::input: xi_sq = u.squaredNorm(); break;
    case StrictKind::output: xi_sq = fv.output.squaredNorm(); break;
  }
  return {generator_apply(plant.system(), V, x, u), u.dot(fv.output), xi_sq, value};
}

PassivityReport scan(const Plant& plant, const StorageFunction& V, const ShellSpec& shell, StrictKind kind,
                     double delta, std::string condition) {
  shell.validate();
  check_dims(plant, shell.center);
  if (!(delta >= 0.0) || !std::isfinite(delta)) throw DomainError("strict scan: delta must be >= 0");

  PassivityReport report;
  report.shell = shell;
  report.condition = std::move(condition);
  report.delta = delta;

  const AnnulusSampler sampler(shell.center, shell.inner_radius, shell.outer_radius, shell.seed);
  const double v_center = V.value(shell.center);
  double worst = -std::numeric_limits<double>::infinity();
  double max_generator = -std::numeric_limits<double>::infinity();
  bool center_min = true;
  for (std::size_t i = 0; i < shell.samples; ++i) {
    const Vec x = sampler.point(i);
    const Sample s = evaluate_sample(plant, V, x, shell.center, kind);
    const double margin = s.generator - s.supply + delta * s.xi_sq;
    if (margin > worst) {
      worst = margin;
      report.worst_point = x;
    }
    max_generator = std::max(max_generator, s.generator);
    if (!(s.value > v_center) && (x - shell.center).norm() > 0.0) center_min = false;
  }
  report.worst_margin = worst;
  report.passivity_pass = worst <= 0.0;
  report.k_estimate = -max_generator;
  report.drift_rate_pass = report.k_estimate > 0.0;
  report.center_is_sampled_minimum = center_min;

  report.C_box = plant.system().domain();
  report.C_samples = shell.samples;
  report.C_estimate = generator_bound_scan(plant, V, report.C_box, shell.samples);

  report.rank_threshold = kDefaultRankThreshold;
  report.min_rank_eigenvalue = diffusion_rank_check(plant, shell.center, shell.inner_radius + shell.epsilon,
                                                    shell.samples, shell.seed);
  report.rank_pass = report.min_rank_eigenvalue > report.rank_threshold;
  return report;
}

}  // namespace

PassivityReport weak_passivity_scan(const Plant& plant, const StorageFunction& V, const ShellSpec& shell) {
  return scan(plant, V, shell, StrictKind::state, 0.0, "weak");
}

PassivityReport strict_weak_passivity_scan(const Plant& plant, const StorageFunction& V, const ShellSpec& shell,
                                           StrictKind kind, double delta) {
  return scan(plant, V, shell, kind, delta, "strict_" + to_string(kind));
}

double drift_rate_scan(const Plant& plant, const StorageFunction& V, const ShellSpec& shell) {
  shell.validate();
  check_dims(plant, shell.center);
  const AnnulusSampler sampler(shell.center, shell.inner_radius, shell.outer_radius, shell.seed);
  double max_generator = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < shell.samples; ++i) {
    max_generator = std::max(max_generator, generator_apply(plant, V, sampler.point(i)));
  }
  return -max_generator;
}

double generator_bound_scan(const Plant& plant, const StorageFunction& V, const Box& box, std::size_t samples) {
  validate_box(box, "generator_bound_scan");
  if (box.dim() != plant.system().n()) throw DimensionMismatch("generator_bound_scan: box dimension");
  double best = generator_apply(plant, V, box.center());
  for (std::size_t i = 0; i < samples; ++i) {
    best = std::max(best, generator_apply(plant, V, box_point(box, i)));
  }
  return best;
}

double diffusion_rank_check(const Plant& plant, const Vec& center, double radius, std::size_t samples,
                            std::uint64_t seed) {
  check_dims(plant, center);
  if (!(radius >= 0.0) || !std::isfinite(radius)) throw DomainError("rank check: radius must be >= 0");
  auto min_eig_at = [&](const Vec& x) {
    const FieldValues fv = plant.system().evaluate(x, plant.input(x));
    return min_eigenvalue(fv.diffusion * fv.diffusion.transpose());
  };
  double best = min_eig_at(center);
  if (radius > 0.0) {
    const AnnulusSampler sampler(center, 0.0, radius, seed);
    for (std::size_t i = 0; i < samples; ++i) best = std::min(best, min_eig_at(sampler.point(i)));
  }
  return best;
}

double bump_piece(int piece, double r, int deriv) {
  // Coefficients c0 + c1 r + c2 r^2 + c3 r^3 per piece. The middle piece
  // has constant term 1/12, the value that makes the profile continuous at
  // r = 1/2 and r = 3/2.
  static constexpr double kCoeff[4][4] = {
      {0.0, 0.0, 1.0, 0.0},
      {1.0 / 12.0, -0.5, 2.0, -2.0 / 3.0},
      {-79.0 / 24.0, 25.0 / 4.0, -5.0 / 2.0, 1.0 / 3.0},
      {23.0 / 12.0, 0.0, 0.0, 0.0},
  };
  if (piece < 0 || piece > 3) throw DomainError("bump_piece: piece must be 0..3");
  const double* c = kCoeff[piece];
  switch (deriv) {
    case 0: return c[0] + r * (c[1] + r * (c[2] + r * c[3]));
    case 1: return c[1] + r * (2.0 * c[2] + 3.0 * r * c[3]);
    case 2: return 2.0 * c[2] + 6.0 * r * c[3];
    default: throw DomainError("bump_piece: deriv must be 0, 1 or 2");
  }
}

double bump_profile(double r, int deriv) {
  r = std::abs(r);
  if (r <= 0.5) return bump_piece(0, r, deriv);
  if (r <= 1.5) return bump_piece(1, r, deriv);
  if (r <= 2.5) return bump_piece(2, r, deriv);
  return bump_piece(3, r, deriv);
}

StorageFunction bump_storage(Vec center) {
  auto value = [center](const Vec& x) { return kBumpScale * bump_profile((x - center).norm()); };
  auto gradient = [center](const Vec& x) -> Vec {
    const Vec d = x - center;
    const double r = d.norm();
    if (r <= 0.5) return kBumpScale * 2.0 * d;
    return kBumpScale * bump_profile(r, 1) / r * d;
  };
  auto hessian = [center](const Vec& x) -> Mat {
    const Vec d = x - center;
    const Eigen::Index n = d.size();
    const double r = d.norm();
    if (r <= 0.5) return kBumpScale * 2.0 * Mat::Identity(n, n);
    const Vec e = d / r;
    const Mat radial = e * e.transpose();
    return kBumpScale * (bump_profile(r, 2) * radial + bump_profile(r, 1) / r * (Mat::Identity(n, n) - radial));
  };
  return StorageFunction(value, gradient, hessian);
}

double instability_witness(const Plant& plant, const Vec& x_dagger) {
  check_dims(plant, x_dagger);
  return generator_apply(plant, bump_storage(x_dagger), x_dagger);
}

}  // namespace swpass
