#include "swpass/sampling.hpp"

#include "swpass/errors.hpp"
#include "swpass/rng.hpp"

#include <array>
#include <cmath>

namespace swpass {

namespace {

constexpr std::array<unsigned, 32> kPrimes{2,  3,  5,  7,  11, 13, 17, 19, 23, 29, 31,  37,  41,  43,  47,  53,
                                           59, 61, 67, 71, 73, 79, 83, 89, 97, 101, 103, 107, 109, 113, 127, 131};

}  // namespace

double radical_inverse(std::uint64_t index, unsigned base) {
  const double inv_base = 1.0 / base;
  double inv = inv_base;
  double result = 0.0;
  while (index > 0) {
    result += static_cast<double>(index % base) * inv;
    index /= base;
    inv *= inv_base;
  }
  return result;
}

Vec halton_point(std::uint64_t index, std::size_t dim) {
  if (dim == 0 || dim > kPrimes.size()) throw DimensionMismatch("halton_point: dimension must be in [1, 32]");
  Vec p(static_cast<Eigen::Index>(dim));
  for (std::size_t d = 0; d < dim; ++d) p(static_cast<Eigen::Index>(d)) = radical_inverse(index, kPrimes[d]);
  return p;
}

Vec box_point(const Box& box, std::uint64_t index) {
  const Vec u = halton_point(index, box.dim());
  return box.lo + (box.hi - box.lo).cwiseProduct(u);
}

AnnulusSampler::AnnulusSampler(Vec center, double inner, double outer, std::uint64_t seed)
    : center_(std::move(center)), inner_(inner), outer_(outer), seed_(seed) {
  if (center_.size() == 0) throw DimensionMismatch("annulus: empty center");
  if (!center_.allFinite()) throw NonFinite("annulus: non-finite center");
  if (!(inner_ >= 0.0) || !(outer_ > inner_) || !std::isfinite(outer_)) {
    throw DomainError("annulus: need 0 <= inner < outer < infinity");
  }
}

Vec AnnulusSampler::point(std::uint64_t index) const {
  const auto n = static_cast<double>(center_.size());
  const double v = radical_inverse(index, 2);
  const double lo = std::pow(inner_, n);
  const double hi = std::pow(outer_, n);
  const double radius = std::pow(lo + v * (hi - lo), 1.0 / n);

  CounterRng rng(split_seed(seed_, index));
  Vec dir(center_.size());
  double norm = 0.0;
  do {
    for (Eigen::Index i = 0; i < dir.size(); ++i) dir(i) = rng.normal();
    norm = dir.norm();
  } while (!(norm > 0.0));
  return center_ + (radius / norm) * dir;
}

}  // namespace swpass
