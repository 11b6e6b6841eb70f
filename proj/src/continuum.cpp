#include "blimp/continuum.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace blimp {

double Deflection::norm() const { return std::hypot(x, y); }

void ContinuumGeometry::validate(double deflection_limit) const {
  if (!(backbone_length > 0.0) || !(cable_offset > 0.0) || !(base_offset >= 0.0) ||
      !std::isfinite(backbone_length) || !std::isfinite(cable_offset) ||
      !std::isfinite(base_offset)) {
    throw std::invalid_argument("continuum geometry requires L > 0, d > 0, h >= 0");
  }
  // The box corner has the largest |q|.
  const double worst = std::sqrt(2.0) * deflection_limit / cable_offset;
  if (worst > std::numbers::pi / 2.0) {
    throw std::invalid_argument(
        "cable offset too small: arc angle exceeds pi/2 inside the actuation box");
  }
}

Deflection cableToQ(const CableLengths& lengths) {
  for (double l : {lengths.l1, lengths.l2, lengths.l3}) {
    if (!std::isfinite(l) || !(l > 0.0)) {
      throw std::invalid_argument("cable lengths must be finite and positive");
    }
  }
  return {(lengths.l2 + lengths.l3 - 2.0 * lengths.l1) / 3.0,
          std::sqrt(3.0) / 3.0 * (lengths.l3 - lengths.l2)};
}

ArcShape qToArc(const Deflection& q, const ContinuumGeometry& geometry) {
  const double delta = q.norm();
  if (delta == 0.0) return {0.0, 0.0};
  double direction = std::atan2(q.y, q.x);
  if (direction >= std::numbers::pi) direction -= 2.0 * std::numbers::pi;
  return {direction, delta / geometry.cable_offset};
}

Eigen::Vector3d massPosition(const Deflection& q, const ContinuumGeometry& geometry) {
  const double length = geometry.backbone_length;
  const double d = geometry.cable_offset;
  const double delta = q.norm();
  const double angle = delta / d;
  if (angle > std::numbers::pi / 2.0) {
    throw std::domain_error("arc angle outside the constant-curvature range [0, pi/2]");
  }

  Eigen::Vector3d tip;
  if (delta < kSeriesThreshold) {
    // 1 - cos(a) ~ a^2/2 and sin(a) ~ a - a^3/6 with a = delta/d.
    const double lateral = length / (2.0 * d);
    tip << lateral * q.x, lateral * q.y, length * (1.0 - delta * delta / (6.0 * d * d));
  } else {
    const double half_sin = std::sin(0.5 * angle);
    const double one_minus_cos = 2.0 * half_sin * half_sin;
    const double scale = length * d / (delta * delta);
    tip << scale * q.x * one_minus_cos, scale * q.y * one_minus_cos,
        scale * delta * std::sin(angle);
  }
  tip.z() += geometry.base_offset;
  return tip;
}

}  // namespace blimp
