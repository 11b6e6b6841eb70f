#pragma once

#include <Eigen/Core>

namespace blimp {

/// Lengths of the three driving cables of the continuum arm [m].
struct CableLengths {
  double l1 = 0.0;
  double l2 = 0.0;
  double l3 = 0.0;
};

/// q-parameters of the continuum arm [m]; the arm configuration is fully
/// described by these two numbers under the constant-curvature assumption.
struct Deflection {
  double x = 0.0;
  double y = 0.0;

  double norm() const;
  bool operator==(const Deflection&) const = default;
};

/// Fixed geometry of the moving-mass mechanism.
///
/// `base_offset` is the vertical distance of the arm base below the centre
/// of buoyancy; it is also the moment arm of the propeller thrust. There are
/// no built-in values: the plant configuration file must provide them.
struct ContinuumGeometry {
  double backbone_length = 0.0;
  double cable_offset = 0.0;
  double base_offset = 0.0;

  /// Throws std::invalid_argument unless lengths are positive and the arc
  /// angle stays within [0, pi/2] for every deflection with
  /// |x|, |y| <= deflection_limit.
  void validate(double deflection_limit) const;
};

/// Bending plane and total turn of the backbone arc.
struct ArcShape {
  double bending_direction = 0.0;  // [-pi, pi)
  double arc_angle = 0.0;
};

inline constexpr double kDeflectionLimit = 0.045;  // actuation box [m]
inline constexpr double kSeriesThreshold = 1e-6;   // below this |q| the series form is used [m]

/// Maps cable lengths to q-parameters. Throws std::invalid_argument on
/// non-positive or non-finite lengths.
Deflection cableToQ(const CableLengths& lengths);

/// Bending direction and arc angle of the backbone. The direction of a
/// straight arm is reported as 0.
ArcShape qToArc(const Deflection& q, const ContinuumGeometry& geometry);

/// Position of the tip mass relative to the centre of buoyancy, body frame.
/// Throws std::domain_error when the arc angle exceeds pi/2.
Eigen::Vector3d massPosition(const Deflection& q, const ContinuumGeometry& geometry);

}  // namespace blimp
