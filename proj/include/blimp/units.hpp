#pragma once

#include <numbers>

// Internal computation is strictly SI. Gram-force, millimetres and degrees
// appear only in configuration files and logs.
namespace blimp::units {

inline constexpr double kGramForce = 9.80665e-3;  // N per gf
inline constexpr double kStandardGravity = 9.80665;

constexpr double gfToNewton(double gf) { return gf * kGramForce; }
constexpr double newtonToGf(double newton) { return newton / kGramForce; }
constexpr double gramToKg(double g) { return g * 1e-3; }
constexpr double mmToM(double mm) { return mm * 1e-3; }
constexpr double mToMm(double m) { return m * 1e3; }
constexpr double degToRad(double deg) { return deg * std::numbers::pi / 180.0; }
constexpr double radToDeg(double rad) { return rad * 180.0 / std::numbers::pi; }

/// Wraps an angle to (-pi, pi].
double wrapAngle(double angle);

}  // namespace blimp::units
