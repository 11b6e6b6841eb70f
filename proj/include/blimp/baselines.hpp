#pragma once

#include "blimp/controller_mpc.hpp"
#include "blimp/estimator_mhe.hpp"

namespace blimp {

inline constexpr double kLaunchThrustGf = 10.0;

/// Constant 10 gf thrust with a straight arm.
ControlInput openLoop(double t);

struct PidLoopGains {
  double kp = 0.0;
  double ki = 0.0;
  double kd = 0.0;
};

/// Two independent loops: yaw error drives delta_y, altitude error drives
/// delta_x. Thrust stays at `thrust`.
struct PidGains {
  PidLoopGains yaw;
  PidLoopGains altitude;
  double thrust = units::gfToNewton(kLaunchThrustGf);
  double integrator_limit = 0.02;     // m of deflection
  double derivative_filter = 0.1;     // s, first-order filter time constant
  InputLimits limits;

  /// Frozen gain set used by the campaign presets.
  static PidGains tuned();
};

struct PidState {
  double yaw_integral = 0.0;
  double altitude_integral = 0.0;
  double yaw_derivative = 0.0;
  double altitude_derivative = 0.0;
  bool has_previous = false;
  double previous_yaw = 0.0;
  double previous_altitude = 0.0;
};

struct PidOutput {
  ControlInput input;
  PidState state;
};

/// One PID update from a pose measurement. Derivative acts on the
/// measurement; the integrator is clamped for anti-windup.
PidOutput pidStep(const Measurement& measurement, const Reference& reference, double dt,
                  const PidState& state, const PidGains& gains);

}  // namespace blimp
