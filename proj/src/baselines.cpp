#include "blimp/baselines.hpp"

#include <algorithm>
#include <stdexcept>

namespace blimp {

ControlInput openLoop(double) { return {units::gfToNewton(kLaunchThrustGf), {0.0, 0.0}}; }

PidGains PidGains::tuned() {
  PidGains g;
  // Best score of tools/tune_pid on the no-wind scenario.
  g.yaw = {0.2, 0.1, 0.2};
  g.altitude = {1.0, 0.2, 0.1};
  return g;
}

PidOutput pidStep(const Measurement& measurement, const Reference& reference, double dt,
                  const PidState& state, const PidGains& gains) {
  if (!(dt > 0.0)) throw std::invalid_argument("PID time step must be positive");
  PidState next = state;
  const double yaw = measurement.attitude.z();
  const double altitude = measurement.position.z();
  const double yaw_error = units::wrapAngle(reference.yaw - yaw);
  const double altitude_error = reference.altitude - altitude;

  const double limit = gains.integrator_limit;
  next.yaw_integral = std::clamp(state.yaw_integral + gains.yaw.ki * yaw_error * dt, -limit, limit);
  next.altitude_integral = std::clamp(
      state.altitude_integral + gains.altitude.ki * altitude_error * dt, -limit, limit);

  if (state.has_previous) {
    const double blend = dt / (gains.derivative_filter + dt);
    const double yaw_rate = -units::wrapAngle(yaw - state.previous_yaw) / dt;
    const double altitude_rate = -(altitude - state.previous_altitude) / dt;
    next.yaw_derivative += blend * (yaw_rate - state.yaw_derivative);
    next.altitude_derivative += blend * (altitude_rate - state.altitude_derivative);
  }
  next.has_previous = true;
  next.previous_yaw = yaw;
  next.previous_altitude = altitude;

  const double delta_y = gains.yaw.kp * yaw_error + next.yaw_integral +
                         gains.yaw.kd * next.yaw_derivative;
  const double delta_x = gains.altitude.kp * altitude_error + next.altitude_integral +
                         gains.altitude.kd * next.altitude_derivative;
  const ControlInput raw{gains.thrust, {delta_x, delta_y}};
  return {gains.limits.clamp(raw), next};
}

}  // namespace blimp
