#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/LU>

#include "blimp/config.hpp"

namespace blimp::test {

inline std::string configPath(const std::string& relative) {
  return std::string(BLIMP_CONFIG_DIR) + "/" + relative;
}

inline const PlantParameters& defaultPlant() {
  static const PlantParameters plant = loadPlantFile(configPath("plant_default.json"));
  return plant;
}

/// Plant with every aerodynamic coefficient and damping gain set to zero.
inline PlantParameters conservativePlant() {
  PlantParameters p = defaultPlant();
  p.aero = AeroModel{};
  p.aero.cd0 = p.aero.cd_alpha2 = p.aero.cd_beta2 = p.aero.cs_beta = 0.0;
  p.aero.cl0 = p.aero.cl_alpha = 0.0;
  p.aero.ctx_beta = p.aero.cty_alpha = p.aero.ctz_beta = 0.0;
  p.aero.damping.setZero();
  return p;
}

/// Arc-integration oracle for the tip position: the backbone tangent turns
/// at constant rate in the bending plane; midpoint rule over `segments`.
inline Eigen::Vector3d integrateArc(double direction, double angle, double length, double base,
                                    int segments) {
  Eigen::Vector3d p(0.0, 0.0, base);
  const double ds = length / segments;
  const double kappa = angle / length;
  for (int i = 0; i < segments; ++i) {
    const double s = (i + 0.5) * ds;
    const double a = kappa * s;
    p += ds * Eigen::Vector3d(std::cos(direction) * std::sin(a),
                              std::sin(direction) * std::sin(a), std::cos(a));
  }
  return p;
}

/// Total mechanical energy of the conservative subsystem.
inline double mechanicalEnergy(const State& s, const ControlInput& u, const PlantParameters& p) {
  const Matrix6 m = massMatrix(u.deflection, p);
  Vector6 nu;
  nu << s.velocity, s.rates;
  const Vector3 lg = totalCom(u.deflection, p);
  const double g = p.inertial.gravity;
  const Matrix3 r = rotationMatrix(s.attitude);
  return 0.5 * nu.dot(m * nu) - p.netWeight() * s.position.z() -
         g * Vector3::UnitZ().dot(r * lg);
}

}  // namespace blimp::test

namespace blimp::test {

struct WindTrackPoint {
  double t = 0.0;
  Vector3 estimate = Vector3::Zero();
};

/// Flies the nominal plant from rest in a constant wind with a persistently
/// exciting open-loop input, stepping the truth with the estimator's own
/// discretisation, and returns the wind estimate after every solve.
inline std::vector<WindTrackPoint> trackConstantWind(const Vector3& wind,
                                                     const MeasurementNoise& noise,
                                                     std::uint64_t seed, double seconds) {
  const PlantParameters& plant = defaultPlant();
  MheConfig config;
  State truth;
  truth.position = Vector3(0.0, 0.0, 1.5);
  MovingHorizonEstimator mhe(plant, config, truth);
  MeasurementModel sensor(noise, seed);
  std::vector<WindTrackPoint> out;
  ControlInput u;
  mhe.push(sensor.measure(truth, 0.0), u);
  const int steps = static_cast<int>(std::lround(seconds / config.dt));
  for (int k = 0; k < steps; ++k) {
    const double t = k * config.dt;
    u = {units::gfToNewton(10.0), {0.005 * std::cos(1.3 * t), 0.01 * std::sin(2.0 * t)}};
    truth = discreteStep(truth, u, wind, plant, config.dt);
    const double next = (k + 1) * config.dt;
    mhe.push(sensor.measure(truth, next), u);
    out.push_back({next, mhe.update()->wind});
  }
  return out;
}

}  // namespace blimp::test

namespace blimp::test {

/// Level straight flight at the given thrust: solves for forward speed,
/// vertical body speed, pitch and the fore-aft deflection so that the
/// longitudinal accelerations and the climb rate vanish (Newton iteration
/// with a difference Jacobian).
struct LevelTrim {
  State state;
  ControlInput input;
  double residual = 0.0;
};

inline LevelTrim levelTrim(double thrust_gf, const PlantParameters& p) {
  auto unpack = [&](const Eigen::Vector4d& z) {
    LevelTrim t;
    t.state.position = Vector3(0.0, 0.0, 1.5);
    t.state.velocity = Vector3(z[0], 0.0, z[1]);
    t.state.attitude = Vector3(0.0, z[2], 0.0);
    t.input = {units::gfToNewton(thrust_gf), {z[3], 0.0}};
    return t;
  };
  auto residual = [&](const Eigen::Vector4d& z) {
    const LevelTrim t = unpack(z);
    const StateVector d = continuousDynamics(t.state, t.input, Vector3::Zero(), p);
    return Eigen::Vector4d(d[6], d[8], d[10], d[2]);
  };
  Eigen::Vector4d z(1.0, 0.05, 0.0, 0.0);
  for (int it = 0; it < 60; ++it) {
    const Eigen::Vector4d r = residual(z);
    Eigen::Matrix4d jac;
    for (int c = 0; c < 4; ++c) {
      Eigen::Vector4d zp = z;
      zp[c] += 1e-7;
      jac.col(c) = (residual(zp) - r) / 1e-7;
    }
    z -= jac.fullPivLu().solve(r);
  }
  LevelTrim t = unpack(z);
  t.residual = residual(z).norm();
  return t;
}

}  // namespace blimp::test
