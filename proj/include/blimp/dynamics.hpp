#pragma once

#include <stdexcept>

#include <Eigen/Core>
#include <Eigen/Cholesky>
#include <Eigen/Geometry>

#include "blimp/continuum.hpp"

namespace blimp {

using Vector3 = Eigen::Vector3d;
using Matrix3 = Eigen::Matrix3d;
using Vector6 = Eigen::Matrix<double, 6, 1>;
using Matrix6 = Eigen::Matrix<double, 6, 6>;
using StateVector = Eigen::Matrix<double, 12, 1>;

/// Raised when the model is evaluated outside its domain (Euler singularity,
/// singular mass matrix, non-finite integration result).
class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SingularAttitude : public ModelError {
 public:
  using ModelError::ModelError;
};

/// Rigid-body state. The inertial frame has z pointing along gravity; the
/// body frame is forward-right-down with its origin at the centre of
/// buoyancy. Attitude is roll, pitch, yaw (ZYX sequence).
struct State {
  Vector3 position = Vector3::Zero();
  Vector3 attitude = Vector3::Zero();
  Vector3 velocity = Vector3::Zero();  // body frame
  Vector3 rates = Vector3::Zero();     // body frame

  StateVector toVector() const;
  static State fromVector(const StateVector& x);
  bool isFinite() const;
};

/// Thrust [N] along body x plus the moving-mass deflection.
struct ControlInput {
  double thrust = 0.0;
  Deflection deflection;

  bool operator==(const ControlInput&) const = default;
};

struct InertialParams {
  double stationary_mass = 0.1087;  // kg
  double moving_mass = 0.0922;      // kg
  double buoyancy = 0.1942 * 9.80665;  // N
  double gravity = 9.80665;
  Matrix3 inertia = Eigen::Vector3d(0.006, 0.010, 0.012).asDiagonal();
  Vector3 stationary_com = Vector3(0.0, 0.0, 0.03);
  double air_density = 1.225;
  double reference_area = 0.4;
};

struct AeroCoefficients {
  double drag = 0.0;
  double side = 0.0;
  double lift = 0.0;
  Vector3 moment = Vector3::Zero();
};

/// Affine-in-angle coefficient model plus constant body-rate damping.
/// Angles are saturated to [-pi/2, pi/2] before evaluation.
struct AeroModel {
  double cd0 = 0.36;
  double cd_alpha2 = 2.0;
  double cd_beta2 = 1.5;
  double cs_beta = -1.0;
  double cl0 = 0.12;
  double cl_alpha = 2.0;
  double ctx0 = 0.0;
  double ctx_beta = -0.05;
  double cty0 = 0.0;
  double cty_alpha = -0.2;
  double ctz0 = 0.0;
  double ctz_beta = 0.10;
  Vector3 damping = Vector3(-0.010, -0.020, -0.020);  // N m s / rad

  AeroCoefficients coefficients(double alpha, double beta) const;
};

struct PlantParameters {
  InertialParams inertial;
  ContinuumGeometry geometry;
  AeroModel aero;

  /// Throws std::invalid_argument on physically invalid values.
  void validate() const;
  /// (m + m_bar) g - B [N].
  double netWeight() const;
};

struct FlowAngles {
  double alpha = 0.0;
  double beta = 0.0;
  double airspeed = 0.0;
  bool no_flow = true;
};

struct Wrench {
  Vector3 force = Vector3::Zero();
  Vector3 torque = Vector3::Zero();
};

inline constexpr double kPitchMargin = 1e-3;    // rad from +-pi/2
inline constexpr double kNoFlowAirspeed = 1e-3;  // m/s

Matrix3 skew(const Vector3& v);

/// Body-to-inertial rotation, R = Rz(yaw) Ry(pitch) Rx(roll).
Matrix3 rotationMatrix(const Vector3& euler);

/// W(e) such that de/dt = W(e) * rates. Throws SingularAttitude near
/// |pitch| = pi/2.
Matrix3 eulerRateMatrix(const Vector3& euler);

/// Air-relative velocity in the body frame, v_b - R^T v_w.
Vector3 relativeVelocity(const State& state, const Vector3& wind);

FlowAngles aeroAngles(const Vector3& air_velocity);

/// Aerodynamic force and moment in the body frame. The flow-frame wrench is
/// rotated by Ry(-alpha) Rz(beta); the rate damping is added in body axes.
Wrench aeroWrench(const FlowAngles& flow, const Vector3& rates, const AeroModel& model,
                  double air_density, double reference_area);

/// m r + m_bar r_bar(q).
Vector3 totalCom(const Deflection& q, const PlantParameters& params);

/// Generalized mass matrix; throws ModelError if it is not positive definite.
Matrix6 massMatrix(const Deflection& q, const PlantParameters& params);

/// Right-hand side of the momentum equations.
Wrench generalizedForces(const State& state, const ControlInput& input, const Vector3& wind,
                         const PlantParameters& params);

StateVector continuousDynamics(const State& state, const ControlInput& input,
                               const Vector3& wind, const PlantParameters& params);

/// One RK4 step with the input and wind held constant.
State discreteStep(const State& state, const ControlInput& input, const Vector3& wind,
                   const PlantParameters& params, double dt);

/// Dynamics with the input frozen: the mass matrix, its inverse and the
/// moving-mass geometry are computed once and reused for every evaluation.
/// This is the hot path of every rollout.
class FrozenInputDynamics {
 public:
  FrozenInputDynamics(const PlantParameters& params, const ControlInput& input);

  StateVector derivative(const StateVector& x, const Vector3& wind) const;
  StateVector step(const StateVector& x, const Vector3& wind, double dt) const;

 private:
  const PlantParameters* params_;
  double thrust_;
  Vector3 mass_position_;
  Vector3 com_moment_;
  Matrix3 rotational_inertia_;
  Matrix6 inverse_mass_;
};

}  // namespace blimp
