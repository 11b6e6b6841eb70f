#include "blimp/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/LU>

namespace blimp {

namespace {

constexpr double kHalfPi = std::numbers::pi / 2.0;

// Flow-to-body rotation Ry(-alpha) Rz(beta), expanded.
Matrix3 flowToBody(double alpha, double beta) {
  const double ca = std::cos(alpha), sa = std::sin(alpha);
  const double cb = std::cos(beta), sb = std::sin(beta);
  Matrix3 r;
  r << ca * cb, -ca * sb, -sa,
       sb, cb, 0.0,
       sa * cb, -sa * sb, ca;
  return r;
}

Matrix3 rotationalInertia(const Vector3& mass_position, const PlantParameters& params) {
  const Matrix3 r = skew(mass_position);
  return params.inertial.inertia - params.inertial.moving_mass * r * r;
}

Matrix6 assembleMassMatrix(const Vector3& com_moment, const Matrix3& rotational,
                           double total_mass) {
  Matrix6 m;
  const Matrix3 l = skew(com_moment);
  m.topLeftCorner<3, 3>() = total_mass * Matrix3::Identity();
  m.topRightCorner<3, 3>() = -l;
  m.bottomLeftCorner<3, 3>() = l;
  m.bottomRightCorner<3, 3>() = rotational;
  return m;
}

// Momentum-equation right-hand side shared by the reference and hot paths.
Vector6 momentumRhs(const Matrix3& rotation, const Vector3& velocity, const Vector3& rates,
                    const Vector3& wind, double thrust, const Vector3& com_moment,
                    const Matrix3& rotational, const PlantParameters& params) {
  const InertialParams& in = params.inertial;
  const Vector3 down_body = rotation.row(2).transpose();  // R^T e_z
  const Vector3 air = velocity - rotation.transpose() * wind;
  const Wrench aero =
      aeroWrench(aeroAngles(air), rates, params.aero, in.air_density, in.reference_area);

  const double total_mass = in.stationary_mass + in.moving_mass;
  const Vector3 v_cross_w = velocity.cross(rates);

  Vector6 rhs;
  rhs.head<3>() = total_mass * v_cross_w + rates.cross(com_moment).cross(rates) +
                  (total_mass * in.gravity - in.buoyancy) * down_body + aero.force +
                  thrust * Vector3::UnitX();
  rhs.tail<3>() = com_moment.cross(v_cross_w) + (rotational * rates).cross(rates) +
                  com_moment.cross(in.gravity * down_body) + aero.torque +
                  thrust * params.geometry.base_offset * Vector3::UnitY();
  return rhs;
}

}  // namespace

StateVector State::toVector() const {
  StateVector x;
  x << position, attitude, velocity, rates;
  return x;
}

State State::fromVector(const StateVector& x) {
  return {x.segment<3>(0), x.segment<3>(3), x.segment<3>(6), x.segment<3>(9)};
}

bool State::isFinite() const { return toVector().allFinite(); }

AeroCoefficients AeroModel::coefficients(double alpha, double beta) const {
  const double a = std::clamp(alpha, -kHalfPi, kHalfPi);
  const double b = std::clamp(beta, -kHalfPi, kHalfPi);
  AeroCoefficients c;
  c.drag = cd0 + cd_alpha2 * a * a + cd_beta2 * b * b;
  c.side = cs_beta * b;
  c.lift = cl0 + cl_alpha * a;
  c.moment << ctx0 + ctx_beta * b, cty0 + cty_alpha * a, ctz0 + ctz_beta * b;
  return c;
}

void PlantParameters::validate() const {
  const InertialParams& in = inertial;
  if (!(in.stationary_mass > 0.0) || !(in.moving_mass > 0.0)) {
    throw std::invalid_argument("masses must be positive");
  }
  if (!(in.buoyancy > 0.0)) throw std::invalid_argument("buoyancy must be positive");
  if (!(in.gravity > 0.0)) throw std::invalid_argument("gravity must be positive");
  if (!(in.air_density > 0.0) || !(in.reference_area > 0.0)) {
    throw std::invalid_argument("air density and reference area must be positive");
  }
  if (!in.inertia.allFinite() || !in.inertia.isApprox(in.inertia.transpose(), 1e-12)) {
    throw std::invalid_argument("inertia must be a finite symmetric matrix");
  }
  if (Eigen::LLT<Matrix3>(in.inertia).info() != Eigen::Success) {
    throw std::invalid_argument("inertia must be positive definite");
  }
  if (!in.stationary_com.allFinite()) throw std::invalid_argument("non-finite centre of mass");
  if (aero.cd0 < 0.0 || aero.cd_alpha2 < 0.0 || aero.cd_beta2 < 0.0) {
    throw std::invalid_argument("drag coefficients must be non-negative");
  }
  if (!aero.damping.allFinite()) throw std::invalid_argument("non-finite damping");
  geometry.validate(kDeflectionLimit);
}

double PlantParameters::netWeight() const {
  return (inertial.stationary_mass + inertial.moving_mass) * inertial.gravity -
         inertial.buoyancy;
}

Matrix3 skew(const Vector3& v) {
  Matrix3 s;
  s << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
       -v.y(), v.x(), 0.0;
  return s;
}

Matrix3 rotationMatrix(const Vector3& euler) {
  const double cr = std::cos(euler.x()), sr = std::sin(euler.x());
  const double cp = std::cos(euler.y()), sp = std::sin(euler.y());
  const double cy = std::cos(euler.z()), sy = std::sin(euler.z());
  Matrix3 r;
  r << cy * cp, cy * sp * sr - sy * cr, cy * sp * cr + sy * sr,
       sy * cp, sy * sp * sr + cy * cr, sy * sp * cr - cy * sr,
       -sp, cp * sr, cp * cr;
  return r;
}

Matrix3 eulerRateMatrix(const Vector3& euler) {
  if (std::abs(euler.y()) >= kHalfPi - kPitchMargin) {
    throw SingularAttitude("pitch too close to +-90 deg for Euler kinematics");
  }
  const double cr = std::cos(euler.x()), sr = std::sin(euler.x());
  const double cp = std::cos(euler.y()), tp = std::tan(euler.y());
  Matrix3 w;
  w << 1.0, sr * tp, cr * tp,
       0.0, cr, -sr,
       0.0, sr / cp, cr / cp;
  return w;
}

Vector3 relativeVelocity(const State& state, const Vector3& wind) {
  return state.velocity - rotationMatrix(state.attitude).transpose() * wind;
}

FlowAngles aeroAngles(const Vector3& air_velocity) {
  const double speed = air_velocity.norm();
  if (!(speed > kNoFlowAirspeed)) return {};
  return {std::atan2(air_velocity.z(), air_velocity.x()),
          std::asin(std::clamp(air_velocity.y() / speed, -1.0, 1.0)), speed, false};
}

Wrench aeroWrench(const FlowAngles& flow, const Vector3& rates, const AeroModel& model,
                  double air_density, double reference_area) {
  Wrench w;
  w.torque = model.damping.cwiseProduct(rates);
  if (flow.no_flow) return w;

  const double dynamic = 0.5 * air_density * flow.airspeed * flow.airspeed * reference_area;
  const AeroCoefficients c = model.coefficients(flow.alpha, flow.beta);
  const Matrix3 to_body = flowToBody(flow.alpha, flow.beta);
  w.force = to_body * Vector3(-dynamic * c.drag, dynamic * c.side, -dynamic * c.lift);
  w.torque += to_body * (dynamic * c.moment);
  return w;
}

Vector3 totalCom(const Deflection& q, const PlantParameters& params) {
  return params.inertial.stationary_mass * params.inertial.stationary_com +
         params.inertial.moving_mass * massPosition(q, params.geometry);
}

Matrix6 massMatrix(const Deflection& q, const PlantParameters& params) {
  const Vector3 tip = massPosition(q, params.geometry);
  const Vector3 com = params.inertial.stationary_mass * params.inertial.stationary_com +
                      params.inertial.moving_mass * tip;
  const Matrix6 m = assembleMassMatrix(
      com, rotationalInertia(tip, params),
      params.inertial.stationary_mass + params.inertial.moving_mass);
  if (Eigen::LLT<Matrix6>(m).info() != Eigen::Success) {
    throw ModelError("mass matrix is not positive definite");
  }
  return m;
}

Wrench generalizedForces(const State& state, const ControlInput& input, const Vector3& wind,
                         const PlantParameters& params) {
  const Vector3 tip = massPosition(input.deflection, params.geometry);
  const Vector3 com = totalCom(input.deflection, params);
  const Vector6 rhs =
      momentumRhs(rotationMatrix(state.attitude), state.velocity, state.rates, wind,
                  input.thrust, com, rotationalInertia(tip, params), params);
  return {rhs.head<3>(), rhs.tail<3>()};
}

StateVector continuousDynamics(const State& state, const ControlInput& input,
                               const Vector3& wind, const PlantParameters& params) {
  const Matrix6 mass = massMatrix(input.deflection, params);
  const Wrench forces = generalizedForces(state, input, wind, params);
  Vector6 rhs;
  rhs << forces.force, forces.torque;

  StateVector dx;
  dx.segment<3>(0) = rotationMatrix(state.attitude) * state.velocity;
  dx.segment<3>(3) = eulerRateMatrix(state.attitude) * state.rates;
  dx.tail<6>() = Eigen::LLT<Matrix6>(mass).solve(rhs);
  return dx;
}

State discreteStep(const State& state, const ControlInput& input, const Vector3& wind,
                   const PlantParameters& params, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("time step must be positive");
  const auto f = [&](const StateVector& x) {
    return continuousDynamics(State::fromVector(x), input, wind, params);
  };
  const StateVector x = state.toVector();
  const StateVector k1 = f(x);
  const StateVector k2 = f(x + 0.5 * dt * k1);
  const StateVector k3 = f(x + 0.5 * dt * k2);
  const StateVector k4 = f(x + dt * k3);
  const StateVector next = x + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  if (!next.allFinite()) throw ModelError("integration produced a non-finite state");
  return State::fromVector(next);
}

FrozenInputDynamics::FrozenInputDynamics(const PlantParameters& params,
                                         const ControlInput& input)
    : params_(&params), thrust_(input.thrust) {
  mass_position_ = massPosition(input.deflection, params.geometry);
  com_moment_ = params.inertial.stationary_mass * params.inertial.stationary_com +
                params.inertial.moving_mass * mass_position_;
  rotational_inertia_ = rotationalInertia(mass_position_, params);
  const Matrix6 m = assembleMassMatrix(
      com_moment_, rotational_inertia_,
      params.inertial.stationary_mass + params.inertial.moving_mass);
  Eigen::LLT<Matrix6> llt(m);
  if (llt.info() != Eigen::Success) throw ModelError("mass matrix is not positive definite");
  inverse_mass_ = llt.solve(Matrix6::Identity());
}

StateVector FrozenInputDynamics::derivative(const StateVector& x, const Vector3& wind) const {
  const Vector3 attitude = x.segment<3>(3);
  const Vector3 velocity = x.segment<3>(6);
  const Vector3 rates = x.segment<3>(9);
  const Matrix3 rotation = rotationMatrix(attitude);

  StateVector dx;
  dx.segment<3>(0) = rotation * velocity;
  dx.segment<3>(3) = eulerRateMatrix(attitude) * rates;
  dx.tail<6>() = inverse_mass_ * momentumRhs(rotation, velocity, rates, wind, thrust_,
                                             com_moment_, rotational_inertia_, *params_);
  return dx;
}

StateVector FrozenInputDynamics::step(const StateVector& x, const Vector3& wind,
                                      double dt) const {
  const StateVector k1 = derivative(x, wind);
  const StateVector k2 = derivative(x + 0.5 * dt * k1, wind);
  const StateVector k3 = derivative(x + 0.5 * dt * k2, wind);
  const StateVector k4 = derivative(x + dt * k3, wind);
  const StateVector next = x + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  if (!next.allFinite()) throw ModelError("integration produced a non-finite state");
  return next;
}

}  // namespace blimp
