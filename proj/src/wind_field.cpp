#include "blimp/wind_field.hpp"

#include <cmath>
#include <stdexcept>

namespace blimp {

void FanConfig::validate() const {
  if (!position.allFinite()) throw std::invalid_argument("fan position must be finite");
  if (!axis.allFinite() || std::abs(axis.norm() - 1.0) > 1e-9) {
    throw std::invalid_argument("fan axis must be a unit vector");
  }
  if (!(core_speed >= 0.0)) throw std::invalid_argument("fan core speed must be >= 0");
  if (!(decay_length > 0.0) || !(half_width > 0.0)) {
    throw std::invalid_argument("fan decay length and half width must be positive");
  }
  if (!(turbulence_intensity >= 0.0) || !(turbulence_ramp > 0.0) ||
      !(correlation_time > 0.0)) {
    throw std::invalid_argument("invalid turbulence parameters");
  }
}

namespace {

struct JetCoordinates {
  double axial = 0.0;
  double radial = 0.0;
};

JetCoordinates jetCoordinates(const FanConfig& fan, const Eigen::Vector3d& point) {
  const Eigen::Vector3d offset = point - fan.position;
  const double axial = offset.dot(fan.axis);
  return {axial, (offset - axial * fan.axis).norm()};
}

double meanSpeed(const FanConfig& fan, const JetCoordinates& c) {
  if (c.axial < 0.0) return 0.0;
  return fan.core_speed * std::exp(-c.axial / fan.decay_length) *
         std::exp(-c.radial * c.radial / (2.0 * fan.half_width * fan.half_width));
}

}  // namespace

Eigen::Vector3d meanWind(const FanConfig& fan, const Eigen::Vector3d& point) {
  return meanSpeed(fan, jetCoordinates(fan, point)) * fan.axis;
}

double calibrateDecayLength(double core_speed, double reference_speed,
                            double reference_distance) {
  if (!(reference_speed > 0.0) || !(core_speed > reference_speed) ||
      !(reference_distance > 0.0)) {
    throw std::invalid_argument("calibration needs core speed > reference speed > 0");
  }
  return reference_distance / std::log(core_speed / reference_speed);
}

TurbulenceState::TurbulenceState(std::uint64_t seed) : rng_(seed) {}

Eigen::Vector3d TurbulenceState::advance(double t, double correlation_time) {
  if (!started_) {
    for (int i = 0; i < 3; ++i) noise_[i] = normal_(rng_);
    started_ = true;
    last_time_ = t;
    return noise_;
  }
  if (t < last_time_) throw std::invalid_argument("turbulence time must not decrease");
  const double dt = t - last_time_;
  if (dt > 0.0) {
    const double decay = std::exp(-dt / correlation_time);
    const double drive = std::sqrt(1.0 - decay * decay);
    for (int i = 0; i < 3; ++i) noise_[i] = decay * noise_[i] + drive * normal_(rng_);
    last_time_ = t;
  }
  return noise_;
}

Eigen::Vector3d sampleWind(const FanConfig& fan, const Eigen::Vector3d& point, double t,
                           TurbulenceState& noise) {
  const Eigen::Vector3d unit_noise = noise.advance(t, fan.correlation_time);
  const JetCoordinates c = jetCoordinates(fan, point);
  const double speed = meanSpeed(fan, c);
  const Eigen::Vector3d mean = speed * fan.axis;
  if (fan.turbulence_intensity == 0.0 || speed == 0.0) return mean;
  const double ramp = std::min(1.0, c.axial / fan.turbulence_ramp);
  return mean + fan.turbulence_intensity * ramp * speed * unit_noise;
}

Eigen::Vector3d WindField::mean(const Eigen::Vector3d& point) const {
  Eigen::Vector3d w = uniform;
  if (fan) w += meanWind(*fan, point);
  return w;
}

Eigen::Vector3d WindField::sample(const Eigen::Vector3d& point, double t,
                                  TurbulenceState& noise) const {
  Eigen::Vector3d w = uniform;
  if (fan) w += sampleWind(*fan, point, t, noise);
  return w;
}

const std::vector<std::string>& windPresetNames() {
  static const std::vector<std::string> names = {
      "none", "headwind_light", "headwind_strong", "crosswind_light", "crosswind_strong"};
  return names;
}

WindField windPreset(std::string_view name) {
  WindField field;
  if (name == "none") return field;

  FanConfig fan;
  fan.core_speed = kFanCoreSpeed;
  double reference = 0.0;
  if (name == "headwind_light" || name == "headwind_strong") {
    fan.position = Eigen::Vector3d(6.0, 0.0, 1.5);
    fan.axis = -Eigen::Vector3d::UnitX();
    reference = name == "headwind_light" ? 0.5 : 1.0;
  } else if (name == "crosswind_light" || name == "crosswind_strong") {
    fan.position = Eigen::Vector3d(3.0, -2.0, 1.5);
    fan.axis = Eigen::Vector3d::UnitY();
    reference = name == "crosswind_light" ? 0.5 : 1.0;
  } else {
    throw std::invalid_argument("unknown wind preset: " + std::string(name));
  }
  fan.decay_length = calibrateDecayLength(fan.core_speed, reference, kFanReferenceDistance);
  field.fan = fan;
  return field;
}

}  // namespace blimp
