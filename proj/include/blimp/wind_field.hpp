#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace blimp {

/// One-sided fan jet: exponential decay along the axis, Gaussian profile
/// across it, and low-pass filtered turbulence whose intensity ramps up
/// linearly with downstream distance.
struct FanConfig {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  Eigen::Vector3d axis = Eigen::Vector3d::UnitX();
  double core_speed = 0.0;        // m/s at the fan mouth
  double decay_length = 1.0;      // m
  double half_width = 0.3;        // m, Gaussian sigma of the cross profile
  double turbulence_intensity = 0.1;  // std / local mean, reached at ramp distance
  double turbulence_ramp = 2.0;       // m
  double correlation_time = 0.5;      // s

  /// Throws std::invalid_argument on invalid values.
  void validate() const;
};

/// Mean jet velocity at a point (inertial frame).
Eigen::Vector3d meanWind(const FanConfig& fan, const Eigen::Vector3d& point);

/// Decay length that makes a jet with the given core speed reach
/// `reference_speed` at `reference_distance` downstream on axis.
double calibrateDecayLength(double core_speed, double reference_speed,
                            double reference_distance);

/// Per-episode turbulence stream. One writer only.
class TurbulenceState {
 public:
  explicit TurbulenceState(std::uint64_t seed);

  /// Unit-variance Ornstein-Uhlenbeck sample per axis at time t.
  /// Throws std::invalid_argument if t decreases.
  Eigen::Vector3d advance(double t, double correlation_time);

 private:
  std::mt19937_64 rng_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  Eigen::Vector3d noise_ = Eigen::Vector3d::Zero();
  double last_time_ = 0.0;
  bool started_ = false;
};

/// Mean wind plus turbulence for a fan.
Eigen::Vector3d sampleWind(const FanConfig& fan, const Eigen::Vector3d& point, double t,
                           TurbulenceState& noise);

/// Ground-truth wind for an episode: a uniform component plus an optional fan.
struct WindField {
  Eigen::Vector3d uniform = Eigen::Vector3d::Zero();
  std::optional<FanConfig> fan;

  Eigen::Vector3d mean(const Eigen::Vector3d& point) const;
  Eigen::Vector3d sample(const Eigen::Vector3d& point, double t, TurbulenceState& noise) const;
};

inline constexpr double kFanCoreSpeed = 1.5;        // m/s
inline constexpr double kFanReferenceDistance = 2.0;  // m

/// Names accepted by windPreset().
const std::vector<std::string>& windPresetNames();

/// Fan placements and intensities of the flight-arena scenarios. Throws
/// std::invalid_argument for unknown names.
WindField windPreset(std::string_view name);

}  // namespace blimp
