#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "blimp/baselines.hpp"
#include "blimp/controller_mpc.hpp"
#include "blimp/estimator_mhe.hpp"
#include "blimp/wind_field.hpp"

namespace blimp {

enum class Arm { MheMpc, Pid, OpenLoop };

std::string_view armName(Arm arm);
/// Throws std::invalid_argument for unknown names.
Arm parseArm(std::string_view name);

/// Build deviations of the flown vehicle that the estimator and controller
/// model does not know about.
struct PlantAsymmetry {
  double roll_moment = 0.0;  // added to C_Tx0
  double yaw_moment = 0.0;   // added to C_Tz0
  Vector3 com_offset = Vector3::Zero();  // added to the stationary centre of mass [m]

  PlantParameters apply(const PlantParameters& nominal) const;
};

struct Scenario {
  std::string name = "scenario";
  PlantParameters plant;  // model used by estimator and controller
  PlantAsymmetry asymmetry;
  std::string wind_preset = "none";
  WindField wind;
  Arm arm = Arm::MheMpc;
  double duration = 20.0;
  std::uint64_t seed = 1;
  double dt = 0.025;
  int truth_substeps = 5;
  State initial;
  double launch_thrust = units::gfToNewton(kLaunchThrustGf);
  double launch_duration = 0.5;
  Reference reference;
  double lateral_limit = 2.0;
  double corridor_end = 6.0;
  MeasurementNoise noise;
  MheConfig mhe;
  MpcConfig mpc;
  PidGains pid = PidGains::tuned();
  std::string canonical_config;  // resolved configuration text, hashed into log headers

  /// Throws std::invalid_argument on inconsistent settings.
  void validate() const;
  PlantParameters truthPlant() const { return asymmetry.apply(plant); }
  ControlInput launchInput() const { return {launch_thrust, {0.0, 0.0}}; }
};

/// Scenario with the flight-arena defaults: start at rest at (0, 0, 1.5),
/// 0.5 s launch at 10 gf.
Scenario defaultScenario(const PlantParameters& plant);

struct LogRow {
  double t = 0.0;
  State truth;
  Measurement measurement;
  bool has_estimate = false;
  State estimate;
  Vector3 wind_estimate = Vector3::Zero();
  int estimator_iterations = 0;
  bool estimator_converged = false;
  ControlInput input;
  int controller_iterations = 0;
  bool controller_degraded = false;
  Vector3 true_wind = Vector3::Zero();
};

enum class Termination { Duration, LateralLimit, CorridorEnd, NonFinite };
std::string_view terminationName(Termination t);

struct EpisodeLog {
  std::string scenario;
  Arm arm = Arm::MheMpc;
  std::uint64_t seed = 0;
  std::uint64_t config_hash = 0;
  std::vector<LogRow> rows;

  /// Headered CSV with a fixed column order; bitwise reproducible.
  void writeCsv(std::ostream& out) const;
  static const std::vector<std::string>& columns();
};

struct TimedValue {
  double t = 0.0;
  double value = 0.0;
};

struct Metrics {
  std::vector<TimedValue> crmse_y;
  std::vector<TimedValue> crmse_yaw;
  double final_crmse_y = 0.0;
  double final_crmse_yaw = 0.0;
  Termination termination = Termination::Duration;
  double path_length = 0.0;
  double final_time = 0.0;
  double final_x = 0.0;
  double final_y = 0.0;
  std::size_t inputs_checked = 0;
  std::size_t inputs_outside_limits = 0;
  double max_input_step = 0.0;  // largest per-tick change, normalised by the box widths
};

/// Cumulative RMSE from the first sample's time: sqrt(sum e_i^2 dt_i / (t_k - t_0))
/// with dt_i = t_i - t_{i-1}. The value at t_0 is |e_0|.
std::vector<TimedValue> cumulativeRmse(const std::vector<TimedValue>& errors);

struct EpisodeResult {
  EpisodeLog log;
  Metrics metrics;
};

/// Runs one episode. The estimator and controller see only measurements;
/// truth is used for stepping the plant and for metrics.
EpisodeResult runEpisode(const Scenario& scenario);

/// Derives independent stream seeds (splitmix64).
std::uint64_t deriveSeed(std::uint64_t base, std::uint64_t stream);

/// FNV-1a 64-bit hash.
std::uint64_t fnv1a(std::string_view text);

}  // namespace blimp
