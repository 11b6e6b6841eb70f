#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <random>
#include <vector>

#include "blimp/dynamics.hpp"
#include "blimp/trajopt.hpp"
#include "blimp/units.hpp"

namespace blimp {

/// Pose measurement from the motion-capture substitute.
struct Measurement {
  double timestamp = 0.0;
  Vector3 position = Vector3::Zero();
  Vector3 attitude = Vector3::Zero();

  Vector6 pose() const;
};

struct MeasurementNoise {
  double position_std = 0.0008;                     // m
  double attitude_std = units::degToRad(0.2);       // rad
};

/// h(x) = [p; e] plus seeded Gaussian noise.
class MeasurementModel {
 public:
  MeasurementModel(MeasurementNoise noise, std::uint64_t seed);
  Measurement measure(const State& truth, double timestamp);

 private:
  MeasurementNoise noise_;
  std::mt19937_64 rng_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

using Vector12 = StateVector;

/// Diagonal weights of the three cost terms. Pose residuals are expressed in
/// millimetres and degrees before weighting (the units the motion-capture
/// logs use); the arrival and wind terms are in SI units.
struct MheWeights {
  Vector12 arrival = Vector12::Constant(10.0);
  Vector3 wind = Vector3::Constant(50.0);
  Vector6 measurement = Vector6::Constant(5.0);
  double position_unit = 1e3;
  double angle_unit = units::radToDeg(1.0);
};

struct MheConfig {
  int horizon = 20;
  double dt = 0.025;
  MheWeights weights;
  double wind_limit = 3.0;  // m/s, per axis
  trajopt::SolveOptions solver{.max_iterations = 15,
                               .step_tolerance = 1e-9,
                               .cost_tolerance = 1e-9,
                               .initial_damping = 1e-3,
                               .trace = {}};
};

/// Receding window of up to horizon+1 measurements and the inputs applied
/// between them.
class MheWindow {
 public:
  explicit MheWindow(int horizon);

  /// Appends a measurement together with the input applied since the
  /// previous one (ignored for the first measurement). Returns true when the
  /// oldest measurement was evicted. Throws std::invalid_argument when the
  /// timestamp does not increase.
  bool push(const Measurement& measurement, const ControlInput& applied);

  int horizon() const { return horizon_; }
  std::size_t size() const { return measurements_.size(); }
  bool full() const { return static_cast<int>(size()) == horizon_ + 1; }
  const std::deque<Measurement>& measurements() const { return measurements_; }
  const std::deque<ControlInput>& inputs() const { return inputs_; }

 private:
  int horizon_;
  std::deque<Measurement> measurements_;
  std::deque<ControlInput> inputs_;
};

/// Prior for the oldest state in the window and for the wind.
struct MhePriors {
  State state;
  Vector3 wind = Vector3::Zero();
};

struct MheCost {
  double arrival = 0.0;
  double wind = 0.0;
  double measurement = 0.0;
  double total() const { return arrival + wind + measurement; }
};

struct MheEstimate {
  std::vector<State> trajectory;  // one state per measurement, oldest first
  std::vector<double> timestamps;
  Vector3 wind = Vector3::Zero();
  trajopt::SolveReport report;
  MheCost cost;

  const State& current() const { return trajectory.back(); }
};

/// Cost of a candidate (oldest state, wind), rolled with discreteStep.
MheCost mheCost(const MheWindow& window, const MhePriors& priors, const State& oldest,
                const Vector3& wind, const PlantParameters& model, const MheConfig& config);

/// Solves the windowed problem starting from the priors. Requires at least
/// two measurements; throws std::invalid_argument otherwise. A non-converged
/// solve still returns its best iterate with report.converged == false.
MheEstimate estimate(const MheWindow& window, const MhePriors& priors,
                     const PlantParameters& model, const MheConfig& config);

/// Priors for the next solve: the state prior moves to the second smoothed
/// state only when the window slid forward; the wind prior is always the
/// latest estimate.
MhePriors advancePriors(const MheEstimate& previous, const MhePriors& current, bool evicted);

/// Window, priors and the last solution for one episode.
class MovingHorizonEstimator {
 public:
  MovingHorizonEstimator(PlantParameters model, MheConfig config, const State& launch_state);

  void push(const Measurement& measurement, const ControlInput& applied);
  /// Solves once at least two measurements are buffered.
  std::optional<MheEstimate> update();

  const MheWindow& window() const { return window_; }
  const MhePriors& priors() const { return priors_; }
  const std::optional<MheEstimate>& last() const { return last_; }
  const MheConfig& config() const { return config_; }

 private:
  PlantParameters model_;
  MheConfig config_;
  MheWindow window_;
  MhePriors priors_;
  std::optional<MheEstimate> last_;
  std::optional<ControlInput> evicted_input_;
};

}  // namespace blimp
