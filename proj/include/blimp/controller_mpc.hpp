#pragma once

#include <vector>

#include "blimp/dynamics.hpp"
#include "blimp/trajopt.hpp"
#include "blimp/units.hpp"

namespace blimp {

/// Constant tracking targets. `forward` exists only so the desired state is
/// complete; its weight is zero by default.
struct Reference {
  double forward = 0.0;
  double lateral = 0.0;
  double altitude = 1.5;
  double yaw = 0.0;
  Vector3 rates = Vector3::Zero();

  StateVector desiredState() const;
};

struct InputLimits {
  double thrust_min = units::gfToNewton(1.0);
  double thrust_max = units::gfToNewton(15.0);
  double deflection = kDeflectionLimit;

  ControlInput clamp(const ControlInput& u) const;
  bool contains(const ControlInput& u) const;
};

/// State boxes, enforced as hinge penalties.
struct StateLimits {
  double attitude = units::degToRad(90.0);
  double forward_min = 0.0;
  double forward_max = 1.5;
  double transverse = 1.5;  // |v_y|, |v_z|
};

struct MpcWeights {
  StateVector state =
      (StateVector() << 0, 10, 10, 0, 0, 100, 0, 0, 0, 5, 5, 5).finished();
  Vector3 input_rate = Vector3(200.0, 300.0, 300.0);
  double constraint_penalty = 1e3;
  // Tracking errors are converted to these units before weighting:
  // positions and velocities by position_unit, angles and rates by angle_unit.
  double position_unit = 25.0;
  double angle_unit = units::radToDeg(1.0);
  // Input changes are converted before weighting (SI by default).
  double thrust_unit = 1.0;
  double deflection_unit = 1.0;

  Vector3 inputScale() const { return {thrust_unit, deflection_unit, deflection_unit}; }
};

struct MpcConfig {
  int horizon = 20;
  double dt = 0.025;
  MpcWeights weights;
  InputLimits inputs;
  StateLimits states;
  trajopt::SolveOptions solver{.max_iterations = 8,
                               .step_tolerance = 1e-8,
                               .cost_tolerance = 1e-7,
                               .initial_damping = 1e-3,
                               .trace = {}};
};

struct Plan {
  std::vector<ControlInput> inputs;
  std::vector<State> predicted;  // horizon + 1 states, starting at the estimate
  trajopt::SolveReport report;
  bool degraded = false;
};

/// Per-term split of the MPC objective.
struct MpcCostTerms {
  StateVector state = StateVector::Zero();  // per state component, summed over the horizon
  Vector3 input_rate = Vector3::Zero();
  double penalty = 0.0;

  double total() const { return state.sum() + input_rate.sum() + penalty; }
};

/// Objective of an input sequence, rolled with discreteStep.
MpcCostTerms mpcCost(const State& start, const Vector3& wind, const Reference& reference,
                     const MpcConfig& config, const PlantParameters& model,
                     const ControlInput& previous, const std::vector<ControlInput>& inputs);

/// Shifts a plan by one tick, repeating the last input.
std::vector<ControlInput> shiftInputs(const std::vector<ControlInput>& inputs);

/// Solves the receding-horizon problem from `start` under a constant wind
/// estimate. `previous` is the input applied on the last tick. The warm
/// start is used as-is (callers shift it). On solver failure the plan is the
/// warm start (or `previous` held) flagged degraded.
Plan plan(const State& start, const Vector3& wind, const Reference& reference,
          const MpcConfig& config, const PlantParameters& model, const ControlInput& previous,
          const std::vector<ControlInput>* warm_start = nullptr);

/// Forward-difference Jacobian of the MPC residual that reuses the nominal
/// rollout prefix for every column; columns run in parallel. Exposed for
/// tests and benchmarks.
trajopt::Jacobian mpcCausalJacobian(const State& start, const Vector3& wind,
                                    const Reference& reference, const MpcConfig& config,
                                    const PlantParameters& model, const ControlInput& previous,
                                    const trajopt::Vector& decision,
                                    const trajopt::Vector& residual);

/// Builds the generic residual problem (no custom Jacobian) for tests.
trajopt::ResidualProblem mpcProblem(const State& start, const Vector3& wind,
                                    const Reference& reference, const MpcConfig& config,
                                    const PlantParameters& model, const ControlInput& previous,
                                    const std::vector<ControlInput>& guess);

/// Receding-horizon wrapper that carries the warm start and the last
/// applied input between ticks.
class ModelPredictiveController {
 public:
  ModelPredictiveController(PlantParameters model, MpcConfig config, Reference reference,
                            const ControlInput& launch_input);

  /// Plans from the estimate and applies the first input.
  ControlInput step(const State& estimate, const Vector3& wind_estimate);

  /// First input of the plan clamped to the limits, or the previous input
  /// for a degraded plan. Becomes the next tick's previous input.
  ControlInput applyFirst(const Plan& plan);

  const Plan& lastPlan() const { return last_; }
  const ControlInput& previousInput() const { return previous_; }
  const MpcConfig& config() const { return config_; }

 private:
  PlantParameters model_;
  MpcConfig config_;
  Reference reference_;
  ControlInput previous_;
  Plan last_;
  bool has_plan_ = false;
};

}  // namespace blimp
