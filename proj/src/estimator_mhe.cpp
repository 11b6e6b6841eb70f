#include "blimp/estimator_mhe.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace blimp {

namespace {

constexpr int kStateDim = 12;
constexpr double kInf = std::numeric_limits<double>::infinity();

// Pose residual y - h(x) in logging units (mm, deg), angles wrapped.
Vector6 poseResidual(const Measurement& y, const StateVector& x, const MheWeights& w) {
  Vector6 r;
  r.head<3>() = w.position_unit * (y.position - x.segment<3>(0));
  for (int i = 0; i < 3; ++i) {
    r[3 + i] = w.angle_unit * units::wrapAngle(y.attitude[i] - x[3 + i]);
  }
  return r;
}

Vector12 stateDifference(const StateVector& a, const StateVector& b) {
  Vector12 d = a - b;
  for (int i = 3; i < 6; ++i) d[i] = units::wrapAngle(d[i]);
  return d;
}

std::vector<StateVector> rollout(const MheWindow& window, const StateVector& oldest,
                                 const Vector3& wind, const PlantParameters& model,
                                 double dt) {
  std::vector<StateVector> states;
  states.reserve(window.size());
  states.push_back(oldest);
  for (const ControlInput& u : window.inputs()) {
    const FrozenInputDynamics f(model, u);
    states.push_back(f.step(states.back(), wind, dt));
  }
  return states;
}

}  // namespace

Vector6 Measurement::pose() const {
  Vector6 y;
  y << position, attitude;
  return y;
}

MeasurementModel::MeasurementModel(MeasurementNoise noise, std::uint64_t seed)
    : noise_(noise), rng_(seed) {}

Measurement MeasurementModel::measure(const State& truth, double timestamp) {
  Measurement m{timestamp, truth.position, truth.attitude};
  // Draws happen even with zero noise so streams stay aligned across configs.
  for (int i = 0; i < 3; ++i) m.position[i] += noise_.position_std * normal_(rng_);
  for (int i = 0; i < 3; ++i) m.attitude[i] += noise_.attitude_std * normal_(rng_);
  return m;
}

MheWindow::MheWindow(int horizon) : horizon_(horizon) {
  if (horizon < 1) throw std::invalid_argument("MHE horizon must be >= 1");
}

bool MheWindow::push(const Measurement& measurement, const ControlInput& applied) {
  if (!measurements_.empty() && !(measurement.timestamp > measurements_.back().timestamp)) {
    throw std::invalid_argument("measurement timestamps must strictly increase");
  }
  if (!measurements_.empty()) inputs_.push_back(applied);
  measurements_.push_back(measurement);
  if (static_cast<int>(measurements_.size()) > horizon_ + 1) {
    measurements_.pop_front();
    inputs_.pop_front();
    return true;
  }
  return false;
}

MheCost mheCost(const MheWindow& window, const MhePriors& priors, const State& oldest,
                const Vector3& wind, const PlantParameters& model, const MheConfig& config) {
  const MheWeights& w = config.weights;
  MheCost cost;
  const Vector12 dx = stateDifference(oldest.toVector(), priors.state.toVector());
  cost.arrival = dx.cwiseProduct(dx).dot(w.arrival);
  const Vector3 dw = wind - priors.wind;
  cost.wind = dw.cwiseProduct(dw).dot(w.wind);

  State x = oldest;
  for (std::size_t i = 0; i < window.size(); ++i) {
    if (i > 0) x = discreteStep(x, window.inputs()[i - 1], wind, model, config.dt);
    const Vector6 r = poseResidual(window.measurements()[i], x.toVector(), w);
    cost.measurement += r.cwiseProduct(r).dot(w.measurement);
  }
  return cost;
}

MheEstimate estimate(const MheWindow& window, const MhePriors& priors,
                     const PlantParameters& model, const MheConfig& config) {
  if (window.size() < 2) throw std::invalid_argument("MHE needs at least two measurements");
  const MheWeights& w = config.weights;

  trajopt::DecisionLayout layout;
  const int state_at = layout.add("oldest_state", kStateDim);
  const int wind_at = layout.add("wind", 3);

  const Vector12 prior_state = priors.state.toVector();
  const Vector3 prior_wind = priors.wind;

  trajopt::ResidualProblem problem;
  problem.residual = [&](const trajopt::Vector& z) {
    const StateVector x0 = z.segment<kStateDim>(state_at);
    const Vector3 wind = z.segment<3>(wind_at);
    const trajopt::Vector arrival =
        trajopt::weightedResidual(stateDifference(x0, prior_state), w.arrival);
    const trajopt::Vector disturbance = trajopt::weightedResidual(wind - prior_wind, w.wind);
    const std::vector<StateVector> states = rollout(window, x0, wind, model, config.dt);

    trajopt::Vector r(arrival.size() + disturbance.size() + 6 * states.size());
    r << arrival, disturbance, trajopt::Vector::Zero(6 * states.size());
    Eigen::Index row = arrival.size() + disturbance.size();
    for (std::size_t i = 0; i < states.size(); ++i) {
      const trajopt::Vector ri = trajopt::weightedResidual(
          poseResidual(window.measurements()[i], states[i], w), w.measurement);
      r.segment(row, ri.size()) = ri;
      row += ri.size();
    }
    r.conservativeResize(row);
    return r;
  };

  problem.initial.resize(layout.size());
  problem.initial << prior_state, prior_wind;
  problem.lower = trajopt::Vector::Constant(layout.size(), -kInf);
  problem.upper = trajopt::Vector::Constant(layout.size(), kInf);
  constexpr double kPitchBound = std::numbers::pi / 2.0 - 0.05;
  problem.lower[state_at + 4] = -kPitchBound;
  problem.upper[state_at + 4] = kPitchBound;
  problem.lower.segment<3>(wind_at).setConstant(-config.wind_limit);
  problem.upper.segment<3>(wind_at).setConstant(config.wind_limit);

  MheEstimate est;
  est.report = trajopt::solve(problem, config.solver);
  const StateVector x0 = est.report.solution.segment<kStateDim>(state_at);
  est.wind = est.report.solution.segment<3>(wind_at);
  for (const StateVector& x : rollout(window, x0, est.wind, model, config.dt)) {
    est.trajectory.push_back(State::fromVector(x));
  }
  for (const Measurement& m : window.measurements()) est.timestamps.push_back(m.timestamp);
  est.cost = mheCost(window, priors, est.trajectory.front(), est.wind, model, config);
  return est;
}

MhePriors advancePriors(const MheEstimate& previous, const MhePriors& current, bool evicted) {
  MhePriors next = current;
  next.wind = previous.wind;
  if (evicted && previous.trajectory.size() >= 2) next.state = previous.trajectory[1];
  return next;
}

MovingHorizonEstimator::MovingHorizonEstimator(PlantParameters model, MheConfig config,
                                               const State& launch_state)
    : model_(std::move(model)), config_(std::move(config)), window_(config_.horizon) {
  priors_.state = launch_state;
}

void MovingHorizonEstimator::push(const Measurement& measurement, const ControlInput& applied) {
  const std::optional<ControlInput> dropped =
      window_.full() ? std::optional<ControlInput>(window_.inputs().front()) : std::nullopt;
  const bool evicted = window_.push(measurement, applied);
  const double oldest = window_.measurements().front().timestamp;
  if (last_ && (!evicted || (last_->timestamps.size() >= 2 && last_->timestamps[1] == oldest))) {
    priors_ = advancePriors(*last_, priors_, evicted);
  } else if (evicted && dropped) {
    // No solve covered the evicted sample: propagate the prior instead.
    priors_.state = discreteStep(priors_.state, *dropped, priors_.wind, model_, config_.dt);
  }
}

std::optional<MheEstimate> MovingHorizonEstimator::update() {
  if (window_.size() < 2) return std::nullopt;
  last_ = estimate(window_, priors_, model_, config_);
  return last_;
}

}  // namespace blimp
