#include "blimp/controller_mpc.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include <omp.h>

namespace blimp {

namespace {

constexpr int kInputDim = 3;
constexpr int kPenaltyRows = 6;

double hinge(double violation) { return violation > 0.0 ? violation : 0.0; }

ControlInput unpack(const trajopt::Vector& z, int j) {
  return {z[kInputDim * j], {z[kInputDim * j + 1], z[kInputDim * j + 2]}};
}

Vector3 asVector(const ControlInput& u) {
  return {u.thrust, u.deflection.x, u.deflection.y};
}

trajopt::Vector pack(const std::vector<ControlInput>& inputs) {
  trajopt::Vector z(kInputDim * inputs.size());
  for (std::size_t j = 0; j < inputs.size(); ++j) {
    z.segment<kInputDim>(kInputDim * j) = asVector(inputs[j]);
  }
  return z;
}

StateVector trackingError(const StateVector& x, const StateVector& desired,
                          const MpcWeights& w) {
  StateVector e = x - desired;
  for (int i = 3; i < 6; ++i) e[i] = units::wrapAngle(e[i]);
  e.segment<3>(0) *= w.position_unit;
  e.segment<3>(3) *= w.angle_unit;
  e.segment<3>(6) *= w.position_unit;
  e.segment<3>(9) *= w.angle_unit;
  return e;
}

// Box violations in the same units as the tracking errors.
Eigen::Matrix<double, kPenaltyRows, 1> violations(const StateVector& x, const StateLimits& s,
                                                  const MpcWeights& w) {
  Eigen::Matrix<double, kPenaltyRows, 1> v;
  for (int i = 0; i < 3; ++i) v[i] = w.angle_unit * hinge(std::abs(x[3 + i]) - s.attitude);
  v[3] = hinge(s.forward_min - x[6]) + hinge(x[6] - s.forward_max);
  v[4] = hinge(std::abs(x[7]) - s.transverse);
  v[5] = hinge(std::abs(x[8]) - s.transverse);
  v.tail<3>() *= w.position_unit;
  return v;
}

// Everything a residual evaluation needs; shared read-only by all threads.
struct MpcContext {
  StateVector start;
  Vector3 wind;
  StateVector desired;
  const MpcConfig* config;
  const PlantParameters* model;
  Vector3 previous;
  std::vector<int> tracked;  // state indices with non-zero weight
  StateVector sqrt_state;
  Vector3 sqrt_rate;
  double sqrt_penalty;

  MpcContext(const State& s, const Vector3& w, const Reference& ref, const MpcConfig& cfg,
             const PlantParameters& m, const ControlInput& prev)
      : start(s.toVector()), wind(w), desired(ref.desiredState()), config(&cfg), model(&m),
        previous(asVector(prev)) {
    if (cfg.weights.state.minCoeff() < 0.0 || cfg.weights.input_rate.minCoeff() < 0.0 ||
        cfg.weights.constraint_penalty < 0.0) {
      throw std::invalid_argument("MPC weights must be non-negative");
    }
    for (int i = 0; i < 12; ++i) {
      if (cfg.weights.state[i] > 0.0) tracked.push_back(i);
    }
    sqrt_state = cfg.weights.state.cwiseSqrt();
    sqrt_rate = cfg.weights.input_rate.cwiseSqrt().cwiseProduct(cfg.weights.inputScale());
    sqrt_penalty = std::sqrt(cfg.weights.constraint_penalty);
  }

  int horizon() const { return config->horizon; }

  Eigen::Index rows() const {
    const int m = horizon();
    return static_cast<Eigen::Index>(tracked.size()) * (m + 1) + kInputDim * m +
           kPenaltyRows * m;
  }

  // Rolls states first..horizon in place; states[first] must be valid.
  void rollFrom(int first, const trajopt::Vector& z, std::vector<StateVector>& states) const {
    for (int j = first; j < horizon(); ++j) {
      const FrozenInputDynamics f(*model, unpack(z, j));
      states[j + 1] = f.step(states[j], wind, config->dt);
    }
  }

  trajopt::Vector assemble(const trajopt::Vector& z, const std::vector<StateVector>& states) const {
    const int m = horizon();
    trajopt::Vector r(rows());
    Eigen::Index row = 0;
    for (int j = 0; j <= m; ++j) {
      const StateVector e = trackingError(states[j], desired, config->weights);
      for (int i : tracked) r[row++] = sqrt_state[i] * e[i];
    }
    Vector3 before = previous;
    for (int j = 0; j < m; ++j) {
      const Vector3 u = z.segment<kInputDim>(kInputDim * j);
      r.segment<kInputDim>(row) = sqrt_rate.cwiseProduct(u - before);
      row += kInputDim;
      before = u;
    }
    for (int j = 1; j <= m; ++j) {
      r.segment<kPenaltyRows>(row) = sqrt_penalty * violations(states[j], config->states, config->weights);
      row += kPenaltyRows;
    }
    return r;
  }

  trajopt::Vector residual(const trajopt::Vector& z) const {
    std::vector<StateVector> states(horizon() + 1);
    states[0] = start;
    rollFrom(0, z, states);
    return assemble(z, states);
  }
};

trajopt::ResidualProblem makeProblem(const MpcContext& ctx, const std::vector<ControlInput>& guess) {
  const MpcConfig& cfg = *ctx.config;
  const int n = kInputDim * cfg.horizon;
  trajopt::ResidualProblem problem;
  problem.residual = [&ctx](const trajopt::Vector& z) { return ctx.residual(z); };
  problem.lower.resize(n);
  problem.upper.resize(n);
  for (int j = 0; j < cfg.horizon; ++j) {
    problem.lower.segment<kInputDim>(kInputDim * j)
        << cfg.inputs.thrust_min, -cfg.inputs.deflection, -cfg.inputs.deflection;
    problem.upper.segment<kInputDim>(kInputDim * j)
        << cfg.inputs.thrust_max, cfg.inputs.deflection, cfg.inputs.deflection;
  }
  problem.initial = pack(guess).cwiseMax(problem.lower).cwiseMin(problem.upper);
  return problem;
}

trajopt::Jacobian causalJacobian(const MpcContext& ctx, const trajopt::ResidualProblem& problem,
                                 const trajopt::Vector& z, const trajopt::Vector& r0) {
  const int m = ctx.horizon();
  std::vector<StateVector> nominal(m + 1);
  nominal[0] = ctx.start;
  ctx.rollFrom(0, z, nominal);

  const Eigen::Index n = z.size();
  trajopt::Jacobian jac{trajopt::Matrix(r0.size(), n), {}};
  std::vector<char> bad(n, 0);
#pragma omp parallel for schedule(dynamic) if (!omp_in_parallel())
  for (Eigen::Index col = 0; col < n; ++col) {
    trajopt::Vector zp = z;
    double h = trajopt::differenceStep(z[col]);
    if (z[col] + h > problem.upper[col]) h = -h;
    zp[col] += h;
    const int step = static_cast<int>(col) / kInputDim;
    std::vector<StateVector> states(nominal.begin(), nominal.end());
    bool ok = true;
    try {
      ctx.rollFrom(step, zp, states);
    } catch (const std::exception&) {
      ok = false;
    }
    trajopt::Vector r;
    if (ok) {
      r = ctx.assemble(zp, states);
      ok = r.allFinite();
    }
    if (ok) {
      jac.matrix.col(col) = (r - r0) / h;
    } else {
      jac.matrix.col(col).setZero();
      bad[col] = 1;
    }
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (bad[i]) jac.flagged.push_back(static_cast<int>(i));
  }
  return jac;
}

std::vector<State> predict(const MpcContext& ctx, const trajopt::Vector& z) {
  std::vector<StateVector> states(ctx.horizon() + 1);
  states[0] = ctx.start;
  std::vector<State> out;
  try {
    ctx.rollFrom(0, z, states);
  } catch (const ModelError&) {
    return out;
  }
  for (const StateVector& x : states) out.push_back(State::fromVector(x));
  return out;
}

}  // namespace

StateVector Reference::desiredState() const {
  StateVector x = StateVector::Zero();
  x[0] = forward;
  x[1] = lateral;
  x[2] = altitude;
  x[5] = yaw;
  x.tail<3>() = rates;
  return x;
}

ControlInput InputLimits::clamp(const ControlInput& u) const {
  return {std::clamp(u.thrust, thrust_min, thrust_max),
          {std::clamp(u.deflection.x, -deflection, deflection),
           std::clamp(u.deflection.y, -deflection, deflection)}};
}

bool InputLimits::contains(const ControlInput& u) const {
  return u.thrust >= thrust_min && u.thrust <= thrust_max &&
         std::abs(u.deflection.x) <= deflection && std::abs(u.deflection.y) <= deflection;
}

MpcCostTerms mpcCost(const State& start, const Vector3& wind, const Reference& reference,
                     const MpcConfig& config, const PlantParameters& model,
                     const ControlInput& previous, const std::vector<ControlInput>& inputs) {
  MpcCostTerms terms;
  const StateVector desired = reference.desiredState();
  State x = start;
  Vector3 before = asVector(previous);
  for (std::size_t j = 0; j <= inputs.size(); ++j) {
    if (j > 0) {
      x = discreteStep(x, inputs[j - 1], wind, model, config.dt);
      const auto v = violations(x.toVector(), config.states, config.weights);
      terms.penalty += config.weights.constraint_penalty * v.squaredNorm();
    }
    const StateVector e = trackingError(x.toVector(), desired, config.weights);
    terms.state += config.weights.state.cwiseProduct(e.cwiseProduct(e));
    if (j < inputs.size()) {
      const Vector3 du = (asVector(inputs[j]) - before).cwiseProduct(config.weights.inputScale());
      terms.input_rate += config.weights.input_rate.cwiseProduct(du.cwiseProduct(du));
      before = asVector(inputs[j]);
    }
  }
  return terms;
}

std::vector<ControlInput> shiftInputs(const std::vector<ControlInput>& inputs) {
  if (inputs.empty()) return {};
  std::vector<ControlInput> shifted(inputs.begin() + 1, inputs.end());
  shifted.push_back(inputs.back());
  return shifted;
}

trajopt::Jacobian mpcCausalJacobian(const State& start, const Vector3& wind,
                                    const Reference& reference, const MpcConfig& config,
                                    const PlantParameters& model, const ControlInput& previous,
                                    const trajopt::Vector& decision,
                                    const trajopt::Vector& residual) {
  const MpcContext ctx(start, wind, reference, config, model, previous);
  std::vector<ControlInput> guess(config.horizon);
  const trajopt::ResidualProblem problem = makeProblem(ctx, guess);
  return causalJacobian(ctx, problem, decision, residual);
}

trajopt::ResidualProblem mpcProblem(const State& start, const Vector3& wind,
                                    const Reference& reference, const MpcConfig& config,
                                    const PlantParameters& model, const ControlInput& previous,
                                    const std::vector<ControlInput>& guess) {
  // The context must outlive the returned problem, so it is owned by the closure.
  auto ctx = std::make_shared<const MpcContext>(start, wind, reference, config, model, previous);
  trajopt::ResidualProblem problem = makeProblem(*ctx, guess);
  problem.residual = [ctx](const trajopt::Vector& z) { return ctx->residual(z); };
  return problem;
}

Plan plan(const State& start, const Vector3& wind, const Reference& reference,
          const MpcConfig& config, const PlantParameters& model, const ControlInput& previous,
          const std::vector<ControlInput>* warm_start) {
  if (config.horizon < 1) throw std::invalid_argument("MPC horizon must be >= 1");
  const MpcContext ctx(start, wind, reference, config, model, previous);

  std::vector<ControlInput> guess;
  if (warm_start && static_cast<int>(warm_start->size()) == config.horizon) {
    guess = *warm_start;
  } else {
    guess.assign(config.horizon, config.inputs.clamp(previous));
  }

  trajopt::ResidualProblem problem = makeProblem(ctx, guess);
  problem.jacobian = [&ctx, &problem](const trajopt::Vector& z, const trajopt::Vector& r0) {
    return causalJacobian(ctx, problem, z, r0);
  };

  Plan result;
  try {
    result.report = trajopt::solve(problem, config.solver);
  } catch (const trajopt::SolveError&) {
    result.degraded = true;
    result.inputs = guess;
    result.report.solution = problem.initial;
    result.report.termination = "failed";
    return result;
  }
  for (int j = 0; j < config.horizon; ++j) {
    result.inputs.push_back(unpack(result.report.solution, j));
  }
  result.predicted = predict(ctx, result.report.solution);
  return result;
}

ModelPredictiveController::ModelPredictiveController(PlantParameters model, MpcConfig config,
                                                     Reference reference,
                                                     const ControlInput& launch_input)
    : model_(std::move(model)), config_(std::move(config)), reference_(reference),
      previous_(launch_input) {}

ControlInput ModelPredictiveController::step(const State& estimate, const Vector3& wind_estimate) {
  std::vector<ControlInput> warm;
  if (has_plan_) warm = shiftInputs(last_.inputs);
  last_ = plan(estimate, wind_estimate, reference_, config_, model_, previous_,
               has_plan_ ? &warm : nullptr);
  has_plan_ = true;
  return applyFirst(last_);
}

ControlInput ModelPredictiveController::applyFirst(const Plan& p) {
  if (!p.degraded && !p.inputs.empty()) previous_ = config_.inputs.clamp(p.inputs.front());
  return previous_;
}

}  // namespace blimp
