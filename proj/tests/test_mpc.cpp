#include <doctest.h>

#include <cmath>

#include "blimp/controller_mpc.hpp"
#include "blimp/harness.hpp"
#include "support.hpp"

using namespace blimp;

namespace {

MpcConfig tightConfig() {
  MpcConfig c;
  c.solver.max_iterations = 300;
  c.solver.step_tolerance = 1e-12;
  c.solver.cost_tolerance = 1e-12;
  return c;
}

}  // namespace

TEST_CASE("reference assembles the desired state") {
  Reference r;
  r.forward = 3.0;
  r.lateral = 0.2;
  r.yaw = 0.1;
  const StateVector x = r.desiredState();
  CHECK(x[0] == 3.0);
  CHECK(x[1] == 0.2);
  CHECK(x[2] == 1.5);
  CHECK(x[5] == 0.1);
  CHECK(x.tail<3>().isZero());
  CHECK(x.segment<2>(3).isZero());
  CHECK(x.segment<3>(6).isZero());
}

TEST_CASE("input limits") {
  const InputLimits l;
  CHECK(l.thrust_min == doctest::Approx(units::gfToNewton(1.0)));
  CHECK(l.thrust_max == doctest::Approx(units::gfToNewton(15.0)));
  const ControlInput edge{l.thrust_max, {l.deflection, -l.deflection}};
  CHECK(l.contains(edge));
  CHECK(l.clamp(edge) == edge);
  const ControlInput wild{1.0, {0.2, -0.2}};
  CHECK_FALSE(l.contains(wild));
  CHECK(l.clamp(wild) == edge);
  CHECK(l.clamp({0.0, {}}).thrust == l.thrust_min);
}

TEST_CASE("input shift repeats the tail") {
  const std::vector<ControlInput> in = {{0.01, {}}, {0.02, {}}, {0.03, {}}};
  const auto out = shiftInputs(in);
  REQUIRE(out.size() == 3);
  CHECK(out[0].thrust == 0.02);
  CHECK(out[2].thrust == 0.03);
  CHECK(shiftInputs({}).empty());
}

TEST_CASE("level trim in still air is left alone") {
  const test::LevelTrim trim = test::levelTrim(10.0, test::defaultPlant());
  REQUIRE(trim.residual < 1e-10);
  REQUIRE(std::abs(trim.input.deflection.x) < kDeflectionLimit);
  const MpcConfig cfg = tightConfig();
  const std::vector<ControlInput> warm(cfg.horizon, trim.input);
  const Plan p = plan(trim.state, Vector3::Zero(), Reference{}, cfg, test::defaultPlant(),
                      trim.input, &warm);
  CHECK_FALSE(p.degraded);
  CHECK(p.report.cost < 1e-12);
  for (const ControlInput& u : p.inputs) {
    CHECK(std::abs(u.thrust - trim.input.thrust) < 1e-12);
    CHECK(std::abs(u.deflection.x - trim.input.deflection.x) < 1e-12);
    CHECK(std::abs(u.deflection.y) < 1e-12);
  }
}

TEST_CASE("crosswind estimate triggers a lateral deflection") {
  const test::LevelTrim trim = test::levelTrim(10.0, test::defaultPlant());
  const Plan p = plan(trim.state, Vector3(0.0, 1.0, 0.0), Reference{}, MpcConfig{},
                      test::defaultPlant(), trim.input);
  double largest = 0.0;
  for (const ControlInput& u : p.inputs) largest = std::max(largest, std::abs(u.deflection.y));
  CHECK(largest > 0.002);
}

TEST_CASE("yaw error dominates the cost decomposition") {
  const test::LevelTrim trim = test::levelTrim(10.0, test::defaultPlant());
  const MpcConfig cfg;
  const std::vector<ControlInput> hold(cfg.horizon, trim.input);
  auto terms = [&](double yaw) {
    State s = trim.state;
    s.attitude.z() = yaw;
    s.position.y() = 0.01;
    return mpcCost(s, Vector3::Zero(), Reference{}, cfg, test::defaultPlant(), trim.input, hold);
  };
  const MpcCostTerms one = terms(0.05), two = terms(0.1);
  CHECK(two.state[5] >= 2.0 * one.state[5]);
  CHECK(two.state[5] / two.total() >= one.state[5] / one.total());
}

TEST_CASE("reported cost equals the residual norm and the causal Jacobian matches") {
  const test::LevelTrim trim = test::levelTrim(10.0, test::defaultPlant());
  State s = trim.state;
  s.attitude.z() = 0.1;
  s.position.y() = -0.05;
  s.rates = Vector3(0.02, 0.0, -0.05);
  const Vector3 wind(0.3, 0.4, 0.0);
  MpcConfig cfg;
  std::vector<ControlInput> guess;
  for (int j = 0; j < cfg.horizon; ++j) {
    guess.push_back({units::gfToNewton(8.0 + 0.2 * j), {0.01, -0.02 + 0.002 * j}});
  }
  const trajopt::ResidualProblem problem =
      mpcProblem(s, wind, Reference{}, cfg, test::defaultPlant(), trim.input, guess);
  const trajopt::Vector r = problem.residual(problem.initial);
  const MpcCostTerms terms =
      mpcCost(s, wind, Reference{}, cfg, test::defaultPlant(), trim.input, guess);
  CHECK(r.squaredNorm() == doctest::Approx(terms.total()).epsilon(1e-10));

  const trajopt::Jacobian generic = trajopt::jacobianSerial(problem, problem.initial, r);
  const trajopt::Jacobian causal = mpcCausalJacobian(s, wind, Reference{}, cfg, test::defaultPlant(),
                                                     trim.input, problem.initial, r);
  CHECK((generic.matrix - causal.matrix).norm() <= 1e-9 * generic.matrix.norm());
}

TEST_CASE("the unweighted forward position does not change the plan") {
  const test::LevelTrim trim = test::levelTrim(10.0, test::defaultPlant());
  State s = trim.state;
  s.attitude.z() = 0.2;
  Reference a, b;
  b.forward = 5.0;
  const Plan pa = plan(s, Vector3(0.2, 0.0, 0.0), a, MpcConfig{}, test::defaultPlant(), trim.input);
  const Plan pb = plan(s, Vector3(0.2, 0.0, 0.0), b, MpcConfig{}, test::defaultPlant(), trim.input);
  REQUIRE(pa.inputs.size() == pb.inputs.size());
  for (std::size_t j = 0; j < pa.inputs.size(); ++j) CHECK(pa.inputs[j] == pb.inputs[j]);
}

TEST_CASE("plans respect the input box even from a poor state") {
  State s;
  s.position = Vector3(1.0, 0.8, 1.2);
  s.attitude = Vector3(0.3, -0.2, 1.0);
  s.velocity = Vector3(0.4, 0.3, -0.2);
  s.rates = Vector3(0.5, -0.3, 0.6);
  const InputLimits limits;
  const Plan p = plan(s, Vector3(0.0, 1.2, 0.0), Reference{}, MpcConfig{}, test::defaultPlant(),
                      ControlInput{units::gfToNewton(10.0), {}});
  for (const ControlInput& u : p.inputs) CHECK(limits.contains(u));
  CHECK(p.predicted.size() == 21);
}

TEST_CASE("receding-horizon consistency under a perfect model") {
  const test::LevelTrim trim = test::levelTrim(10.0, test::defaultPlant());
  State s = trim.state;
  s.attitude.z() = 0.002;
  const MpcConfig cfg = tightConfig();
  const Plan first = plan(s, Vector3::Zero(), Reference{}, cfg, test::defaultPlant(), trim.input);
  REQUIRE_FALSE(first.degraded);
  // Principle of optimality: from the predicted next state, the problem one
  // step shorter is solved by the tail of the first plan.
  MpcConfig shorter = cfg;
  shorter.horizon = cfg.horizon - 1;
  const std::vector<ControlInput> tail(first.inputs.begin() + 1, first.inputs.end());
  const Plan second = plan(first.predicted[1], Vector3::Zero(), Reference{}, shorter,
                           test::defaultPlant(), first.inputs[0]);
  REQUIRE(second.inputs.size() == tail.size());
  // Inputs late in the horizon are weakly determined, so the comparison is
  // on the optimal value and on the input that is actually applied.
  const double tail_cost = mpcCost(first.predicted[1], Vector3::Zero(), Reference{}, shorter,
                                   test::defaultPlant(), first.inputs[0], tail).total();
  const double cold_cost = second.report.cost;
  CHECK(std::abs(cold_cost - tail_cost) <= 1e-3 * tail_cost);
  const ControlInput& a = second.inputs[0];
  const ControlInput& b = tail[0];
  CHECK(std::abs(a.thrust - b.thrust) / (cfg.inputs.thrust_max - cfg.inputs.thrust_min) < 0.01);
  CHECK(std::abs(a.deflection.x - b.deflection.x) / (2 * kDeflectionLimit) < 0.01);
  CHECK(std::abs(a.deflection.y - b.deflection.y) / (2 * kDeflectionLimit) < 0.01);
}

TEST_CASE("apply-first policy") {
  const ControlInput launch{units::gfToNewton(10.0), {}};
  ModelPredictiveController mpc(test::defaultPlant(), MpcConfig{}, Reference{}, launch);
  Plan p;
  p.inputs.assign(20, ControlInput{units::gfToNewton(12.0), {0.01, -0.045}});
  CHECK(mpc.applyFirst(p) == p.inputs[0]);
  CHECK(mpc.previousInput() == p.inputs[0]);
  Plan bad = p;
  bad.degraded = true;
  bad.inputs.assign(20, ControlInput{units::gfToNewton(2.0), {}});
  CHECK(mpc.applyFirst(bad) == p.inputs[0]);
  Plan out_of_box;
  out_of_box.inputs.assign(20, ControlInput{1.0, {0.1, 0.0}});
  const ControlInput clamped = mpc.applyFirst(out_of_box);
  CHECK(clamped.thrust == MpcConfig{}.inputs.thrust_max);
  CHECK(clamped.deflection.x == kDeflectionLimit);
}

TEST_CASE("heavier input-rate weights do not make inputs jumpier") {
  Scenario sc = loadScenarioFile(test::configPath("scenarios/none.json"));
  sc.duration = 3.0;
  sc.arm = Arm::MheMpc;
  const double base = runEpisode(sc).metrics.max_input_step;
  sc.mpc.weights.input_rate *= 100.0;
  const double heavy = runEpisode(sc).metrics.max_input_step;
  CHECK(heavy <= base);
}
