#include "blimp/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

namespace blimp {

std::string_view armName(Arm arm) {
  switch (arm) {
    case Arm::MheMpc: return "mhe_mpc";
    case Arm::Pid: return "pid";
    case Arm::OpenLoop: return "open_loop";
  }
  return "unknown";
}

Arm parseArm(std::string_view name) {
  if (name == "mhe_mpc") return Arm::MheMpc;
  if (name == "pid") return Arm::Pid;
  if (name == "open_loop") return Arm::OpenLoop;
  throw std::invalid_argument("unknown arm: " + std::string(name));
}

std::string_view terminationName(Termination t) {
  switch (t) {
    case Termination::Duration: return "duration";
    case Termination::LateralLimit: return "lateral_limit";
    case Termination::CorridorEnd: return "corridor_end";
    case Termination::NonFinite: return "non_finite";
  }
  return "unknown";
}

PlantParameters PlantAsymmetry::apply(const PlantParameters& nominal) const {
  PlantParameters p = nominal;
  p.aero.ctx0 += roll_moment;
  p.aero.ctz0 += yaw_moment;
  p.inertial.stationary_com += com_offset;
  return p;
}

void Scenario::validate() const {
  plant.validate();
  truthPlant().validate();
  if (!(duration > 0.0)) throw std::invalid_argument("duration must be positive");
  if (!(dt > 0.0) || truth_substeps < 1) throw std::invalid_argument("invalid time step");
  if (!(launch_duration >= 0.0)) throw std::invalid_argument("launch duration must be >= 0");
  if (!initial.isFinite()) throw std::invalid_argument("initial state must be finite");
  if (!(lateral_limit > 0.0)) throw std::invalid_argument("lateral limit must be positive");
  if (!mpc.inputs.contains(launchInput())) {
    throw std::invalid_argument("launch input outside the input limits");
  }
  if (wind.fan) wind.fan->validate();
  if (!wind.uniform.allFinite()) throw std::invalid_argument("uniform wind must be finite");
  if (mhe.horizon < 1 || mpc.horizon < 1) throw std::invalid_argument("horizons must be >= 1");
  if (std::abs(mhe.dt - dt) > 1e-12 || std::abs(mpc.dt - dt) > 1e-12) {
    throw std::invalid_argument("estimator and controller must run at the control rate");
  }
  if (!(noise.position_std >= 0.0) || !(noise.attitude_std >= 0.0)) {
    throw std::invalid_argument("noise levels must be >= 0");
  }
}

Scenario defaultScenario(const PlantParameters& plant) {
  Scenario s;
  s.plant = plant;
  s.initial.position = Vector3(0.0, 0.0, 1.5);
  return s;
}

std::uint64_t deriveSeed(std::uint64_t base, std::uint64_t stream) {
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::vector<TimedValue> cumulativeRmse(const std::vector<TimedValue>& errors) {
  std::vector<TimedValue> out;
  if (errors.empty()) return out;
  out.reserve(errors.size());
  const double t0 = errors.front().t;
  double integral = 0.0;
  double previous = t0;
  for (const TimedValue& e : errors) {
    if (e.t < previous) throw std::invalid_argument("cRMSE needs monotone time");
    integral += e.value * e.value * (e.t - previous);
    previous = e.t;
    const double span = e.t - t0;
    out.push_back({e.t, span > 0.0 ? std::sqrt(integral / span) : std::abs(e.value)});
  }
  return out;
}

const std::vector<std::string>& EpisodeLog::columns() {
  static const std::vector<std::string> cols = {
      "t",
      "x", "y", "z", "roll", "pitch", "yaw", "u", "v", "w", "p", "q", "r",
      "meas_x", "meas_y", "meas_z", "meas_roll", "meas_pitch", "meas_yaw",
      "est_x", "est_y", "est_z", "est_roll", "est_pitch", "est_yaw",
      "est_u", "est_v", "est_w", "est_p", "est_q", "est_r",
      "est_wind_x", "est_wind_y", "est_wind_z",
      "est_iterations", "est_converged",
      "thrust_gf", "delta_x_mm", "delta_y_mm", "ctrl_iterations", "ctrl_degraded",
      "wind_x", "wind_y", "wind_z"};
  return cols;
}

namespace {

void writeNumber(std::ostream& out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out << ',' << buf;
}

void writeVector(std::ostream& out, const Eigen::Ref<const Eigen::VectorXd>& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) writeNumber(out, v[i]);
}

}  // namespace

void EpisodeLog::writeCsv(std::ostream& out) const {
  out << "# scenario=" << scenario << " arm=" << armName(arm) << " seed=" << seed
      << " config_hash=" << std::hex << config_hash << std::dec << '\n';
  const auto& cols = columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << '\n';
  const double nan = std::nan("");
  for (const LogRow& row : rows) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", row.t);
    out << buf;
    writeVector(out, row.truth.toVector());
    writeVector(out, row.measurement.pose());
    if (row.has_estimate) {
      writeVector(out, row.estimate.toVector());
      writeVector(out, row.wind_estimate);
    } else {
      writeVector(out, Eigen::VectorXd::Constant(15, nan));
    }
    out << ',' << row.estimator_iterations << ',' << int(row.estimator_converged);
    writeNumber(out, units::newtonToGf(row.input.thrust));
    writeNumber(out, units::mToMm(row.input.deflection.x));
    writeNumber(out, units::mToMm(row.input.deflection.y));
    out << ',' << row.controller_iterations << ',' << int(row.controller_degraded);
    writeVector(out, row.true_wind);
    out << '\n';
  }
}

EpisodeResult runEpisode(const Scenario& sc) {
  sc.validate();
  const PlantParameters truth_plant = sc.truthPlant();
  const double dt = sc.dt;
  const double sub_dt = dt / sc.truth_substeps;

  TurbulenceState turbulence(deriveSeed(sc.seed, 1));
  MeasurementModel sensor(sc.noise, deriveSeed(sc.seed, 2));

  std::optional<MovingHorizonEstimator> estimator;
  std::optional<ModelPredictiveController> controller;
  if (sc.arm == Arm::MheMpc) {
    estimator.emplace(sc.plant, sc.mhe, sc.initial);
    controller.emplace(sc.plant, sc.mpc, sc.reference, sc.launchInput());
  }
  PidState pid;

  EpisodeResult result;
  EpisodeLog& log = result.log;
  log.scenario = sc.name;
  log.arm = sc.arm;
  log.seed = sc.seed;
  log.config_hash = fnv1a(sc.canonical_config + "|" + std::string(armName(sc.arm)) + "|" +
                          std::to_string(sc.seed));

  State truth = sc.initial;
  ControlInput applied = sc.launchInput();
  Measurement y = sensor.measure(truth, 0.0);
  std::optional<MheEstimate> est;
  if (estimator) estimator->push(y, applied);

  Metrics& metrics = result.metrics;
  const auto steps_total = static_cast<long>(std::ceil(sc.duration / dt - 1e-9));
  for (long k = 0;; ++k) {
    const double t = static_cast<double>(k) * dt;
    LogRow row;
    row.t = t;
    row.truth = truth;
    row.measurement = y;
    if (est) {
      row.has_estimate = true;
      row.estimate = est->current();
      row.wind_estimate = est->wind;
      row.estimator_iterations = est->report.iterations;
      row.estimator_converged = est->report.converged;
    }

    std::optional<Termination> stop;
    if (!truth.isFinite()) {
      stop = Termination::NonFinite;
    } else if (std::abs(truth.position.y()) >= sc.lateral_limit) {
      stop = Termination::LateralLimit;
    } else if (truth.position.x() >= sc.corridor_end) {
      stop = Termination::CorridorEnd;
    } else if (k >= steps_total) {
      stop = Termination::Duration;
    }

    if (!stop) {
      const bool launching = t < sc.launch_duration - 1e-9;
      if (launching) {
        applied = sc.launchInput();
      } else {
        switch (sc.arm) {
          case Arm::OpenLoop:
            applied = openLoop(t);
            break;
          case Arm::Pid: {
            const PidOutput out = pidStep(y, sc.reference, dt, pid, sc.pid);
            applied = out.input;
            pid = out.state;
            break;
          }
          case Arm::MheMpc:
            if (est) {
              applied = controller->step(est->current(), est->wind);
              row.controller_iterations = controller->lastPlan().report.iterations;
              row.controller_degraded = controller->lastPlan().degraded;
            }
            break;
        }
      }
    }
    row.input = applied;
    if (!stop) row.true_wind = sc.wind.sample(truth.position, t, turbulence);
    else row.true_wind = sc.wind.mean(truth.position);
    log.rows.push_back(row);
    if (stop) {
      metrics.termination = *stop;
      break;
    }

    try {
      for (int s = 0; s < sc.truth_substeps; ++s) {
        truth = discreteStep(truth, applied, row.true_wind, truth_plant, sub_dt);
      }
    } catch (const ModelError&) {
      truth.position.setConstant(std::nan(""));
    }
    const double next_t = static_cast<double>(k + 1) * dt;
    if (truth.isFinite()) {
      y = sensor.measure(truth, next_t);
      if (estimator) {
        estimator->push(y, applied);
        est = estimator->update();
      }
    }
  }

  // Metrics over the controlled phase.
  std::vector<TimedValue> ey, epsi;
  const LogRow* prev = nullptr;
  for (const LogRow& row : log.rows) {
    if (prev && row.truth.isFinite() && prev->truth.isFinite()) {
      metrics.path_length += (row.truth.position - prev->truth.position).norm();
    }
    if (row.t >= sc.launch_duration - 1e-9 && row.truth.isFinite()) {
      ey.push_back({row.t, row.truth.position.y() - sc.reference.lateral});
      epsi.push_back({row.t, units::wrapAngle(row.truth.attitude.z() - sc.reference.yaw)});
    }
    ++metrics.inputs_checked;
    if (!sc.mpc.inputs.contains(row.input)) ++metrics.inputs_outside_limits;
    if (prev) {
      const double f = std::abs(row.input.thrust - prev->input.thrust) /
                       (sc.mpc.inputs.thrust_max - sc.mpc.inputs.thrust_min);
      const double dx = std::abs(row.input.deflection.x - prev->input.deflection.x) /
                        (2.0 * sc.mpc.inputs.deflection);
      const double dy = std::abs(row.input.deflection.y - prev->input.deflection.y) /
                        (2.0 * sc.mpc.inputs.deflection);
      metrics.max_input_step = std::max({metrics.max_input_step, f, dx, dy});
    }
    prev = &row;
  }
  metrics.crmse_y = cumulativeRmse(ey);
  metrics.crmse_yaw = cumulativeRmse(epsi);
  if (!metrics.crmse_y.empty()) {
    metrics.final_crmse_y = metrics.crmse_y.back().value;
    metrics.final_crmse_yaw = metrics.crmse_yaw.back().value;
  }
  const LogRow& last = log.rows.back();
  metrics.final_time = last.t;
  metrics.final_x = last.truth.position.x();
  metrics.final_y = last.truth.position.y();
  return result;
}

}  // namespace blimp
