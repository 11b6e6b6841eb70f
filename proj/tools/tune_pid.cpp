// Grid search for the PID baseline gains in the no-wind scenario.
#include <cmath>
#include <cstdio>
#include <iostream>
#include <limits>
#include <vector>

#include <CLI11.hpp>

#include "blimp/config.hpp"

namespace {

struct Candidate {
  blimp::PidGains gains;
  double yaw = 0.0;       // mean final cRMSE of yaw [rad]
  double altitude = 0.0;  // mean RMS altitude error [m]
  bool stable = true;
};

double altitudeRms(const blimp::EpisodeLog& log, double from, double reference) {
  double sum = 0.0;
  int n = 0;
  for (const auto& row : log.rows) {
    if (row.t < from) continue;
    const double e = row.truth.position.z() - reference;
    sum += e * e;
    ++n;
  }
  return n ? std::sqrt(sum / n) : 0.0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"PID baseline gain search"};
  std::string scenario_file;
  int seeds = 3;
  app.add_option("--scenario", scenario_file, "no-wind scenario file")->required();
  app.add_option("--seeds", seeds, "episodes per candidate")->check(CLI::PositiveNumber);
  CLI11_PARSE(app, argc, argv);

  blimp::Scenario base;
  try {
    base = blimp::loadScenarioFile(scenario_file);
  } catch (const std::exception& e) {
    std::cerr << e.what() << '\n';
    return 1;
  }
  base.arm = blimp::Arm::Pid;

  const std::vector<double> yaw_kp = {0.02, 0.05, 0.1, 0.2, 0.5, 1.0};
  const std::vector<double> yaw_ki = {0.0, 0.02, 0.1};
  const std::vector<double> yaw_kd = {0.0, 0.05, 0.2};
  const std::vector<double> alt_kp = {0.1, 0.3, 1.0, 3.0, 10.0};
  const std::vector<double> alt_kd = {0.0, 0.1, 0.5};

  std::vector<Candidate> all;
  for (double kp : yaw_kp)
    for (double ki : yaw_ki)
      for (double kd : yaw_kd)
        for (double akp : alt_kp)
          for (double akd : alt_kd) {
            Candidate c;
            c.gains = base.pid;
            c.gains.yaw = {kp, ki, kd};
            c.gains.altitude = {akp, 0.2 * akp, akd};
            for (int s = 1; s <= seeds; ++s) {
              blimp::Scenario sc = base;
              sc.pid = c.gains;
              sc.seed = static_cast<std::uint64_t>(s);
              const blimp::EpisodeResult r = blimp::runEpisode(sc);
              const auto term = r.metrics.termination;
              if (term == blimp::Termination::LateralLimit ||
                  term == blimp::Termination::NonFinite ||
                  r.metrics.inputs_outside_limits > 0) {
                c.stable = false;
              }
              c.yaw += r.metrics.final_crmse_yaw / seeds;
              c.altitude += altitudeRms(r.log, sc.launch_duration, sc.reference.altitude) / seeds;
            }
            all.push_back(c);
          }

  std::printf("yaw_kp,yaw_ki,yaw_kd,alt_kp,alt_ki,alt_kd,crmse_yaw,rms_altitude,score,stable\n");
  const Candidate* best = nullptr;
  double best_score = std::numeric_limits<double>::infinity();
  for (const Candidate& c : all) {
    // One degree of heading error weighs as much as one centimetre of altitude.
    const double score = blimp::units::radToDeg(c.yaw) + 100.0 * c.altitude;
    std::printf("%g,%g,%g,%g,%g,%g,%.6f,%.6f,%.6f,%d\n", c.gains.yaw.kp, c.gains.yaw.ki,
                c.gains.yaw.kd, c.gains.altitude.kp, c.gains.altitude.ki, c.gains.altitude.kd,
                c.yaw, c.altitude, score, int(c.stable));
    if (c.stable && score < best_score) {
      best_score = score;
      best = &c;
    }
  }
  if (!best) {
    std::cerr << "no stable candidate\n";
    return 2;
  }
  std::printf("# best yaw=(%g,%g,%g) altitude=(%g,%g,%g) score=%.6f\n", best->gains.yaw.kp,
              best->gains.yaw.ki, best->gains.yaw.kd, best->gains.altitude.kp,
              best->gains.altitude.ki, best->gains.altitude.kd, best_score);
  return 0;
}
