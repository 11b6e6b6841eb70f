#include "blimp/campaign.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <ostream>

#include <omp.h>

namespace blimp {

std::uint64_t episodeSeed(std::uint64_t master, std::size_t scenario, std::size_t arm,
                          int trial) {
  std::uint64_t s = deriveSeed(master, scenario);
  s = deriveSeed(s, arm);
  return deriveSeed(s, static_cast<std::uint64_t>(trial));
}

int workersFromEnvironment() {
  if (const char* env = std::getenv("BLIMPSIM_WORKERS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return omp_get_max_threads();
}

namespace {

void meanStd(const std::vector<double>& v, double& mean, double& stddev) {
  mean = 0.0;
  stddev = 0.0;
  if (v.empty()) return;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  if (v.size() < 2) return;
  for (double x : v) stddev += (x - mean) * (x - mean);
  stddev = std::sqrt(stddev / static_cast<double>(v.size() - 1));
}

std::string episodeStem(const CampaignEpisode& e) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%03d", e.trial);
  return e.scenario + "_" + std::string(armName(e.arm)) + "_" + buf;
}

}  // namespace

void writeTraceCsv(const EpisodeLog& log, std::ostream& out) {
  out << "t,x,y,yaw,est_wind_x,est_wind_y,est_wind_z,thrust_gf,delta_x_mm,delta_y_mm\n";
  for (const LogRow& row : log.rows) {
    char buf[256];
    const double nan = std::nan("");
    const Vector3 w = row.has_estimate ? row.wind_estimate : Vector3::Constant(nan);
    std::snprintf(buf, sizeof buf, "%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f\n", row.t,
                  row.truth.position.x(), row.truth.position.y(), row.truth.attitude.z(), w.x(),
                  w.y(), w.z(), units::newtonToGf(row.input.thrust),
                  units::mToMm(row.input.deflection.x), units::mToMm(row.input.deflection.y));
    out << buf;
  }
}

void CampaignResult::writeSummaryCsv(std::ostream& out) const {
  out << "scenario,arm,trials,failures,mean_crmse_y,std_crmse_y,mean_crmse_yaw,std_crmse_yaw,"
         "lateral_limit,corridor_end,duration,non_finite,inputs_outside_limits\n";
  for (const CellSummary& c : cells) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "%.9g,%.9g,%.9g,%.9g", c.mean_crmse_y, c.std_crmse_y,
                  c.mean_crmse_yaw, c.std_crmse_yaw);
    out << c.scenario << ',' << armName(c.arm) << ',' << c.trials << ',' << c.failures << ','
        << buf << ',' << c.lateral_limit << ',' << c.corridor_end << ',' << c.duration << ','
        << c.non_finite << ',' << c.inputs_outside_limits << '\n';
  }
}

CampaignResult runCampaign(const CampaignSpec& spec, const CampaignOptions& options) {
  if (spec.trials < 1) throw std::invalid_argument("campaign needs at least one trial");
  CampaignResult result;
  for (std::size_t s = 0; s < spec.scenarios.size(); ++s) {
    for (std::size_t a = 0; a < spec.arms.size(); ++a) {
      for (int k = 0; k < spec.trials; ++k) {
        CampaignEpisode e;
        e.scenario = spec.scenarios[s].name;
        e.arm = spec.arms[a];
        e.trial = k;
        e.seed = episodeSeed(spec.master_seed, s, a, k);
        result.episodes.push_back(std::move(e));
      }
    }
  }

  const bool write = !options.out_dir.empty();
  if (write) {
    std::filesystem::create_directories(options.out_dir / "episodes");
    if (options.write_traces) std::filesystem::create_directories(options.out_dir / "traces");
  }

  const std::size_t per_scenario = spec.arms.size() * static_cast<std::size_t>(spec.trials);
  const long count = static_cast<long>(result.episodes.size());
#pragma omp parallel for schedule(dynamic) num_threads(std::max(1, options.workers))
  for (long i = 0; i < count; ++i) {
    CampaignEpisode& e = result.episodes[i];
    Scenario sc = spec.scenarios[static_cast<std::size_t>(i) / per_scenario];
    sc.arm = e.arm;
    sc.seed = e.seed;
    try {
      EpisodeResult r = runEpisode(sc);
      e.metrics = std::move(r.metrics);
      if (write) {
        std::ofstream log_file(options.out_dir / "episodes" / (episodeStem(e) + ".csv"));
        r.log.writeCsv(log_file);
        if (options.write_traces) {
          std::ofstream trace(options.out_dir / "traces" / (episodeStem(e) + ".csv"));
          writeTraceCsv(r.log, trace);
        }
      }
      if (options.keep_logs) e.log = std::move(r.log);
    } catch (const std::exception& ex) {
      e.failed = true;
      e.error = ex.what();
    }
  }

  for (std::size_t s = 0; s < spec.scenarios.size(); ++s) {
    for (std::size_t a = 0; a < spec.arms.size(); ++a) {
      CellSummary cell;
      cell.scenario = spec.scenarios[s].name;
      cell.arm = spec.arms[a];
      std::vector<double> ys, yaws;
      for (int k = 0; k < spec.trials; ++k) {
        const CampaignEpisode& e = result.episodes[s * per_scenario + a * spec.trials + k];
        ++cell.trials;
        if (e.failed) {
          ++cell.failures;
          continue;
        }
        ys.push_back(e.metrics.final_crmse_y);
        yaws.push_back(e.metrics.final_crmse_yaw);
        cell.inputs_outside_limits += e.metrics.inputs_outside_limits;
        switch (e.metrics.termination) {
          case Termination::LateralLimit: ++cell.lateral_limit; break;
          case Termination::CorridorEnd: ++cell.corridor_end; break;
          case Termination::Duration: ++cell.duration; break;
          case Termination::NonFinite: ++cell.non_finite; break;
        }
      }
      meanStd(ys, cell.mean_crmse_y, cell.std_crmse_y);
      meanStd(yaws, cell.mean_crmse_yaw, cell.std_crmse_yaw);
      result.cells.push_back(cell);
    }
  }

  if (write) {
    std::ofstream summary(options.out_dir / "summary.csv");
    result.writeSummaryCsv(summary);
  }
  return result;
}

}  // namespace blimp
