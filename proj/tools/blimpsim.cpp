#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "blimp/campaign.hpp"
#include "blimp/config.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 1;
constexpr int kRuntimeError = 2;

nlohmann::json metricsJson(const blimp::EpisodeResult& r) {
  const blimp::Metrics& m = r.metrics;
  return {{"scenario", r.log.scenario},
          {"arm", std::string(blimp::armName(r.log.arm))},
          {"seed", r.log.seed},
          {"termination", std::string(blimp::terminationName(m.termination))},
          {"final_time", m.final_time},
          {"final_x", m.final_x},
          {"final_y", m.final_y},
          {"final_crmse_y", m.final_crmse_y},
          {"final_crmse_yaw", m.final_crmse_yaw},
          {"path_length", m.path_length},
          {"inputs_checked", m.inputs_checked},
          {"inputs_outside_limits", m.inputs_outside_limits}};
}

int simulate(const std::string& scenario_file, const std::string& arm_name,
             std::uint64_t seed, const std::filesystem::path& out, bool trace) {
  blimp::Scenario sc;
  try {
    sc = blimp::loadScenarioFile(scenario_file);
    sc.arm = blimp::parseArm(arm_name);
  } catch (const blimp::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  }
  sc.seed = seed;
  try {
    const blimp::EpisodeResult r = blimp::runEpisode(sc);
    std::filesystem::create_directories(out);
    std::ofstream log(out / "episode.csv");
    r.log.writeCsv(log);
    std::ofstream metrics(out / "metrics.json");
    metrics << metricsJson(r).dump(2) << '\n';
    if (trace) {
      std::ofstream t(out / "trace.csv");
      blimp::writeTraceCsv(r.log, t);
    }
    if (!log || !metrics) throw std::runtime_error("failed to write output to " + out.string());
    std::printf("%s %s seed=%llu termination=%s crmse_y=%.4f crmse_yaw=%.4f\n",
                sc.name.c_str(), arm_name.c_str(), static_cast<unsigned long long>(seed),
                std::string(blimp::terminationName(r.metrics.termination)).c_str(),
                r.metrics.final_crmse_y, r.metrics.final_crmse_yaw);
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << '\n';
    return kRuntimeError;
  }
  return kOk;
}

int campaign(const std::string& matrix_file, int trials, const std::filesystem::path& out,
             bool trace) {
  blimp::CampaignSpec spec;
  try {
    spec = blimp::loadMatrixFile(matrix_file);
  } catch (const blimp::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  }
  if (trials > 0) spec.trials = trials;
  try {
    blimp::CampaignOptions options;
    options.workers = blimp::workersFromEnvironment();
    options.out_dir = out;
    options.write_traces = trace;
    const blimp::CampaignResult result = blimp::runCampaign(spec, options);
    result.writeSummaryCsv(std::cout);
    int failures = 0;
    for (const auto& e : result.episodes) {
      if (e.failed) {
        ++failures;
        std::cerr << "episode " << e.scenario << '/' << blimp::armName(e.arm) << '/' << e.trial
                  << " failed: " << e.error << '\n';
      }
    }
    if (failures > 0) return kRuntimeError;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << '\n';
    return kRuntimeError;
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gliding blimp simulator: wind estimation and predictive control"};
  app.require_subcommand(1);

  std::string scenario_file, arm = "mhe_mpc", matrix_file, config_file;
  std::uint64_t seed = 1;
  int trials = 0;
  std::string out_dir;
  bool trace = false;

  CLI::App* sim = app.add_subcommand("simulate", "Run one episode");
  sim->add_option("--scenario", scenario_file, "Scenario file")->required();
  sim->add_option("--arm", arm, "mhe_mpc, pid or open_loop")
      ->check(CLI::IsMember({"mhe_mpc", "pid", "open_loop"}));
  sim->add_option("--seed", seed, "Episode seed");
  sim->add_option("--out", out_dir, "Output directory")->required();
  sim->add_flag("--trace", trace, "Also write a per-tick trace CSV");

  CLI::App* camp = app.add_subcommand("campaign", "Run a scenario x arm x trial matrix");
  camp->add_option("--matrix", matrix_file, "Matrix file")->required();
  camp->add_option("--trials", trials, "Trials per cell (overrides the file)")
      ->check(CLI::PositiveNumber);
  camp->add_option("--out", out_dir, "Output directory")->required();
  camp->add_flag("--trace", trace, "Also write per-episode trace CSVs");

  CLI::App* val = app.add_subcommand("validate", "Check a plant, scenario or matrix file");
  val->add_option("--config", config_file, "Configuration file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  if (*sim) return simulate(scenario_file, arm, seed, out_dir, trace);
  if (*camp) return campaign(matrix_file, trials, out_dir, trace);
  try {
    std::cout << blimp::validateConfigFile(config_file) << '\n';
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  }
  return kOk;
}
