#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "blimp/harness.hpp"

namespace blimp {

struct CampaignSpec {
  std::vector<Scenario> scenarios;
  std::vector<Arm> arms;
  int trials = 10;
  std::uint64_t master_seed = 1;
};

struct CampaignOptions {
  int workers = 1;
  std::filesystem::path out_dir;  // empty: nothing written
  bool write_traces = false;
  bool keep_logs = false;
};

struct CampaignEpisode {
  std::string scenario;
  Arm arm = Arm::MheMpc;
  int trial = 0;
  std::uint64_t seed = 0;
  bool failed = false;
  std::string error;
  Metrics metrics;
  EpisodeLog log;  // only filled with keep_logs
};

struct CellSummary {
  std::string scenario;
  Arm arm = Arm::MheMpc;
  int trials = 0;
  int failures = 0;
  double mean_crmse_y = 0.0;
  double std_crmse_y = 0.0;
  double mean_crmse_yaw = 0.0;
  double std_crmse_yaw = 0.0;
  int lateral_limit = 0;
  int corridor_end = 0;
  int duration = 0;
  int non_finite = 0;
  std::size_t inputs_outside_limits = 0;
};

struct CampaignResult {
  std::vector<CampaignEpisode> episodes;  // scenario-major, then arm, then trial
  std::vector<CellSummary> cells;

  void writeSummaryCsv(std::ostream& out) const;
};

/// Seed of one episode; distinct for every (scenario, arm, trial).
std::uint64_t episodeSeed(std::uint64_t master, std::size_t scenario, std::size_t arm, int trial);

/// Worker count from BLIMPSIM_WORKERS, defaulting to the OpenMP maximum.
int workersFromEnvironment();

/// Runs every episode of the matrix, in parallel across episodes. Failed
/// episodes are recorded in their cell and do not stop the campaign. The
/// result depends only on `spec`, not on the worker count.
CampaignResult runCampaign(const CampaignSpec& spec, const CampaignOptions& options = {});

/// Per-tick trace used by the plotting script: t, x, y, yaw, estimated wind,
/// inputs.
void writeTraceCsv(const EpisodeLog& log, std::ostream& out);

}  // namespace blimp
