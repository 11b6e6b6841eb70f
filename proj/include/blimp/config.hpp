#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include "blimp/campaign.hpp"
#include "blimp/harness.hpp"

namespace blimp {

/// Malformed or inconsistent configuration. Maps to CLI exit code 1.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Plant file: masses in grams, buoyancy in gram-force, arm geometry in
/// millimetres (required), optional inertial and aerodynamic overrides.
PlantParameters loadPlantFile(const std::filesystem::path& path);
PlantParameters parsePlant(const std::string& json_text);

/// Scenario file. Relative paths inside it resolve against its directory.
Scenario loadScenarioFile(const std::filesystem::path& path);

/// Campaign matrix: scenario files, arms, trials and master seed.
CampaignSpec loadMatrixFile(const std::filesystem::path& path);

/// Loads any of the three file kinds and returns a one-line description.
/// Throws ConfigError on failure.
std::string validateConfigFile(const std::filesystem::path& path);

}  // namespace blimp
