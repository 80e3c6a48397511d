#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "uavtrack/agent.hpp"
#include "uavtrack/environment.hpp"
#include "uavtrack/reward.hpp"

namespace uavtrack {

/// Invalid, unknown or out-of-range configuration entry.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct EvalSettings {
  int episodes = 100;
  std::uint64_t seed = 2024;
  int threads = 1;
};

/// Everything a run needs, one section per module. Obstacles are always
/// resolved: either listed explicitly or generated from (n_obstacles, obstacle_seed).
struct RunConfig {
  env::EnvConfig env;
  int n_obstacles = 3;
  std::uint64_t obstacle_seed = 7;
  reward::RewardParams reward;
  agent::ExplorationParams exploration;
  agent::TrainConfig train;
  EvalSettings evaluation;
};

/// Parses a YAML document with sections environment, reward, exploration,
/// train and evaluation. Every section and key is optional; unknown ones are
/// rejected. Overrides have the form "section.key=value" and are applied
/// before validation.
RunConfig parse_config(const std::string& text, const std::vector<std::string>& overrides = {});
RunConfig load_config(const std::filesystem::path& path,
                      const std::vector<std::string>& overrides = {});

/// Fully resolved document (explicit obstacle list, shortest round-trip
/// numbers); parsing it back yields the same configuration.
std::string to_yaml(const RunConfig& config);

}  // namespace uavtrack
