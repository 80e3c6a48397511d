#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace uavtrack::cli {

inline constexpr const char* kVersion = "0.1.0";

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;    // bad config, incompatible or malformed input
inline constexpr int kExitRuntime = 2;  // I/O or other failure while running

/// Environment variable naming the parent of default run directories.
inline constexpr const char* kOutRootVar = "UAVTRACK_OUT_ROOT";

struct TrainArgs {
  std::filesystem::path config;
  std::filesystem::path out_dir;  // empty: <out root>/train-seed<seed>
  std::optional<std::uint64_t> seed;
  std::optional<int> episodes;
  std::vector<std::string> overrides;
};

struct EvalArgs {
  std::filesystem::path checkpoint;  // ignored for the random policy
  std::filesystem::path config;
  std::optional<int> episodes;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::filesystem::path trajectories;  // empty: no trajectory logs
  std::string policy = "greedy";       // greedy | random
  std::vector<std::string> overrides;
};

struct CurriculumArgs {
  std::filesystem::path checkpoint;
  std::filesystem::path config;  // the new environment
  std::filesystem::path out_dir;
  std::optional<int> episodes;
  std::optional<std::uint64_t> seed;
  bool reset_k = true;
  std::vector<std::string> overrides;
};

struct RenderArgs {
  std::filesystem::path trajectory;
  std::filesystem::path config;
  std::filesystem::path out_svg;
  std::filesystem::path altitude_svg;  // empty: top-down view only
  std::vector<std::string> overrides;
};

int cmd_train(const TrainArgs& args, std::ostream& out, std::ostream& err);
int cmd_eval(const EvalArgs& args, std::ostream& out, std::ostream& err);
int cmd_curriculum(const CurriculumArgs& args, std::ostream& out, std::ostream& err);
int cmd_render(const RenderArgs& args, std::ostream& out, std::ostream& err);

/// Parses argv and dispatches to a subcommand.
int run(int argc, char** argv, std::ostream& out, std::ostream& err);

/// Columns of the curriculum comparison table.
inline constexpr const char* kComparisonHeader = "stage,avg_distance,avg_time,avg_reward";

}  // namespace uavtrack::cli
