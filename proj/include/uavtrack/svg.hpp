#pragma once

#include <string>
#include <vector>

#include "uavtrack/environment.hpp"
#include "uavtrack/trajectory.hpp"

namespace uavtrack::render {

struct SvgOptions {
  double pixels_per_unit = 6.0;
  double margin = 30.0;  // pixels
};

/// Top-down view: road grid, obstacles to scale with height labels, UAV and
/// target paths (one vertex per record), start and end markers.
std::string top_down_svg(const env::EnvConfig& config,
                         const std::vector<agent::TrajectoryRecord>& records,
                         const SvgOptions& options = {});

/// UAV altitude against time, with the altitude band drawn as limits.
std::string altitude_svg(const env::EnvConfig& config,
                         const std::vector<agent::TrajectoryRecord>& records,
                         const SvgOptions& options = {});

}  // namespace uavtrack::render
