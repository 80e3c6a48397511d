#pragma once

#include <string_view>
#include <vector>

#include "uavtrack/environment.hpp"
#include "uavtrack/qnet.hpp"

namespace uavtrack::qnet {

enum class ObservationMode {
  features,  // 7 normalised scalars
  grid,      // egocentric multi-channel occupancy grid
};

std::string_view to_string(ObservationMode mode);
ObservationMode observation_mode_from_string(std::string_view name);

/// Feature layout:
///   [x/s, y/s, level/n_h, (seen_x - x)/s, (seen_y - y)/s, min(t_nv, t_cap)/t_cap, visible]
/// Grid layout (grid_size^2 cells of side uav_speed, centred on the UAV), channels:
///   0 obstacle at least as tall as the UAV, 1 outside the arena, 2 last-seen target
///   (clamped to the border when out of view), 3 level/n_h, 4 t_nv/t_cap, 5 visible.
struct ObservationSpec {
  ObservationMode mode = ObservationMode::features;
  int t_cap = 50;
  int grid_size = 11;

  static constexpr int kFeatureDim = 7;
  static constexpr int kGridChannels = 6;

  int dim() const;
  /// Network shape for this observation; conv_channels only used in grid mode.
  Architecture architecture(std::vector<int> hidden, std::vector<int> conv_channels) const;
  friend bool operator==(const ObservationSpec&, const ObservationSpec&) = default;
};

Vector observe(const env::WorldState& state, const env::EnvConfig& config,
               const ObservationSpec& spec);

}  // namespace uavtrack::qnet
