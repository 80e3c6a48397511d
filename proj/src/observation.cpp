#include "uavtrack/observation.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace uavtrack::qnet {

std::string_view to_string(ObservationMode mode) {
  return mode == ObservationMode::grid ? "grid" : "features";
}

ObservationMode observation_mode_from_string(std::string_view name) {
  if (name == "features") return ObservationMode::features;
  if (name == "grid") return ObservationMode::grid;
  throw std::invalid_argument("unknown observation mode '" + std::string(name) + "'");
}

int ObservationSpec::dim() const {
  if (mode == ObservationMode::grid) return kGridChannels * grid_size * grid_size;
  return kFeatureDim;
}

Architecture ObservationSpec::architecture(std::vector<int> hidden,
                                           std::vector<int> conv_channels) const {
  Architecture arch;
  arch.input_dim = dim();
  arch.hidden = std::move(hidden);
  if (mode == ObservationMode::grid) {
    arch.grid = GridShape{kGridChannels, grid_size};
    arch.conv_channels = std::move(conv_channels);
  }
  return arch;
}

namespace {

Vector feature_observation(const env::WorldState& s, const env::EnvConfig& config, int t_cap) {
  const auto& p = s.uav.position;
  Vector obs(ObservationSpec::kFeatureDim);
  obs << p.x / config.side, p.y / config.side,
      static_cast<double>(s.uav.level) / config.n_h, (s.last_seen.x - p.x) / config.side,
      (s.last_seen.y - p.y) / config.side,
      static_cast<double>(std::min(s.t_nv, t_cap)) / t_cap, s.visible ? 1.0 : 0.0;
  return obs;
}

Vector grid_observation(const env::WorldState& s, const env::EnvConfig& config,
                        const ObservationSpec& spec) {
  const int g = spec.grid_size;
  const int cells = g * g;
  const int half = g / 2;
  const double cell = config.uav_speed;
  const auto& p = s.uav.position;
  Vector obs = Vector::Zero(ObservationSpec::kGridChannels * cells);

  for (int r = 0; r < g; ++r) {
    for (int c = 0; c < g; ++c) {
      const int idx = r * g + c;
      const geometry::Point3 probe{p.x + (c - half) * cell, p.y + (r - half) * cell, p.z};
      const bool outside =
          probe.x < 0.0 || probe.x > config.side || probe.y < 0.0 || probe.y > config.side;
      obs(1 * cells + idx) = outside ? 1.0 : 0.0;
      for (const auto& obstacle : config.obstacles) {
        if (geometry::check_collision(probe, obstacle)) {
          obs(0 * cells + idx) = 1.0;
          break;
        }
      }
    }
  }

  auto to_cell = [&](double offset) {
    return std::clamp(static_cast<int>(std::lround(offset / cell)) + half, 0, g - 1);
  };
  const int tr = to_cell(s.last_seen.y - p.y);
  const int tc = to_cell(s.last_seen.x - p.x);
  obs(2 * cells + tr * g + tc) = 1.0;

  obs.segment(3 * cells, cells).setConstant(static_cast<double>(s.uav.level) / config.n_h);
  obs.segment(4 * cells, cells)
      .setConstant(static_cast<double>(std::min(s.t_nv, spec.t_cap)) / spec.t_cap);
  obs.segment(5 * cells, cells).setConstant(s.visible ? 1.0 : 0.0);
  return obs;
}

}  // namespace

Vector observe(const env::WorldState& state, const env::EnvConfig& config,
               const ObservationSpec& spec) {
  if (spec.t_cap < 1) throw std::invalid_argument("observation: t_cap must be positive");
  if (spec.mode == ObservationMode::grid) {
    if (spec.grid_size < 1) throw std::invalid_argument("observation: grid_size must be positive");
    return grid_observation(state, config, spec);
  }
  return feature_observation(state, config, spec.t_cap);
}

}  // namespace uavtrack::qnet
