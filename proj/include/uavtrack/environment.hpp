#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "uavtrack/geometry.hpp"
#include "uavtrack/reward.hpp"
#include "uavtrack/rng.hpp"

namespace uavtrack::env {

using geometry::Cylinder;
using geometry::Point2;
using geometry::Point3;

/// North is +y, east is +x, origin at the south-west corner.
enum class Action : std::uint8_t { north, south, west, east, up, down };
inline constexpr std::size_t kNumActions = 6;
inline constexpr std::array<Action, kNumActions> kAllActions{
    Action::north, Action::south, Action::west, Action::east, Action::up, Action::down};

std::string_view to_string(Action a);
Action action_from_index(std::size_t index);

enum class Heading : std::uint8_t { north, south, west, east };
std::string_view to_string(Heading h);

enum class StartMode : std::uint8_t {
  random_lattice,  // seeded point on the UAV's motion lattice, lowest level
  above_target,    // directly above the target, lowest level
};

struct EnvConfig {
  double side = 100.0;
  std::vector<Cylinder> obstacles;
  double h_min = 5.0;
  double h_max = 30.0;
  int n_h = 10;
  double theta_fov_deg = 45.0;
  int t_max = 500;
  double block_size = 20.0;
  double uav_speed = 2.0;
  double target_speed_min = 1.0;
  double target_speed_max = 1.0;
  bool terminate_on_collision = true;
  geometry::OcclusionModel occlusion_model = geometry::OcclusionModel::exact;
  StartMode uav_start = StartMode::random_lattice;

  double height_step() const { return (h_max - h_min) / n_h; }
  double altitude(int level) const { return h_min + level * height_step(); }
  geometry::FovSpec fov() const { return geometry::FovSpec(theta_fov_deg); }
  int blocks_per_side() const;

  /// Structural invariants; throws std::invalid_argument.
  void validate() const;
};

class PlacementError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Places n non-overlapping cylinders strictly inside road-grid blocks.
/// Obstacle i depends only on the seed and obstacles 0..i-1, so a larger n
/// extends a smaller one with the same seed.
EnvConfig generate_environment(int n, std::uint64_t seed, EnvConfig base = {});

/// Axis-aligned road grid with spacing block_size covering [0, side]^2.
class RoadNetwork {
 public:
  explicit RoadNetwork(const EnvConfig& config);

  int junctions_per_side() const { return blocks_ + 1; }
  double block_size() const { return block_; }
  Point2 junction(int i, int j) const { return {i * block_, j * block_}; }
  bool on_road(const Point2& p) const;
  bool is_junction(const Point2& p) const;
  /// Directions of the road segments leaving a junction (2 at corners, 3 on edges, 4 inside).
  std::vector<Heading> incident(const Point2& junction) const;

 private:
  double side_;
  double block_;
  int blocks_;
};

struct TargetState {
  Point2 position;
  Heading heading = Heading::east;

  friend bool operator==(const TargetState&, const TargetState&) = default;
};

struct UavPose {
  Point3 position;
  int level = 0;

  friend bool operator==(const UavPose&, const UavPose&) = default;
};

struct WorldState {
  UavPose uav;
  TargetState target;
  double target_speed = 1.0;
  int t = 0;
  int t_nv = 0;
  Point2 last_seen;       // target position at the most recent visible step
  bool visible = false;   // target seen on the most recent step
  bool done = false;

  friend bool operator==(const WorldState&, const WorldState&) = default;
};

struct StepInfo {
  bool visible = false;
  bool occluded = false;
  std::optional<std::size_t> occluded_by;
  bool collided = false;
  double distance = 0.0;     // ground plane
  double distance_3d = 0.0;
};

struct StepOutcome {
  WorldState next;
  double reward = 0.0;
  reward::Branch branch = reward::Branch::not_visible;
  bool done = false;
  StepInfo info;
};

/// Fresh episode. UAV starts at the lowest level clear of every obstacle,
/// target at a random junction with a random incident heading. The last-seen
/// target position is initialised to the true start position.
WorldState reset(const EnvConfig& config, std::uint64_t seed);

UavPose apply_action(const UavPose& uav, Action a, const EnvConfig& config);

/// Advances the target along its heading; a move that would pass a junction stops
/// on it and the heading is resampled over every incident segment.
TargetState target_step(const TargetState& target, double speed, const EnvConfig& config,
                        Rng& rng);

/// Throws std::logic_error when the episode is already finished.
StepOutcome step(const WorldState& state, Action a, const EnvConfig& config,
                 const reward::RewardParams& params, Rng& rng);

/// Convenience owner of a config, reward constants and the motion RNG.
class Environment {
 public:
  Environment(EnvConfig config, reward::RewardParams params);

  const WorldState& reset(std::uint64_t seed);
  const StepOutcome& step(Action a);

  const WorldState& state() const { return state_; }
  const EnvConfig& config() const { return config_; }
  const reward::RewardParams& reward_params() const { return params_; }

 private:
  EnvConfig config_;
  reward::RewardParams params_;
  WorldState state_;
  StepOutcome last_;
  Rng rng_;
};

}  // namespace uavtrack::env
