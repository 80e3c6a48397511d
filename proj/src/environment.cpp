#include "uavtrack/environment.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace uavtrack::env {

namespace {

constexpr double kRadiusMin = 2.5;
constexpr double kRadiusMax = 10.0;
constexpr double kHeightMin = 1.0;
constexpr double kHeightMax = 50.0;
// Clearance kept between an obstacle and the road centre lines.
constexpr double kRoadMargin = 0.5;
constexpr int kPlacementRetries = 1000;

bool collides_any(const Point3& p, const std::vector<Cylinder>& obstacles) {
  return std::any_of(obstacles.begin(), obstacles.end(),
                     [&](const Cylinder& c) { return geometry::check_collision(p, c); });
}

double snap(double value, double block) { return std::round(value / block) * block; }

}  // namespace

std::string_view to_string(Action a) {
  switch (a) {
    case Action::north: return "north";
    case Action::south: return "south";
    case Action::west: return "west";
    case Action::east: return "east";
    case Action::up: return "up";
    case Action::down: return "down";
  }
  return "unknown";
}

Action action_from_index(std::size_t index) {
  if (index >= kNumActions) throw std::out_of_range("action index out of range");
  return kAllActions[index];
}

std::string_view to_string(Heading h) {
  switch (h) {
    case Heading::north: return "north";
    case Heading::south: return "south";
    case Heading::west: return "west";
    case Heading::east: return "east";
  }
  return "unknown";
}

int EnvConfig::blocks_per_side() const { return static_cast<int>(std::lround(side / block_size)); }

void EnvConfig::validate() const {
  auto fail = [](const std::string& msg) { throw std::invalid_argument("environment: " + msg); };
  if (!(side > 0.0)) fail("side must be positive");
  if (!(block_size > 0.0 && block_size <= side)) fail("block_size must lie in (0, side]");
  const int blocks = blocks_per_side();
  if (blocks < 1 || std::abs(blocks * block_size - side) > 1e-9 * side) {
    fail("block_size must divide side");
  }
  if (!(h_min > 0.0 && h_min < h_max)) fail("require 0 < h_min < h_max");
  if (n_h < 1) fail("n_h must be at least 1");
  if (!(theta_fov_deg > 0.0 && theta_fov_deg < 90.0)) fail("theta_fov_deg must lie in (0, 90)");
  if (t_max < 1 || t_max > 500) fail("t_max must lie in [1, 500]");
  if (!(target_speed_min >= 0.0 && target_speed_min <= target_speed_max)) {
    fail("require 0 <= target_speed_min <= target_speed_max");
  }
  if (!(uav_speed > 0.0 && uav_speed >= target_speed_max)) {
    fail("uav_speed must be positive and at least the target speed");
  }
  for (const auto& c : obstacles) {
    if (!(c.radius > 0.0 && c.height > 0.0)) fail("obstacle radius and height must be positive");
    if (c.center.x - c.radius < 0.0 || c.center.x + c.radius > side ||
        c.center.y - c.radius < 0.0 || c.center.y + c.radius > side) {
      fail("obstacle extends outside the arena");
    }
  }
}

EnvConfig generate_environment(int n, std::uint64_t seed, EnvConfig base) {
  if (n < 0 || n > 7) throw std::invalid_argument("generate_environment: n must lie in [0, 7]");
  base.obstacles.clear();
  base.validate();

  const double block = base.block_size;
  const int blocks = base.blocks_per_side();
  const double radius_max = std::min(kRadiusMax, 0.5 * block - kRoadMargin);
  if (n > 0 && radius_max < kRadiusMin) {
    throw PlacementError("generate_environment: blocks too small for the minimum radius");
  }

  Rng rng = make_rng(seed, 0x0b57);
  for (int i = 0; i < n; ++i) {
    bool placed = false;
    for (int attempt = 0; attempt < kPlacementRetries && !placed; ++attempt) {
      const int bx = uniform_int(rng, 0, blocks - 1);
      const int by = uniform_int(rng, 0, blocks - 1);
      Cylinder c;
      c.radius = uniform(rng, kRadiusMin, radius_max);
      c.height = uniform(rng, kHeightMin, kHeightMax);
      const double pad = c.radius + kRoadMargin;
      c.center.x = uniform(rng, bx * block + pad, (bx + 1) * block - pad);
      c.center.y = uniform(rng, by * block + pad, (by + 1) * block - pad);
      const bool overlaps = std::any_of(
          base.obstacles.begin(), base.obstacles.end(), [&](const Cylinder& other) {
            return geometry::ground_distance(c.center, other.center) <= c.radius + other.radius;
          });
      if (!overlaps) {
        base.obstacles.push_back(c);
        placed = true;
      }
    }
    if (!placed) {
      throw PlacementError("generate_environment: could not place obstacle " +
                           std::to_string(i) + " without overlap");
    }
  }
  return base;
}

RoadNetwork::RoadNetwork(const EnvConfig& config)
    : side_(config.side), block_(config.block_size), blocks_(config.blocks_per_side()) {}

bool RoadNetwork::on_road(const Point2& p) const {
  if (p.x < 0.0 || p.x > side_ || p.y < 0.0 || p.y > side_) return false;
  return snap(p.x, block_) == p.x || snap(p.y, block_) == p.y;
}

bool RoadNetwork::is_junction(const Point2& p) const {
  return on_road(p) && snap(p.x, block_) == p.x && snap(p.y, block_) == p.y;
}

std::vector<Heading> RoadNetwork::incident(const Point2& p) const {
  std::vector<Heading> out;
  if (p.y < side_) out.push_back(Heading::north);
  if (p.y > 0.0) out.push_back(Heading::south);
  if (p.x > 0.0) out.push_back(Heading::west);
  if (p.x < side_) out.push_back(Heading::east);
  return out;
}

WorldState reset(const EnvConfig& config, std::uint64_t seed) {
  Rng rng = make_rng(seed, 0x5e7);
  const RoadNetwork roads(config);
  const int m = roads.junctions_per_side();

  WorldState s;
  s.target.position = roads.junction(uniform_int(rng, 0, m - 1), uniform_int(rng, 0, m - 1));
  const auto headings = roads.incident(s.target.position);
  s.target.heading = headings[uniform_int(rng, 0, static_cast<int>(headings.size()) - 1)];
  s.target_speed = uniform(rng, config.target_speed_min, config.target_speed_max);

  s.uav.level = 0;
  const double z = config.altitude(0);
  if (config.uav_start == StartMode::above_target) {
    s.uav.position = {s.target.position.x, s.target.position.y, z};
  } else {
    const int lattice = static_cast<int>(std::floor(config.side / config.uav_speed));
    bool found = false;
    for (int attempt = 0; attempt < kPlacementRetries && !found; ++attempt) {
      const Point3 p{uniform_int(rng, 0, lattice) * config.uav_speed,
                     uniform_int(rng, 0, lattice) * config.uav_speed, z};
      if (!collides_any(p, config.obstacles)) {
        s.uav.position = p;
        found = true;
      }
    }
    if (!found) {
      // Arena centre-line points lie on roads and are always clear.
      s.uav.position = {0.0, 0.0, z};
    }
  }

  s.last_seen = s.target.position;
  s.visible = geometry::target_visible(s.uav.position, s.target.position, config.obstacles,
                                       config.fov(), config.occlusion_model)
                  .visible;
  return s;
}

UavPose apply_action(const UavPose& uav, Action a, const EnvConfig& config) {
  UavPose next = uav;
  auto clamp_xy = [&](double v) { return std::clamp(v, 0.0, config.side); };
  switch (a) {
    case Action::north: next.position.y = clamp_xy(uav.position.y + config.uav_speed); break;
    case Action::south: next.position.y = clamp_xy(uav.position.y - config.uav_speed); break;
    case Action::west: next.position.x = clamp_xy(uav.position.x - config.uav_speed); break;
    case Action::east: next.position.x = clamp_xy(uav.position.x + config.uav_speed); break;
    case Action::up: next.level = std::min(uav.level + 1, config.n_h); break;
    case Action::down: next.level = std::max(uav.level - 1, 0); break;
  }
  next.position.z = config.altitude(next.level);
  return next;
}

TargetState target_step(const TargetState& target, double speed, const EnvConfig& config,
                        Rng& rng) {
  if (speed <= 0.0) return target;
  const double block = config.block_size;
  TargetState next = target;
  Point2& p = next.position;

  // Coordinate along the heading and the next junction coordinate on that axis.
  double* axis = nullptr;
  double junction = 0.0;
  switch (target.heading) {
    case Heading::east:
      axis = &p.x;
      junction = (std::floor(p.x / block) + 1.0) * block;
      break;
    case Heading::west:
      axis = &p.x;
      junction = (std::ceil(p.x / block) - 1.0) * block;
      break;
    case Heading::north:
      axis = &p.y;
      junction = (std::floor(p.y / block) + 1.0) * block;
      break;
    case Heading::south:
      axis = &p.y;
      junction = (std::ceil(p.y / block) - 1.0) * block;
      break;
  }
  junction = std::clamp(junction, 0.0, config.side);

  const double gap = std::abs(junction - *axis);
  if (speed < gap) {
    const bool forward = target.heading == Heading::east || target.heading == Heading::north;
    *axis += forward ? speed : -speed;
    return next;
  }

  *axis = junction;
  const auto headings = RoadNetwork(config).incident(p);
  next.heading = headings[uniform_int(rng, 0, static_cast<int>(headings.size()) - 1)];
  return next;
}

StepOutcome step(const WorldState& state, Action a, const EnvConfig& config,
                 const reward::RewardParams& params, Rng& rng) {
  if (state.done) throw std::logic_error("step: episode already finished");

  StepOutcome out;
  WorldState& s = out.next;
  s = state;
  s.uav = apply_action(state.uav, a, config);
  s.target = target_step(state.target, state.target_speed, config, rng);
  s.t = state.t + 1;

  const auto fov = config.fov();
  const auto rr = reward::compute_reward(s.uav.position, s.target.position, config.obstacles, fov,
                                         state.t_nv, params, config.occlusion_model);
  const auto report = geometry::target_visible(s.uav.position, s.target.position,
                                               config.obstacles, fov, config.occlusion_model);
  s.t_nv = rr.t_nv_next;
  s.visible = rr.branch == reward::Branch::visible;
  if (s.visible) s.last_seen = s.target.position;

  out.reward = rr.reward;
  out.branch = rr.branch;
  out.info.visible = s.visible;
  out.info.occluded = report.occluded_by.has_value();
  out.info.occluded_by = report.occluded_by;
  out.info.collided = rr.branch == reward::Branch::collision;
  out.info.distance = geometry::ground_distance(s.uav.position.ground(), s.target.position);
  out.info.distance_3d = std::hypot(out.info.distance, s.uav.position.z);

  s.done = (out.info.collided && config.terminate_on_collision) || s.t >= config.t_max;
  out.done = s.done;
  return out;
}

Environment::Environment(EnvConfig config, reward::RewardParams params)
    : config_(std::move(config)), params_(params) {
  config_.validate();
  params_.validate();
}

const WorldState& Environment::reset(std::uint64_t seed) {
  state_ = env::reset(config_, seed);
  rng_ = make_rng(seed, 0x7a6);
  return state_;
}

const StepOutcome& Environment::step(Action a) {
  last_ = env::step(state_, a, config_, params_, rng_);
  state_ = last_.next;
  return last_;
}

}  // namespace uavtrack::env
