#include "uavtrack/reward.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace uavtrack::reward {

void RewardParams::validate() const {
  if (!(collision < intersection && intersection < 0.0)) {
    throw std::invalid_argument("reward: require collision < intersection < 0");
  }
  if (!(distance_gain > 0.0 && height_gain > 0.0)) {
    throw std::invalid_argument("reward: distance and height gains must be positive");
  }
  if (!(not_visible < 0.0)) throw std::invalid_argument("reward: not_visible must be negative");
  if (!(beta > 0.0)) throw std::invalid_argument("reward: beta must be positive");
  if (!(dist_epsilon > 0.0)) throw std::invalid_argument("reward: dist_epsilon must be positive");
}

std::string_view to_string(Branch branch) {
  switch (branch) {
    case Branch::collision: return "collision";
    case Branch::intersection: return "intersection";
    case Branch::visible: return "visible";
    case Branch::not_visible: return "not_visible";
  }
  return "unknown";
}

double positive_reward(const geometry::Point3& uav, const geometry::Point2& target,
                       const RewardParams& params) {
  if (!(uav.z > 0.0)) {
    throw std::invalid_argument("positive_reward: UAV altitude must be positive");
  }
  const double distance =
      std::max(geometry::ground_distance(uav.ground(), target), params.dist_epsilon);
  return params.distance_gain / distance + params.height_gain / uav.z;
}

double invisibility_penalty(int t_nv, const RewardParams& params) {
  const double decay = std::exp(-params.beta * static_cast<double>(t_nv));
  if (params.penalty_mode == PenaltyMode::growing) return params.not_visible * (1.0 - decay);
  return params.not_visible * decay;
}

RewardOutcome compute_reward(const geometry::Point3& uav, const geometry::Point2& target,
                             std::span<const geometry::Cylinder> obstacles,
                             const geometry::FovSpec& fov, int t_nv, const RewardParams& params,
                             geometry::OcclusionModel model) {
  if (t_nv < 0) throw std::invalid_argument("compute_reward: t_nv must be non-negative");

  bool collision = false;
  bool intersection = false;
  for (const auto& obs : obstacles) {
    if (geometry::check_collision(uav, obs)) {
      collision = true;
      break;
    }
    if (geometry::check_occlusion(uav, target, obs, model)) intersection = true;
  }

  if (collision) return {params.collision, t_nv + 1, Branch::collision};
  if (intersection) return {params.intersection, t_nv + 1, Branch::intersection};
  if (geometry::check_visibility(uav, target, fov)) {
    return {positive_reward(uav, target, params), 0, Branch::visible};
  }
  return {invisibility_penalty(t_nv + 1, params), t_nv + 1, Branch::not_visible};
}

}  // namespace uavtrack::reward
