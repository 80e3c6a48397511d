#pragma once

#include <cstdint>
#include <span>
#include <string_view>

#include "uavtrack/geometry.hpp"

namespace uavtrack::reward {

/// How the invisibility penalty evolves with the steps-since-seen counter.
enum class PenaltyMode {
  decaying,  // R_nv * exp(-beta * t_nv), as printed
  growing,   // R_nv * (1 - exp(-beta * t_nv))
};

/// Signed reward constants. Collision and intersection are negative,
/// the positive-reward constants are positive.
struct RewardParams {
  double collision = -1500.0;       // R_c
  double intersection = -50.0;      // R_i
  double distance_gain = 3000.0;    // R_v^c
  double height_gain = 1500.0;      // h_v^c
  double not_visible = -10.0;       // R_nv
  double beta = 2.0;
  double dist_epsilon = 0.5;
  PenaltyMode penalty_mode = PenaltyMode::decaying;

  /// Throws std::invalid_argument when the sign invariants are broken.
  void validate() const;
};

enum class Branch : std::uint8_t { collision, intersection, visible, not_visible };

std::string_view to_string(Branch branch);

struct RewardOutcome {
  double reward = 0.0;
  int t_nv_next = 0;
  Branch branch = Branch::not_visible;
};

double positive_reward(const geometry::Point3& uav, const geometry::Point2& target,
                       const RewardParams& params);

/// Penalty for a step on which the target stays unseen; t_nv is the
/// already-incremented counter.
double invisibility_penalty(int t_nv, const RewardParams& params);

/// Piecewise reward with precedence collision > intersection > visible > not visible.
/// t_nv is reset on the visible branch and incremented on every other branch.
RewardOutcome compute_reward(const geometry::Point3& uav, const geometry::Point2& target,
                             std::span<const geometry::Cylinder> obstacles,
                             const geometry::FovSpec& fov, int t_nv, const RewardParams& params,
                             geometry::OcclusionModel model = geometry::OcclusionModel::exact);

}  // namespace uavtrack::reward
