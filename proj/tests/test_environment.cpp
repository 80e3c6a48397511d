#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <map>

#include "uavtrack/environment.hpp"

using namespace uavtrack;
using namespace uavtrack::env;

namespace {

bool inside_some_block(const Cylinder& c, const EnvConfig& config) {
  const double b = config.block_size;
  const double bx = std::floor(c.center.x / b);
  const double by = std::floor(c.center.y / b);
  return c.center.x - c.radius > bx * b && c.center.x + c.radius < (bx + 1) * b &&
         c.center.y - c.radius > by * b && c.center.y + c.radius < (by + 1) * b;
}

/// Chi-square upper 1% quantile for 3 degrees of freedom.
constexpr double kChi2Df3P01 = 11.345;

}  // namespace

TEST(GenerateEnvironment, DeterministicAndInRange) {
  const auto a = generate_environment(3, 7);
  const auto b = generate_environment(3, 7);
  EXPECT_EQ(a.obstacles, b.obstacles);
  ASSERT_EQ(a.obstacles.size(), 3u);
  for (const auto& c : a.obstacles) {
    EXPECT_GE(c.radius, 2.5);
    EXPECT_LE(c.radius, 10.0);
    EXPECT_GE(c.height, 1.0);
    EXPECT_LE(c.height, 50.0);
  }
}

TEST(GenerateEnvironment, EmptyAllowed) {
  const auto config = generate_environment(0, 123);
  EXPECT_TRUE(config.obstacles.empty());
  EXPECT_NO_THROW(config.validate());
}

TEST(GenerateEnvironment, OffRoadAndDisjoint) {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    for (int n : {2, 5, 7}) {
      const auto config = generate_environment(n, seed);
      ASSERT_EQ(config.obstacles.size(), static_cast<std::size_t>(n));
      for (std::size_t i = 0; i < config.obstacles.size(); ++i) {
        EXPECT_TRUE(inside_some_block(config.obstacles[i], config));
        for (std::size_t j = 0; j < i; ++j) {
          const auto& p = config.obstacles[i];
          const auto& q = config.obstacles[j];
          EXPECT_GT(geometry::ground_distance(p.center, q.center), p.radius + q.radius);
        }
      }
    }
  }
}

TEST(GenerateEnvironment, LargerCountExtendsSmaller) {
  const auto small = generate_environment(3, 7);
  const auto large = generate_environment(7, 7);
  for (std::size_t i = 0; i < small.obstacles.size(); ++i) {
    EXPECT_EQ(small.obstacles[i], large.obstacles[i]);
  }
}

TEST(GenerateEnvironment, RejectsBadCount) {
  EXPECT_THROW(generate_environment(8, 1), std::invalid_argument);
  EXPECT_THROW(generate_environment(-1, 1), std::invalid_argument);
}

TEST(EnvConfig, Validation) {
  EnvConfig c;
  EXPECT_NO_THROW(c.validate());
  c.target_speed_max = 3.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = {};
  c.block_size = 30;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = {};
  c.t_max = 501;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = {};
  c.obstacles = {{{1, 50}, 3, 10}};
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(RoadNetwork, IncidentDirections) {
  const RoadNetwork roads(EnvConfig{});
  EXPECT_EQ(roads.incident({40, 40}).size(), 4u);
  EXPECT_EQ(roads.incident({0, 40}).size(), 3u);
  EXPECT_EQ(roads.incident({0, 0}).size(), 2u);
  EXPECT_EQ(roads.incident({100, 100}).size(), 2u);
  EXPECT_TRUE(roads.on_road({40, 13}));
  EXPECT_FALSE(roads.on_road({41, 13}));
  EXPECT_TRUE(roads.is_junction({60, 80}));
  EXPECT_FALSE(roads.is_junction({60, 81}));
}

TEST(Reset, DeterministicCollisionFreeOnRoad) {
  const auto config = generate_environment(7, 3);
  const RoadNetwork roads(config);
  for (std::uint64_t seed = 0; seed < 500; ++seed) {
    const auto s = reset(config, seed);
    EXPECT_EQ(s, reset(config, seed));
    EXPECT_EQ(s.t, 0);
    EXPECT_EQ(s.t_nv, 0);
    EXPECT_EQ(s.uav.level, 0);
    EXPECT_EQ(s.uav.position.z, config.h_min);
    EXPECT_TRUE(roads.is_junction(s.target.position));
    EXPECT_EQ(s.last_seen, s.target.position);
    for (const auto& c : config.obstacles) EXPECT_FALSE(geometry::check_collision(s.uav.position, c));
    EXPECT_EQ(std::fmod(s.uav.position.x, config.uav_speed), 0.0);
    EXPECT_EQ(std::fmod(s.uav.position.y, config.uav_speed), 0.0);
  }
}

TEST(Reset, AboveTargetStart) {
  EnvConfig config;
  config.uav_start = StartMode::above_target;
  const auto s = reset(config, 4);
  EXPECT_EQ(s.uav.position.ground(), s.target.position);
  EXPECT_TRUE(s.visible);
}

TEST(ApplyAction, Examples) {
  const EnvConfig config;
  UavPose uav{{50, 50, config.altitude(3)}, 3};
  const auto up = apply_action(uav, Action::up, config);
  EXPECT_EQ(up.level, 4);
  EXPECT_NEAR(up.position.z - uav.position.z, config.height_step(), 1e-12);

  uav = {{50, 50, config.altitude(config.n_h)}, config.n_h};
  EXPECT_EQ(apply_action(uav, Action::up, config), uav);

  uav = {{0, 50, config.h_min}, 0};
  EXPECT_EQ(apply_action(uav, Action::west, config).position.x, 0.0);
  EXPECT_EQ(apply_action(uav, Action::down, config), uav);

  uav = {{50, 50, config.h_min}, 0};
  EXPECT_EQ(apply_action(uav, Action::north, config).position, (Point3{50, 52, config.h_min}));
  EXPECT_EQ(apply_action(uav, Action::south, config).position, (Point3{50, 48, config.h_min}));
  EXPECT_EQ(apply_action(uav, Action::east, config).position, (Point3{52, 50, config.h_min}));
  EXPECT_EQ(apply_action(uav, Action::west, config).position, (Point3{48, 50, config.h_min}));
}

TEST(TargetStep, MidSegment) {
  const EnvConfig config;
  auto rng = make_rng(1);
  const auto next = target_step({{45, 40}, Heading::east}, 1.0, config, rng);
  EXPECT_EQ(next.position, (Point2{46, 40}));
  EXPECT_EQ(next.heading, Heading::east);
}

TEST(TargetStep, StopsOnJunctionWhenOvershooting) {
  EnvConfig config;
  config.target_speed_max = 1.5;
  auto rng = make_rng(1);
  const auto next = target_step({{59, 40}, Heading::east}, 1.5, config, rng);
  EXPECT_EQ(next.position, (Point2{60, 40}));
}

TEST(TargetStep, FourWayJunctionIsUniform) {
  const EnvConfig config;
  auto rng = make_rng(2024);
  std::map<Heading, int> counts;
  const int draws = 10'000;
  for (int i = 0; i < draws; ++i) {
    counts[target_step({{39, 40}, Heading::east}, 1.0, config, rng).heading]++;
  }
  ASSERT_EQ(counts.size(), 4u);
  double chi2 = 0.0;
  for (const auto& [heading, n] : counts) {
    const double expected = draws / 4.0;
    chi2 += (n - expected) * (n - expected) / expected;
  }
  EXPECT_LT(chi2, kChi2Df3P01);
}

TEST(TargetStep, CornerJunctionOnlyTwoDirections) {
  const EnvConfig config;
  auto rng = make_rng(8);
  std::map<Heading, int> counts;
  for (int i = 0; i < 2000; ++i) {
    counts[target_step({{1, 0}, Heading::west}, 1.0, config, rng).heading]++;
  }
  EXPECT_EQ(counts.size(), 2u);
  EXPECT_GT(counts[Heading::north], 0);
  EXPECT_GT(counts[Heading::east], 0);
}

TEST(Step, PropertiesOverRandomEpisodes) {
  const auto config = generate_environment(5, 11);
  const reward::RewardParams params;
  const RoadNetwork roads(config);
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    Environment env(config, params);
    env.reset(seed);
    auto rng = make_rng(seed, 99);
    int steps = 0;
    while (!env.state().done) {
      const auto before = env.state();
      const auto& out = env.step(action_from_index(uniform_int(rng, 0, 5)));
      ++steps;
      const auto& s = out.next;
      EXPECT_TRUE(roads.on_road(s.target.position));
      const double moved = geometry::ground_distance(before.target.position, s.target.position);
      if (roads.is_junction(s.target.position)) {
        EXPECT_LE(moved, before.target_speed + 1e-12);
      } else {
        EXPECT_NEAR(moved, before.target_speed, 1e-12);
      }
      EXPECT_GE(s.uav.level, 0);
      EXPECT_LE(s.uav.level, config.n_h);
      EXPECT_EQ(s.uav.position.z, config.altitude(s.uav.level));
      EXPECT_GE(s.uav.position.x, 0.0);
      EXPECT_LE(s.uav.position.x, config.side);
      EXPECT_EQ(s.t_nv == 0, out.info.visible);
      for (const auto& c : config.obstacles) {
        EXPECT_FALSE(geometry::check_collision({s.target.position.x, s.target.position.y, 0}, c));
      }
      if (out.info.collided) {
        EXPECT_TRUE(out.done);
        EXPECT_EQ(out.reward, params.collision);
      }
    }
    EXPECT_LE(steps, 500);
  }
}

TEST(Step, DoneAtStepCap) {
  EnvConfig config;
  config.t_max = 500;
  Environment env(config, {});
  env.reset(1);
  int steps = 0;
  const std::array<Action, 2> hover{Action::up, Action::down};
  while (!env.state().done) env.step(hover[steps++ % 2]);
  EXPECT_EQ(steps, 500);
  EXPECT_EQ(env.state().t, 500);
  EXPECT_THROW(env.step(Action::up), std::logic_error);
}

TEST(Step, CollisionTerminatesByDefault) {
  EnvConfig config;
  config.obstacles = {{{50, 43}, 2.5, 30}};
  WorldState s = reset(config, 0);
  s.uav = {{50, 40, config.h_min}, 0};
  auto rng = make_rng(0);
  const auto out = step(s, Action::north, config, {}, rng);
  EXPECT_TRUE(out.info.collided);
  EXPECT_TRUE(out.done);
  EXPECT_EQ(out.reward, -1500.0);

  config.terminate_on_collision = false;
  rng = make_rng(0);
  const auto cont = step(s, Action::north, config, {}, rng);
  EXPECT_TRUE(cont.info.collided);
  EXPECT_FALSE(cont.done);
  EXPECT_EQ(cont.next.t_nv, s.t_nv + 1);
}

TEST(Step, VisibleResetsCounterAndRecordsLastSeen) {
  EnvConfig config;
  WorldState s = reset(config, 0);
  s.target = {{45, 40}, Heading::east};
  s.uav = {{46, 40, config.h_min}, 0};
  s.t_nv = 6;
  auto rng = make_rng(0);
  const auto out = step(s, Action::up, config, {}, rng);
  EXPECT_TRUE(out.info.visible);
  EXPECT_EQ(out.next.t_nv, 0);
  EXPECT_EQ(out.next.last_seen, (Point2{46, 40}));
}

TEST(Step, DeterministicTrajectories) {
  const auto config = generate_environment(3, 7);
  auto run = [&] {
    Environment env(config, {});
    env.reset(42);
    std::vector<double> rewards;
    int i = 0;
    while (!env.state().done) rewards.push_back(env.step(action_from_index(i++ % 6)).reward);
    return std::make_pair(rewards, env.state());
  };
  EXPECT_EQ(run(), run());
}
