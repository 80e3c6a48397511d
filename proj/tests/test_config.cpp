#include <gtest/gtest.h>

#include "uavtrack/config.hpp"

using namespace uavtrack;

namespace {

std::string error_of(const std::string& text, const std::vector<std::string>& overrides = {}) {
  try {
    parse_config(text, overrides);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Config, EmptyDocumentGivesDefaults) {
  const auto c = parse_config("");
  EXPECT_EQ(c.env.side, 100.0);
  EXPECT_EQ(c.env.obstacles.size(), 3u);
  EXPECT_EQ(c.env.obstacles, env::generate_environment(3, 7).obstacles);
  EXPECT_EQ(c.train.gamma, 0.1);
  EXPECT_EQ(c.reward.collision, -1500.0);
  EXPECT_EQ(c.exploration.p_ss, 0.9);
}

TEST(Config, ReadsSections) {
  const auto c = parse_config(R"(
environment:
  n_obstacles: 5
  obstacle_seed: 11
  theta_fov_deg: 30
  target_speed: 1.5
reward:
  R_nv: -20
  penalty_mode: growing
exploration:
  p_sat: 0.2
train:
  episodes: 40
  hidden: [64, 32]
  lr_half_life: 250
evaluation:
  threads: 3
)");
  EXPECT_EQ(c.env.obstacles, env::generate_environment(5, 11).obstacles);
  EXPECT_EQ(c.env.theta_fov_deg, 30.0);
  EXPECT_EQ(c.env.target_speed_min, 1.5);
  EXPECT_EQ(c.env.target_speed_max, 1.5);
  EXPECT_EQ(c.reward.not_visible, -20.0);
  EXPECT_EQ(c.reward.penalty_mode, reward::PenaltyMode::growing);
  EXPECT_EQ(c.exploration.p_sat, 0.2);
  EXPECT_EQ(c.train.episodes, 40);
  EXPECT_EQ(c.train.hidden, (std::vector<int>{64, 32}));
  EXPECT_NEAR(c.train.lr_decay, std::pow(0.5, 1.0 / 250), 1e-15);
  EXPECT_EQ(c.evaluation.threads, 3);
}

TEST(Config, ExplicitObstacles) {
  const auto c = parse_config(R"(
environment:
  obstacles:
    - {x: 30, y: 30, r: 4, h: 12}
    - {x: 70, y: 50, r: 2.5, h: 50}
)");
  ASSERT_EQ(c.env.obstacles.size(), 2u);
  EXPECT_EQ(c.n_obstacles, 2);
  EXPECT_EQ(c.env.obstacles[1], (geometry::Cylinder{{70, 50}, 2.5, 50}));
  EXPECT_NE(error_of("environment:\n  obstacles:\n    - {x: 30, y: 30, r: 12, h: 5}\n")
                .find("2.5-10"),
            std::string::npos);
}

TEST(Config, RangeErrorsCiteTheAllowedRange) {
  EXPECT_NE(error_of("environment:\n  theta_fov_deg: 95\n").find("30-45"), std::string::npos);
  EXPECT_NE(error_of("environment:\n  n_h: 30\n").find("5-20"), std::string::npos);
  EXPECT_NE(error_of("environment:\n  t_max: 600\n").find("1-500"), std::string::npos);
  EXPECT_NE(error_of("reward:\n  R_c: -500\n").find("1000-2000"), std::string::npos);
  EXPECT_NE(error_of("exploration:\n  p_ss: 0.5\n").find("0.9-0.95"), std::string::npos);
  EXPECT_NE(error_of("train:\n  gamma: 1.5\n").find("0-1"), std::string::npos);
  EXPECT_NE(error_of("environment:\n  h_c: 3\n").find("h_c"), std::string::npos);
}

TEST(Config, UnknownEntriesRejected) {
  EXPECT_NE(error_of("environment:\n  sidee: 100\n").find("environment.sidee"), std::string::npos);
  EXPECT_NE(error_of("optimizer:\n  kind: adam\n").find("optimizer"), std::string::npos);
  EXPECT_FALSE(error_of("environment: [1, 2\n").empty());
  EXPECT_FALSE(error_of("environment:\n  side: abc\n").empty());
}

TEST(Config, OverridesApplyBeforeValidation) {
  const auto c = parse_config("environment:\n  theta_fov_deg: 95\n", {"environment.theta_fov_deg=40"});
  EXPECT_EQ(c.env.theta_fov_deg, 40.0);
  EXPECT_EQ(parse_config("", {"train.seed=99"}).train.seed, 99u);
  EXPECT_FALSE(error_of("", {"train.seed"}).empty());
  EXPECT_FALSE(error_of("", {"seed=4"}).empty());
}

TEST(Config, YamlRoundTrip) {
  auto c = parse_config("environment:\n  n_obstacles: 6\nreward:\n  beta: 3.3\n");
  const auto text = to_yaml(c);
  const auto back = parse_config(text);
  EXPECT_EQ(to_yaml(back), text);
  EXPECT_EQ(back.env.obstacles, c.env.obstacles);
  EXPECT_EQ(back.reward.beta, 3.3);
  EXPECT_EQ(back.train.lr_decay, c.train.lr_decay);
}
