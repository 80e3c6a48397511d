#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <vector>

#include "uavtrack/checkpoint.hpp"
#include "uavtrack/environment.hpp"
#include "uavtrack/observation.hpp"
#include "uavtrack/qnet.hpp"
#include "uavtrack/replay.hpp"
#include "uavtrack/reward.hpp"
#include "uavtrack/trajectory.hpp"

namespace uavtrack::agent {

struct ExplorationParams {
  double p_sat = 0.1;
  double alpha = 0.1;
  double p_ss = 0.9;
  int t_nv_threshold = 10;
  bool search_space = true;

  void validate() const;
};

struct TrainConfig {
  int episodes = 2000;
  std::uint64_t seed = 1;
  double lr_initial = 0.01;
  double lr_final = 0.001;
  double lr_decay = std::pow(0.5, 1.0 / 500.0);  // per episode
  double gamma = 0.1;
  int batch_size = 64;
  int replay_capacity = 50'000;
  int target_sync = 500;  // gradient steps
  int warmup = 1'000;
  /// Multiplies rewards before they enter the replay buffer. Environment
  /// rewards and every reported metric stay unscaled.
  double reward_scale = 1e-3;
  double max_grad_norm = 0.0;
  std::vector<int> hidden{128, 128};
  std::vector<int> conv_channels{8, 16, 16};
  qnet::ObservationSpec observation;
  int checkpoint_every = 0;  // episodes; 0 disables periodic checkpoints

  void validate() const;
};

struct EpisodeMetrics {
  int episode = 0;
  int steps = 0;
  int visible_steps = 0;
  double mean_distance = 0.0;
  double mean_distance_3d = 0.0;
  double mean_step_reward = 0.0;
  double cumulative_reward = 0.0;
  bool collided = false;
  double epsilon = 0.0;
  double lr = 0.0;
};

/// (1 - p_sat) e^{-alpha k} + p_sat
double exploration_probability(std::int64_t k, const ExplorationParams& params);

/// max(lr_final, lr_start * lr_decay^k)
double learning_rate(std::int64_t k, double lr_start, const TrainConfig& config);

struct ActionChoice {
  env::Action action = env::Action::north;
  bool random = false;
  bool search_space = false;
};

/// Search-Space mode (random with probability p_ss) overrides the episode
/// schedule while t_nv >= t_nv_threshold. Greedy ties go to the lowest index.
ActionChoice select_action(std::span<const double> q_values, std::int64_t k, int t_nv,
                           const ExplorationParams& params, Rng& rng);

class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Online DQN learner bound to one environment configuration.
class Trainer {
 public:
  Trainer(env::EnvConfig env_config, reward::RewardParams reward_params,
          ExplorationParams exploration, TrainConfig config);

  /// Continues from a checkpoint. With reset_k the exploration schedule restarts at
  /// k = 0; the learning rate resumes from the checkpoint's value either way.
  Trainer(const qnet::Checkpoint& checkpoint, env::EnvConfig env_config,
          reward::RewardParams reward_params, ExplorationParams exploration, TrainConfig config,
          bool reset_k);

  EpisodeMetrics train_episode();

  const qnet::QNetwork& online() const { return online_; }
  const qnet::QNetwork& target() const { return target_.net; }
  std::int64_t exploration_index() const { return k_; }
  std::int64_t gradient_steps() const { return gradient_steps_; }
  int episodes_run() const { return episodes_run_; }
  double current_learning_rate() const;
  qnet::Checkpoint checkpoint() const;

 private:
  void learn();

  env::EnvConfig env_config_;
  reward::RewardParams reward_params_;
  ExplorationParams exploration_;
  TrainConfig config_;
  qnet::QNetwork online_;
  qnet::TargetNetwork target_;
  qnet::Gradients grad_;
  qnet::ReplayBuffer buffer_;
  Rng rng_;
  std::int64_t k_ = 0;
  double lr_start_ = 0.0;
  std::int64_t gradient_steps_ = 0;
  int episodes_run_ = 0;
};

struct TrainResult {
  qnet::Checkpoint checkpoint;
  std::vector<EpisodeMetrics> log;
};

/// Called with (checkpoint, episodes completed) every checkpoint_every episodes.
using CheckpointSink = std::function<void(const qnet::Checkpoint&, int)>;

TrainResult train(const env::EnvConfig& env_config, const TrainConfig& config,
                  const ExplorationParams& exploration, const reward::RewardParams& reward_params,
                  const CheckpointSink& sink = {});

/// Maps the current world state to an action. Must not share mutable state
/// between calls on different threads; per-episode randomness comes from rng.
using Policy = std::function<env::Action(const env::WorldState&, Rng&)>;

Policy greedy_policy(qnet::QNetwork net, env::EnvConfig config, qnet::ObservationSpec spec);
Policy random_policy();

struct EvalOptions {
  int episodes = 100;
  std::uint64_t seed = 2024;
  int threads = 1;
  bool record_trajectories = false;
};

struct EvalResult {
  double avg_distance = 0.0;    // mean ground distance over every step
  double avg_distance_3d = 0.0;
  double avg_time = 0.0;        // mean visible steps per episode
  double avg_reward = 0.0;      // mean over episodes of the per-step reward
  std::vector<EpisodeMetrics> episodes;
  std::vector<std::vector<TrajectoryRecord>> trajectories;
};

/// Episode i of two evaluations with the same seed sees the same start state and
/// the same target motion, whatever the policy does.
EvalResult evaluate_policy(const Policy& policy, const env::EnvConfig& env_config,
                           const reward::RewardParams& reward_params, const EvalOptions& options);

/// Greedy rollout of the checkpoint's online network. Throws SchemaError when the
/// checkpoint's observation layout does not fit the environment.
EvalResult evaluate(const qnet::Checkpoint& checkpoint, const env::EnvConfig& env_config,
                    const reward::RewardParams& reward_params, const EvalOptions& options);

struct FinetuneConfig {
  TrainConfig train;
  bool reset_k = true;
};

struct CurriculumResult {
  qnet::Checkpoint checkpoint;
  std::vector<EpisodeMetrics> log;
  EvalResult before;
  EvalResult after;
};

CurriculumResult curriculum_finetune(const qnet::Checkpoint& checkpoint,
                                     const env::EnvConfig& new_env_config,
                                     const reward::RewardParams& reward_params,
                                     const ExplorationParams& exploration,
                                     const FinetuneConfig& finetune, const EvalOptions& eval);

void check_schema(const qnet::Checkpoint& checkpoint, const qnet::ObservationSpec& expected);

inline constexpr const char* kMetricsHeader =
    "episode,steps,visible_steps,mean_distance,mean_distance_3d,mean_step_reward,"
    "cumulative_reward,collided,epsilon,lr";

void write_metrics_csv(std::ostream& out, const std::vector<EpisodeMetrics>& rows);

}  // namespace uavtrack::agent
