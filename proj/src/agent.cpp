#include "uavtrack/agent.hpp"

#include <algorithm>
#include <cstdio>
#include <memory>
#include <ostream>
#include <string>
#include <thread>

namespace uavtrack::agent {

namespace {

constexpr std::uint64_t kAgentStream = 0xa9e7;
constexpr std::uint64_t kPolicyStream = 0x9011c7;
constexpr std::uint64_t kInitStream = 0x1417;

// Running per-episode statistics.
struct EpisodeAccumulator {
  int steps = 0;
  int visible = 0;
  double distance = 0.0;
  double distance_3d = 0.0;
  double reward = 0.0;
  bool collided = false;

  void add(const env::StepOutcome& out) {
    ++steps;
    visible += out.info.visible ? 1 : 0;
    distance += out.info.distance;
    distance_3d += out.info.distance_3d;
    reward += out.reward;
    collided = collided || out.info.collided;
  }

  EpisodeMetrics finish(int episode) const {
    EpisodeMetrics m;
    m.episode = episode;
    m.steps = steps;
    m.visible_steps = visible;
    m.cumulative_reward = reward;
    m.collided = collided;
    if (steps > 0) {
      m.mean_distance = distance / steps;
      m.mean_distance_3d = distance_3d / steps;
      m.mean_step_reward = reward / steps;
    }
    return m;
  }
};

}  // namespace

void ExplorationParams::validate() const {
  if (!(p_sat >= 0.0 && p_sat < 1.0)) throw std::invalid_argument("exploration: p_sat in [0, 1)");
  if (!(alpha > 0.0)) throw std::invalid_argument("exploration: alpha must be positive");
  if (!(p_ss > 0.0 && p_ss < 1.0)) throw std::invalid_argument("exploration: p_ss in (0, 1)");
  if (t_nv_threshold < 0) throw std::invalid_argument("exploration: negative t_nv threshold");
}

void TrainConfig::validate() const {
  auto fail = [](const std::string& msg) { throw std::invalid_argument("train: " + msg); };
  if (episodes < 0) fail("episodes must be non-negative");
  if (!(lr_initial >= 0.0 && lr_final >= 0.0 && lr_final <= lr_initial)) {
    fail("require 0 <= lr_final <= lr_initial");
  }
  if (!(lr_decay > 0.0 && lr_decay <= 1.0)) fail("lr_decay must lie in (0, 1]");
  if (!(gamma >= 0.0 && gamma <= 1.0)) fail("gamma must lie in [0, 1]");
  if (batch_size < 1) fail("batch_size must be positive");
  if (replay_capacity < batch_size) fail("replay_capacity must be at least batch_size");
  if (target_sync < 1) fail("target_sync must be positive");
  if (warmup < 0) fail("warmup must be non-negative");
  if (!(reward_scale > 0.0)) fail("reward_scale must be positive");
  if (!(max_grad_norm >= 0.0)) fail("max_grad_norm must be non-negative");
  if (checkpoint_every < 0) fail("checkpoint_every must be non-negative");
  observation.architecture(hidden, conv_channels).validate();
}

double exploration_probability(std::int64_t k, const ExplorationParams& params) {
  if (k < 0) throw std::invalid_argument("exploration_probability: negative episode index");
  return (1.0 - params.p_sat) * std::exp(-params.alpha * static_cast<double>(k)) + params.p_sat;
}

double learning_rate(std::int64_t k, double lr_start, const TrainConfig& config) {
  return std::max(config.lr_final, lr_start * std::pow(config.lr_decay, static_cast<double>(k)));
}

ActionChoice select_action(std::span<const double> q_values, std::int64_t k, int t_nv,
                           const ExplorationParams& params, Rng& rng) {
  if (q_values.size() != env::kNumActions) {
    throw std::invalid_argument("select_action: expected one value per action");
  }
  ActionChoice choice;
  choice.search_space = params.search_space && t_nv >= params.t_nv_threshold;
  const double p_random =
      choice.search_space ? params.p_ss : exploration_probability(k, params);
  choice.random = std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p_random;
  const std::size_t index =
      choice.random ? static_cast<std::size_t>(uniform_int(rng, 0, env::kNumActions - 1))
                    : qnet::argmax(q_values);
  choice.action = env::action_from_index(index);
  return choice;
}

void check_schema(const qnet::Checkpoint& checkpoint, const qnet::ObservationSpec& expected) {
  const int have = checkpoint.online.input_dim();
  const int want = expected.dim();
  if (!(checkpoint.observation == expected) || have != want) {
    throw SchemaError("checkpoint expects a " + std::string(to_string(checkpoint.observation.mode)) +
                      " observation of dimension " + std::to_string(have) +
                      ", configuration produces " + std::string(to_string(expected.mode)) +
                      " of dimension " + std::to_string(want));
  }
  if (checkpoint.online.architecture().outputs != static_cast<int>(env::kNumActions)) {
    throw SchemaError("checkpoint network has " +
                      std::to_string(checkpoint.online.architecture().outputs) +
                      " outputs, expected " + std::to_string(env::kNumActions));
  }
}

Trainer::Trainer(env::EnvConfig env_config, reward::RewardParams reward_params,
                 ExplorationParams exploration, TrainConfig config)
    : env_config_(std::move(env_config)),
      reward_params_(reward_params),
      exploration_(exploration),
      config_(std::move(config)),
      buffer_(static_cast<std::size_t>(config_.replay_capacity), config_.observation.dim()),
      rng_(make_rng(config_.seed, kAgentStream)),
      lr_start_(config_.lr_initial) {
  env_config_.validate();
  reward_params_.validate();
  exploration_.validate();
  config_.validate();
  Rng init = make_rng(config_.seed, kInitStream);
  online_ = qnet::QNetwork::random(
      config_.observation.architecture(config_.hidden, config_.conv_channels), init);
  target_.net = online_;
  target_.period = config_.target_sync;
}

Trainer::Trainer(const qnet::Checkpoint& checkpoint, env::EnvConfig env_config,
                 reward::RewardParams reward_params, ExplorationParams exploration,
                 TrainConfig config, bool reset_k)
    : env_config_(std::move(env_config)),
      reward_params_(reward_params),
      exploration_(exploration),
      config_(std::move(config)),
      online_(checkpoint.online),
      buffer_(static_cast<std::size_t>(config_.replay_capacity), checkpoint.online.input_dim()),
      k_(reset_k ? 0 : checkpoint.episode),
      lr_start_(checkpoint.learning_rate),
      gradient_steps_(checkpoint.gradient_steps) {
  check_schema(checkpoint, config_.observation);
  env_config_.validate();
  reward_params_.validate();
  exploration_.validate();
  config_.hidden = checkpoint.online.architecture().hidden;
  config_.conv_channels = checkpoint.online.architecture().conv_channels;
  config_.validate();
  target_.net = checkpoint.target;
  target_.period = config_.target_sync;
  if (checkpoint.rng_state.empty()) {
    rng_ = make_rng(config_.seed, kAgentStream);
  } else {
    restore_rng(rng_, checkpoint.rng_state);
  }
}

double Trainer::current_learning_rate() const {
  return learning_rate(episodes_run_, lr_start_, config_);
}

void Trainer::learn() {
  const auto batch = buffer_.sample(static_cast<std::size_t>(config_.batch_size), rng_);
  qnet::gradient_into(online_, batch.states, batch.actions,
                      qnet::batch_targets(target_.net, batch, config_.gamma), grad_);
  qnet::sgd_step(online_, grad_, current_learning_rate(), config_.max_grad_norm);
  ++gradient_steps_;
  target_.maybe_sync(online_, gradient_steps_);
}

EpisodeMetrics Trainer::train_episode() {
  env::Environment environment(env_config_, reward_params_);
  environment.reset(derive_seed(config_.seed, static_cast<std::uint64_t>(episodes_run_)));

  const double epsilon = exploration_probability(k_, exploration_);
  const double lr = current_learning_rate();
  const auto warm = static_cast<std::size_t>(std::max(config_.warmup, config_.batch_size));

  EpisodeAccumulator acc;
  qnet::Vector obs = qnet::observe(environment.state(), env_config_, config_.observation);
  bool done = false;
  while (!done) {
    const qnet::Vector q = online_.forward(obs);
    const auto choice = select_action({q.data(), static_cast<std::size_t>(q.size())}, k_,
                                      environment.state().t_nv, exploration_, rng_);
    const auto& out = environment.step(choice.action);
    qnet::Vector next_obs = qnet::observe(out.next, env_config_, config_.observation);
    const bool terminal = out.info.collided && env_config_.terminate_on_collision;
    buffer_.push({obs, static_cast<int>(choice.action), out.reward * config_.reward_scale,
                  next_obs, terminal});
    acc.add(out);
    done = out.done;
    obs = std::move(next_obs);
    if (buffer_.size() >= warm) learn();
  }

  EpisodeMetrics metrics = acc.finish(episodes_run_);
  metrics.epsilon = epsilon;
  metrics.lr = lr;
  ++k_;
  ++episodes_run_;
  return metrics;
}

qnet::Checkpoint Trainer::checkpoint() const {
  qnet::Checkpoint ckpt;
  ckpt.observation = config_.observation;
  ckpt.online = online_;
  ckpt.target = target_.net;
  ckpt.target_period = target_.period;
  ckpt.learning_rate = current_learning_rate();
  ckpt.episode = k_;
  ckpt.gradient_steps = gradient_steps_;
  ckpt.rng_state = rng_state(rng_);
  return ckpt;
}

TrainResult train(const env::EnvConfig& env_config, const TrainConfig& config,
                  const ExplorationParams& exploration, const reward::RewardParams& reward_params,
                  const CheckpointSink& sink) {
  Trainer trainer(env_config, reward_params, exploration, config);
  TrainResult result;
  result.log.reserve(static_cast<std::size_t>(config.episodes));
  for (int e = 0; e < config.episodes; ++e) {
    result.log.push_back(trainer.train_episode());
    if (sink && config.checkpoint_every > 0 && (e + 1) % config.checkpoint_every == 0) {
      sink(trainer.checkpoint(), e + 1);
    }
  }
  result.checkpoint = trainer.checkpoint();
  return result;
}

Policy greedy_policy(qnet::QNetwork net, env::EnvConfig config, qnet::ObservationSpec spec) {
  auto shared = std::make_shared<const qnet::QNetwork>(std::move(net));
  auto cfg = std::make_shared<const env::EnvConfig>(std::move(config));
  return [shared, cfg, spec](const env::WorldState& state, Rng&) {
    const qnet::Vector q = shared->forward(qnet::observe(state, *cfg, spec));
    return env::action_from_index(qnet::argmax({q.data(), static_cast<std::size_t>(q.size())}));
  };
}

Policy random_policy() {
  return [](const env::WorldState&, Rng& rng) {
    return env::action_from_index(
        static_cast<std::size_t>(uniform_int(rng, 0, env::kNumActions - 1)));
  };
}

EvalResult evaluate_policy(const Policy& policy, const env::EnvConfig& env_config,
                           const reward::RewardParams& reward_params, const EvalOptions& options) {
  if (options.episodes < 1) throw std::invalid_argument("evaluate: need at least one episode");
  const auto n = static_cast<std::size_t>(options.episodes);
  std::vector<EpisodeMetrics> metrics(n);
  std::vector<double> distance_sums(n);
  std::vector<double> distance_3d_sums(n);
  std::vector<std::vector<TrajectoryRecord>> trajectories(options.record_trajectories ? n : 0);

  auto run_episode = [&](std::size_t i) {
    env::Environment environment(env_config, reward_params);
    const auto seed = derive_seed(options.seed, i);
    environment.reset(seed);
    Rng rng = make_rng(seed, kPolicyStream);
    EpisodeAccumulator acc;
    bool done = false;
    while (!done) {
      const auto action = policy(environment.state(), rng);
      const auto& out = environment.step(action);
      acc.add(out);
      done = out.done;
      if (options.record_trajectories) {
        TrajectoryRecord r;
        r.t = out.next.t;
        r.uav = out.next.uav.position;
        r.target = out.next.target.position;
        r.action = action;
        r.reward = out.reward;
        r.branch = out.branch;
        r.visible = out.info.visible;
        r.occluded_by = out.info.occluded_by;
        r.done = out.done;
        trajectories[i].push_back(r);
      }
    }
    metrics[i] = acc.finish(static_cast<int>(i));
    distance_sums[i] = acc.distance;
    distance_3d_sums[i] = acc.distance_3d;
  };

  const auto threads =
      static_cast<std::size_t>(std::clamp(options.threads, 1, static_cast<int>(n)));
  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i) run_episode(i);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < threads; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t i = w; i < n; i += threads) run_episode(i);
      });
    }
    for (auto& t : pool) t.join();
  }

  EvalResult result;
  double total_distance = 0.0;
  double total_distance_3d = 0.0;
  double total_visible = 0.0;
  double total_reward = 0.0;
  long total_steps = 0;
  for (std::size_t i = 0; i < n; ++i) {
    total_distance += distance_sums[i];
    total_distance_3d += distance_3d_sums[i];
    total_steps += metrics[i].steps;
    total_visible += metrics[i].visible_steps;
    total_reward += metrics[i].mean_step_reward;
  }
  result.avg_distance = total_distance / static_cast<double>(total_steps);
  result.avg_distance_3d = total_distance_3d / static_cast<double>(total_steps);
  result.avg_time = total_visible / static_cast<double>(n);
  result.avg_reward = total_reward / static_cast<double>(n);
  result.episodes = std::move(metrics);
  result.trajectories = std::move(trajectories);
  return result;
}

EvalResult evaluate(const qnet::Checkpoint& checkpoint, const env::EnvConfig& env_config,
                    const reward::RewardParams& reward_params, const EvalOptions& options) {
  check_schema(checkpoint, checkpoint.observation);
  return evaluate_policy(greedy_policy(checkpoint.online, env_config, checkpoint.observation),
                         env_config, reward_params, options);
}

CurriculumResult curriculum_finetune(const qnet::Checkpoint& checkpoint,
                                     const env::EnvConfig& new_env_config,
                                     const reward::RewardParams& reward_params,
                                     const ExplorationParams& exploration,
                                     const FinetuneConfig& finetune, const EvalOptions& eval) {
  check_schema(checkpoint, finetune.train.observation);
  CurriculumResult result;
  result.before = evaluate(checkpoint, new_env_config, reward_params, eval);
  Trainer trainer(checkpoint, new_env_config, reward_params, exploration, finetune.train,
                  finetune.reset_k);
  result.log.reserve(static_cast<std::size_t>(finetune.train.episodes));
  for (int e = 0; e < finetune.train.episodes; ++e) result.log.push_back(trainer.train_episode());
  result.checkpoint = trainer.checkpoint();
  result.after = evaluate(result.checkpoint, new_env_config, reward_params, eval);
  return result;
}

void write_metrics_csv(std::ostream& out, const std::vector<EpisodeMetrics>& rows) {
  out << kMetricsHeader << '\n';
  char line[512];
  for (const auto& m : rows) {
    std::snprintf(line, sizeof line, "%d,%d,%d,%.9g,%.9g,%.9g,%.9g,%d,%.9g,%.9g\n", m.episode,
                  m.steps, m.visible_steps, m.mean_distance, m.mean_distance_3d,
                  m.mean_step_reward, m.cumulative_reward, m.collided ? 1 : 0, m.epsilon, m.lr);
    out << line;
  }
}

}  // namespace uavtrack::agent
