#include "uavtrack/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

namespace uavtrack {

namespace {

const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> keys{
      {"environment",
       {"side", "block_size", "n_obstacles", "obstacle_seed", "obstacles", "h_min", "h_max", "n_h",
        "h_c", "theta_fov_deg", "t_max", "uav_speed", "target_speed", "target_speed_min",
        "target_speed_max", "terminate_on_collision", "occlusion_model", "uav_start"}},
      {"reward", {"R_c", "R_i", "R_v_c", "h_v_c", "R_nv", "beta", "dist_epsilon", "penalty_mode"}},
      {"exploration", {"p_sat", "alpha", "p_ss", "t_nv_threshold", "search_space"}},
      {"train",
       {"episodes", "seed", "lr_initial", "lr_final", "lr_decay", "lr_half_life", "gamma",
        "batch_size", "replay_capacity", "target_sync", "warmup", "reward_scale", "max_grad_norm",
        "hidden", "conv_channels", "observation", "t_cap", "grid_size", "checkpoint_every"}},
      {"evaluation", {"episodes", "seed", "threads"}},
  };
  return keys;
}

std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

class Reader {
 public:
  Reader(const YAML::Node& root, std::string section)
      : node_(root[section]), section_(std::move(section)) {}

  bool has(const std::string& key) const { return node_ && node_[key]; }

  template <typename T>
  T get(const std::string& key, T fallback) const {
    if (!has(key)) return fallback;
    try {
      return node_[key].as<T>();
    } catch (const YAML::Exception&) {
      throw ConfigError(name(key) + ": cannot parse value '" + scalar(key) + "'");
    }
  }

  YAML::Node raw(const std::string& key) const { return node_[key]; }
  std::string name(const std::string& key) const { return section_ + "." + key; }

 private:
  std::string scalar(const std::string& key) const {
    const auto n = node_[key];
    return n.IsScalar() ? n.Scalar() : std::string("<non-scalar>");
  }

  YAML::Node node_;
  std::string section_;
};

void check_range(const std::string& name, double value, double lo, double hi,
                 const std::string& allowed) {
  if (!(value >= lo && value <= hi)) {
    throw ConfigError(name + " = " + format_number(value) + " is out of range; allowed " + allowed);
  }
}

void check_range(const std::string& name, double value, double lo, double hi) {
  check_range(name, value, lo, hi, format_number(lo) + "-" + format_number(hi));
}

void check_all_keys(const YAML::Node& root) {
  if (!root || root.IsNull()) return;
  if (!root.IsMap()) throw ConfigError("configuration must be a mapping of sections");
  for (const auto& section : root) {
    const auto name = section.first.as<std::string>();
    const auto it = known_keys().find(name);
    if (it == known_keys().end()) throw ConfigError("unknown section '" + name + "'");
    if (section.second.IsNull()) continue;
    if (!section.second.IsMap()) throw ConfigError("section '" + name + "' must be a mapping");
    for (const auto& entry : section.second) {
      const auto key = entry.first.as<std::string>();
      if (!it->second.count(key)) throw ConfigError("unknown key '" + name + "." + key + "'");
    }
  }
}

void apply_overrides(YAML::Node& root, const std::vector<std::string>& overrides) {
  for (const auto& item : overrides) {
    const auto eq = item.find('=');
    const auto dot = item.find('.');
    if (eq == std::string::npos || dot == std::string::npos || dot > eq) {
      throw ConfigError("override '" + item + "' must look like section.key=value");
    }
    const auto section = item.substr(0, dot);
    const auto key = item.substr(dot + 1, eq - dot - 1);
    try {
      root[section][key] = YAML::Load(item.substr(eq + 1));
    } catch (const YAML::Exception& e) {
      throw ConfigError("override '" + item + "': " + e.what());
    }
  }
}

void read_environment(const YAML::Node& root, RunConfig& cfg) {
  const Reader r(root, "environment");
  auto& e = cfg.env;
  e.side = r.get("side", e.side);
  check_range(r.name("side"), e.side, 100.0, 200.0);
  e.block_size = r.get("block_size", e.block_size);
  check_range(r.name("block_size"), e.block_size, 1.0, e.side);
  const double blocks = e.side / e.block_size;
  if (std::abs(blocks - std::round(blocks)) > 1e-9) {
    throw ConfigError(r.name("block_size") + " = " + format_number(e.block_size) +
                      " must divide side " + format_number(e.side));
  }

  e.h_min = r.get("h_min", e.h_min);
  check_range(r.name("h_min"), e.h_min, 1.0, 10.0);
  e.h_max = r.get("h_max", e.h_max);
  check_range(r.name("h_max"), e.h_max, 10.0, 60.0);
  if (!(e.h_min < e.h_max)) throw ConfigError("environment: h_min must be below h_max");
  e.n_h = r.get("n_h", e.n_h);
  check_range(r.name("n_h"), e.n_h, 5, 20);
  const double h_c = e.height_step();
  if (r.has("h_c")) {
    const double given = r.get("h_c", h_c);
    if (std::abs(given - h_c) > 1e-9 * std::max(1.0, h_c)) {
      throw ConfigError(r.name("h_c") + " = " + format_number(given) +
                        " disagrees with (h_max - h_min) / n_h = " + format_number(h_c));
    }
  }
  check_range(r.name("h_c") + " (derived)", h_c, 1.0, 10.0);

  e.theta_fov_deg = r.get("theta_fov_deg", e.theta_fov_deg);
  check_range(r.name("theta_fov_deg"), e.theta_fov_deg, 30.0, 45.0, "30-45 degrees");
  e.t_max = r.get("t_max", e.t_max);
  check_range(r.name("t_max"), e.t_max, 1, 500);

  e.uav_speed = r.get("uav_speed", e.uav_speed);
  check_range(r.name("uav_speed"), e.uav_speed, 1e-9, e.side);
  if (r.has("target_speed")) {
    e.target_speed_min = e.target_speed_max = r.get("target_speed", 1.0);
  }
  e.target_speed_min = r.get("target_speed_min", e.target_speed_min);
  e.target_speed_max = r.get("target_speed_max", e.target_speed_max);
  check_range(r.name("target_speed_min"), e.target_speed_min, 0.0, e.target_speed_max,
              "0 to target_speed_max");
  check_range(r.name("target_speed_max"), e.target_speed_max, e.target_speed_min, e.uav_speed,
              "target_speed_min to uav_speed " + format_number(e.uav_speed));

  e.terminate_on_collision = r.get("terminate_on_collision", e.terminate_on_collision);
  const auto occlusion = r.get<std::string>("occlusion_model", "exact");
  if (occlusion == "exact") {
    e.occlusion_model = geometry::OcclusionModel::exact;
  } else if (occlusion == "paper_form") {
    e.occlusion_model = geometry::OcclusionModel::paper_form;
  } else {
    throw ConfigError(r.name("occlusion_model") + ": expected exact or paper_form");
  }
  const auto start = r.get<std::string>("uav_start", "random");
  if (start == "random") {
    e.uav_start = env::StartMode::random_lattice;
  } else if (start == "above_target") {
    e.uav_start = env::StartMode::above_target;
  } else {
    throw ConfigError(r.name("uav_start") + ": expected random or above_target");
  }

  cfg.obstacle_seed = r.get<std::uint64_t>("obstacle_seed", cfg.obstacle_seed);
  if (r.has("obstacles")) {
    const auto list = r.raw("obstacles");
    if (!list.IsSequence()) throw ConfigError(r.name("obstacles") + " must be a list");
    e.obstacles.clear();
    for (std::size_t i = 0; i < list.size(); ++i) {
      const auto item = list[i];
      const std::string where = r.name("obstacles") + "[" + std::to_string(i) + "]";
      if (!item.IsMap()) throw ConfigError(where + " must be a mapping {x, y, r, h}");
      for (const auto& kv : item) {
        const auto k = kv.first.as<std::string>();
        if (k != "x" && k != "y" && k != "r" && k != "h") {
          throw ConfigError("unknown key '" + where + "." + k + "'");
        }
      }
      geometry::Cylinder c;
      try {
        c.center = {item["x"].as<double>(), item["y"].as<double>()};
        c.radius = item["r"].as<double>();
        c.height = item["h"].as<double>();
      } catch (const YAML::Exception&) {
        throw ConfigError(where + " needs numeric x, y, r and h");
      }
      check_range(where + ".r", c.radius, 2.5, 10.0);
      check_range(where + ".h", c.height, 1.0, 50.0);
      e.obstacles.push_back(c);
    }
    cfg.n_obstacles = static_cast<int>(e.obstacles.size());
    if (r.has("n_obstacles") && r.get("n_obstacles", 0) != cfg.n_obstacles) {
      throw ConfigError(r.name("n_obstacles") + " does not match the length of obstacles");
    }
    check_range(r.name("n_obstacles"), cfg.n_obstacles, 0, 7, "0-7 (2-7 for experiments)");
  } else {
    cfg.n_obstacles = r.get("n_obstacles", cfg.n_obstacles);
    check_range(r.name("n_obstacles"), cfg.n_obstacles, 0, 7, "0-7 (2-7 for experiments)");
    try {
      e = env::generate_environment(cfg.n_obstacles, cfg.obstacle_seed, e);
    } catch (const std::exception& ex) {
      throw ConfigError(std::string("environment: ") + ex.what());
    }
  }
  try {
    e.validate();
  } catch (const std::invalid_argument& ex) {
    throw ConfigError(ex.what());
  }
}

void read_reward(const YAML::Node& root, RunConfig& cfg) {
  const Reader r(root, "reward");
  auto& p = cfg.reward;
  p.collision = r.get("R_c", p.collision);
  check_range(r.name("R_c"), p.collision, -2000.0, -1000.0, "-2000 to -1000 (|R_c| 1000-2000)");
  p.intersection = r.get("R_i", p.intersection);
  check_range(r.name("R_i"), p.intersection, -100.0, -30.0, "-100 to -30 (|R_i| 30-100)");
  p.distance_gain = r.get("R_v_c", p.distance_gain);
  check_range(r.name("R_v_c"), p.distance_gain, 3000.0, 4500.0);
  p.height_gain = r.get("h_v_c", p.height_gain);
  check_range(r.name("h_v_c"), p.height_gain, 1500.0, 5000.0);
  p.not_visible = r.get("R_nv", p.not_visible);
  check_range(r.name("R_nv"), p.not_visible, -50.0, -1.0, "-50 to -1 (|R_nv| 1-50)");
  p.beta = r.get("beta", p.beta);
  check_range(r.name("beta"), p.beta, 1.0, 10.0);
  p.dist_epsilon = r.get("dist_epsilon", p.dist_epsilon);
  check_range(r.name("dist_epsilon"), p.dist_epsilon, 1e-9, 10.0, "(0, 10]");
  const auto mode = r.get<std::string>("penalty_mode", "decaying");
  if (mode == "decaying") {
    p.penalty_mode = reward::PenaltyMode::decaying;
  } else if (mode == "growing") {
    p.penalty_mode = reward::PenaltyMode::growing;
  } else {
    throw ConfigError(r.name("penalty_mode") + ": expected decaying or growing");
  }
}

void read_exploration(const YAML::Node& root, RunConfig& cfg) {
  const Reader r(root, "exploration");
  auto& x = cfg.exploration;
  x.p_sat = r.get("p_sat", x.p_sat);
  check_range(r.name("p_sat"), x.p_sat, 0.1, 0.4);
  x.alpha = r.get("alpha", x.alpha);
  check_range(r.name("alpha"), x.alpha, 0.1, 5.0);
  x.p_ss = r.get("p_ss", x.p_ss);
  check_range(r.name("p_ss"), x.p_ss, 0.9, 0.95);
  x.t_nv_threshold = r.get("t_nv_threshold", x.t_nv_threshold);
  check_range(r.name("t_nv_threshold"), x.t_nv_threshold, 3, 10);
  x.search_space = r.get("search_space", x.search_space);
}

void read_train(const YAML::Node& root, RunConfig& cfg) {
  const Reader r(root, "train");
  auto& t = cfg.train;
  t.episodes = r.get("episodes", t.episodes);
  check_range(r.name("episodes"), t.episodes, 0, 1e9);
  t.seed = r.get<std::uint64_t>("seed", t.seed);
  t.lr_initial = r.get("lr_initial", t.lr_initial);
  check_range(r.name("lr_initial"), t.lr_initial, 0.0, 1.0);
  t.lr_final = r.get("lr_final", t.lr_final);
  check_range(r.name("lr_final"), t.lr_final, 0.0, t.lr_initial, "0 to lr_initial");
  if (r.has("lr_decay") && r.has("lr_half_life")) {
    throw ConfigError("train: give either lr_decay or lr_half_life, not both");
  }
  if (r.has("lr_half_life")) {
    const double half_life = r.get("lr_half_life", 500.0);
    check_range(r.name("lr_half_life"), half_life, 1.0, 1e9);
    t.lr_decay = std::pow(0.5, 1.0 / half_life);
  }
  t.lr_decay = r.get("lr_decay", t.lr_decay);
  check_range(r.name("lr_decay"), t.lr_decay, 1e-12, 1.0, "(0, 1]");
  t.gamma = r.get("gamma", t.gamma);
  check_range(r.name("gamma"), t.gamma, 0.0, 1.0);
  t.batch_size = r.get("batch_size", t.batch_size);
  check_range(r.name("batch_size"), t.batch_size, 1, 4096);
  t.replay_capacity = r.get("replay_capacity", t.replay_capacity);
  check_range(r.name("replay_capacity"), t.replay_capacity, t.batch_size, 1e8,
              "batch_size and above");
  t.target_sync = r.get("target_sync", t.target_sync);
  check_range(r.name("target_sync"), t.target_sync, 1, 1e9);
  t.warmup = r.get("warmup", t.warmup);
  check_range(r.name("warmup"), t.warmup, 0, 1e9);
  t.reward_scale = r.get("reward_scale", t.reward_scale);
  check_range(r.name("reward_scale"), t.reward_scale, 1e-12, 1.0, "(0, 1]");
  t.max_grad_norm = r.get("max_grad_norm", t.max_grad_norm);
  check_range(r.name("max_grad_norm"), t.max_grad_norm, 0.0, 1e12);
  t.hidden = r.get("hidden", t.hidden);
  t.conv_channels = r.get("conv_channels", t.conv_channels);
  t.observation.mode =
      qnet::observation_mode_from_string(r.get<std::string>("observation", "features"));
  t.observation.t_cap = r.get("t_cap", t.observation.t_cap);
  check_range(r.name("t_cap"), t.observation.t_cap, 1, 500);
  t.observation.grid_size = r.get("grid_size", t.observation.grid_size);
  check_range(r.name("grid_size"), t.observation.grid_size, 3, 63);
  t.checkpoint_every = r.get("checkpoint_every", t.checkpoint_every);
  check_range(r.name("checkpoint_every"), t.checkpoint_every, 0, 1e9);
  try {
    t.validate();
  } catch (const std::invalid_argument& ex) {
    throw ConfigError(ex.what());
  }
}

void read_evaluation(const YAML::Node& root, RunConfig& cfg) {
  const Reader r(root, "evaluation");
  auto& v = cfg.evaluation;
  v.episodes = r.get("episodes", v.episodes);
  check_range(r.name("episodes"), v.episodes, 1, 1e9);
  v.seed = r.get<std::uint64_t>("seed", v.seed);
  v.threads = r.get("threads", v.threads);
  check_range(r.name("threads"), v.threads, 1, 256);
}

std::string join(const std::vector<int>& values) {
  std::string out = "[";
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ", ";
    out += std::to_string(values[i]);
  }
  return out + "]";
}

}  // namespace

RunConfig parse_config(const std::string& text, const std::vector<std::string>& overrides) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("malformed configuration: ") + e.what());
  }
  if (!root || root.IsNull()) root = YAML::Node(YAML::NodeType::Map);
  apply_overrides(root, overrides);
  check_all_keys(root);

  RunConfig cfg;
  try {
    read_environment(root, cfg);
    read_reward(root, cfg);
    read_exploration(root, cfg);
    read_train(root, cfg);
    read_evaluation(root, cfg);
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("configuration: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read configuration " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str(), overrides);
}

std::string to_yaml(const RunConfig& c) {
  std::ostringstream y;
  auto num = [](double v) { return format_number(v); };
  const auto& e = c.env;
  y << "environment:\n"
    << "  side: " << num(e.side) << "\n"
    << "  block_size: " << num(e.block_size) << "\n"
    << "  n_obstacles: " << c.n_obstacles << "\n"
    << "  obstacle_seed: " << c.obstacle_seed << "\n"
    << "  obstacles:" << (e.obstacles.empty() ? " []" : "") << "\n";
  for (const auto& o : e.obstacles) {
    y << "    - {x: " << num(o.center.x) << ", y: " << num(o.center.y) << ", r: " << num(o.radius)
      << ", h: " << num(o.height) << "}\n";
  }
  y << "  h_min: " << num(e.h_min) << "\n"
    << "  h_max: " << num(e.h_max) << "\n"
    << "  n_h: " << e.n_h << "\n"
    << "  theta_fov_deg: " << num(e.theta_fov_deg) << "\n"
    << "  t_max: " << e.t_max << "\n"
    << "  uav_speed: " << num(e.uav_speed) << "\n"
    << "  target_speed_min: " << num(e.target_speed_min) << "\n"
    << "  target_speed_max: " << num(e.target_speed_max) << "\n"
    << "  terminate_on_collision: " << (e.terminate_on_collision ? "true" : "false") << "\n"
    << "  occlusion_model: "
    << (e.occlusion_model == geometry::OcclusionModel::exact ? "exact" : "paper_form") << "\n"
    << "  uav_start: " << (e.uav_start == env::StartMode::random_lattice ? "random" : "above_target")
    << "\n";

  const auto& r = c.reward;
  y << "reward:\n"
    << "  R_c: " << num(r.collision) << "\n"
    << "  R_i: " << num(r.intersection) << "\n"
    << "  R_v_c: " << num(r.distance_gain) << "\n"
    << "  h_v_c: " << num(r.height_gain) << "\n"
    << "  R_nv: " << num(r.not_visible) << "\n"
    << "  beta: " << num(r.beta) << "\n"
    << "  dist_epsilon: " << num(r.dist_epsilon) << "\n"
    << "  penalty_mode: "
    << (r.penalty_mode == reward::PenaltyMode::decaying ? "decaying" : "growing") << "\n";

  const auto& x = c.exploration;
  y << "exploration:\n"
    << "  p_sat: " << num(x.p_sat) << "\n"
    << "  alpha: " << num(x.alpha) << "\n"
    << "  p_ss: " << num(x.p_ss) << "\n"
    << "  t_nv_threshold: " << x.t_nv_threshold << "\n"
    << "  search_space: " << (x.search_space ? "true" : "false") << "\n";

  const auto& t = c.train;
  y << "train:\n"
    << "  episodes: " << t.episodes << "\n"
    << "  seed: " << t.seed << "\n"
    << "  lr_initial: " << num(t.lr_initial) << "\n"
    << "  lr_final: " << num(t.lr_final) << "\n"
    << "  lr_decay: " << num(t.lr_decay) << "\n"
    << "  gamma: " << num(t.gamma) << "\n"
    << "  batch_size: " << t.batch_size << "\n"
    << "  replay_capacity: " << t.replay_capacity << "\n"
    << "  target_sync: " << t.target_sync << "\n"
    << "  warmup: " << t.warmup << "\n"
    << "  reward_scale: " << num(t.reward_scale) << "\n"
    << "  max_grad_norm: " << num(t.max_grad_norm) << "\n"
    << "  hidden: " << join(t.hidden) << "\n"
    << "  conv_channels: " << join(t.conv_channels) << "\n"
    << "  observation: " << qnet::to_string(t.observation.mode) << "\n"
    << "  t_cap: " << t.observation.t_cap << "\n"
    << "  grid_size: " << t.observation.grid_size << "\n"
    << "  checkpoint_every: " << t.checkpoint_every << "\n";

  y << "evaluation:\n"
    << "  episodes: " << c.evaluation.episodes << "\n"
    << "  seed: " << c.evaluation.seed << "\n"
    << "  threads: " << c.evaluation.threads << "\n";
  return y.str();
}

}  // namespace uavtrack
