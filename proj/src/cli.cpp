#include "uavtrack/cli.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "uavtrack/agent.hpp"
#include "uavtrack/checkpoint.hpp"
#include "uavtrack/config.hpp"
#include "uavtrack/svg.hpp"
#include "uavtrack/trajectory.hpp"

namespace uavtrack::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

fs::path out_root() {
  const char* root = std::getenv(kOutRootVar);
  return (root && *root) ? fs::path(root) : fs::path("runs");
}

fs::path resolve_out(const fs::path& given, const std::string& fallback) {
  return given.empty() ? out_root() / fallback : given;
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

std::string metrics_text(const std::vector<agent::EpisodeMetrics>& rows) {
  std::ostringstream s;
  agent::write_metrics_csv(s, rows);
  return s.str();
}

std::string format_metric(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

void print_metrics(std::ostream& out, const agent::EvalResult& r) {
  out << "avg_distance: " << format_metric(r.avg_distance) << '\n'
      << "avg_time: " << format_metric(r.avg_time) << '\n'
      << "avg_reward: " << format_metric(r.avg_reward) << '\n';
}

agent::EvalOptions eval_options(const RunConfig& cfg) {
  agent::EvalOptions o;
  o.episodes = cfg.evaluation.episodes;
  o.seed = cfg.evaluation.seed;
  o.threads = cfg.evaluation.threads;
  return o;
}

ordered_json manifest_base(const std::string& command, const RunConfig& cfg,
                           const fs::path& config_path, std::uint64_t seed,
                           const std::string& started) {
  ordered_json m;
  m["tool"] = "uavtrack";
  m["version"] = kVersion;
  m["command"] = command;
  m["config_file"] = config_path.string();
  m["seed"] = seed;
  m["config"] = to_yaml(cfg);
  m["started_at"] = started;
  return m;
}

void finish_manifest(ordered_json& m, const fs::path& dir) {
  m["finished_at"] = utc_now();
  write_text(dir / "manifest.json", m.dump(2) + "\n");
}

std::string checkpoint_name(int episodes) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "episode_%06d.json", episodes);
  return buf;
}

/// Maps exceptions onto exit codes with a one-line diagnostic.
template <typename F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
  } catch (const agent::SchemaError& e) {
    err << "schema mismatch: " << e.what() << '\n';
  } catch (const qnet::CheckpointError& e) {
    err << "checkpoint error: " << e.what() << '\n';
  } catch (const agent::TrajectoryParseError& e) {
    err << "malformed trajectory log: " << e.what() << '\n';
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}

RunConfig load(const fs::path& path, const std::vector<std::string>& overrides) {
  return load_config(path, overrides);
}

}  // namespace

int cmd_train(const TrainArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto started = utc_now();
    RunConfig cfg = load(args.config, args.overrides);
    if (args.seed) cfg.train.seed = *args.seed;
    if (args.episodes) {
      if (*args.episodes < 0) throw UsageError("--episodes must be non-negative");
      cfg.train.episodes = *args.episodes;
    }
    const fs::path dir =
        resolve_out(args.out_dir, "train-seed" + std::to_string(cfg.train.seed));
    fs::create_directories(dir / "checkpoints");

    ordered_json manifest = manifest_base("train", cfg, args.config, cfg.train.seed, started);
    ordered_json checkpoints = ordered_json::array();
    const auto sink = [&](const qnet::Checkpoint& ckpt, int episodes) {
      const auto rel = fs::path("checkpoints") / checkpoint_name(episodes);
      qnet::save_checkpoint(dir / rel, ckpt);
      checkpoints.push_back(rel.string());
    };
    const auto result = agent::train(cfg.env, cfg.train, cfg.exploration, cfg.reward, sink);

    write_text(dir / "metrics.csv", metrics_text(result.log));
    qnet::save_checkpoint(dir / "checkpoints" / "final.json", result.checkpoint);
    write_text(dir / "config.yaml", to_yaml(cfg));
    manifest["artifacts"] = {{"config", "config.yaml"},
                             {"metrics", "metrics.csv"},
                             {"final_checkpoint", "checkpoints/final.json"},
                             {"checkpoints", checkpoints}};
    finish_manifest(manifest, dir);
    out << "trained " << result.log.size() << " episodes; run directory " << dir.string() << '\n';
    return kExitOk;
  });
}

int cmd_eval(const EvalArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto started = utc_now();
    RunConfig cfg = load(args.config, args.overrides);
    if (args.seed) cfg.evaluation.seed = *args.seed;
    if (args.episodes) {
      if (*args.episodes < 1) throw UsageError("--episodes must be at least 1");
      cfg.evaluation.episodes = *args.episodes;
    }
    if (args.threads) {
      if (*args.threads < 1) throw UsageError("--threads must be at least 1");
      cfg.evaluation.threads = *args.threads;
    }
    auto options = eval_options(cfg);
    options.record_trajectories = !args.trajectories.empty();

    agent::EvalResult result;
    if (args.policy == "greedy") {
      const auto ckpt = qnet::load_checkpoint(args.checkpoint);
      agent::check_schema(ckpt, cfg.train.observation);
      result = agent::evaluate(ckpt, cfg.env, cfg.reward, options);
    } else if (args.policy == "random") {
      result = agent::evaluate_policy(agent::random_policy(), cfg.env, cfg.reward, options);
    } else {
      throw UsageError("--policy must be greedy or random");
    }
    print_metrics(out, result);

    if (options.record_trajectories) {
      const fs::path dir = args.trajectories;
      fs::create_directories(dir);
      ordered_json manifest = manifest_base("eval", cfg, args.config, cfg.evaluation.seed, started);
      ordered_json logs = ordered_json::array();
      for (std::size_t i = 0; i < result.trajectories.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "episode_%04zu.jsonl", i);
        std::ostringstream text;
        agent::write_trajectory(text, result.trajectories[i]);
        write_text(dir / name, text.str());
        logs.push_back(name);
      }
      write_text(dir / "episodes.csv", metrics_text(result.episodes));
      manifest["checkpoint"] = args.policy == "greedy" ? args.checkpoint.string() : "";
      manifest["policy"] = args.policy;
      manifest["summary"] = {{"avg_distance", result.avg_distance},
                             {"avg_time", result.avg_time},
                             {"avg_reward", result.avg_reward}};
      manifest["artifacts"] = {{"metrics", "episodes.csv"}, {"trajectories", logs}};
      finish_manifest(manifest, dir);
    }
    return kExitOk;
  });
}

int cmd_curriculum(const CurriculumArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto started = utc_now();
    RunConfig cfg = load(args.config, args.overrides);
    if (args.seed) cfg.train.seed = *args.seed;
    if (args.episodes) {
      if (*args.episodes < 0) throw UsageError("--episodes must be non-negative");
      cfg.train.episodes = *args.episodes;
    }
    const auto ckpt = qnet::load_checkpoint(args.checkpoint);
    const fs::path dir =
        resolve_out(args.out_dir, "curriculum-seed" + std::to_string(cfg.train.seed));
    fs::create_directories(dir / "checkpoints");

    agent::FinetuneConfig finetune{cfg.train, args.reset_k};
    const auto result = agent::curriculum_finetune(ckpt, cfg.env, cfg.reward, cfg.exploration,
                                                   finetune, eval_options(cfg));

    std::ostringstream table;
    table << kComparisonHeader << '\n';
    for (const auto& [stage, r] : {std::pair{"before", &result.before}, {"after", &result.after}}) {
      char line[160];
      std::snprintf(line, sizeof line, "%s,%.9g,%.9g,%.9g\n", stage, r->avg_distance, r->avg_time,
                    r->avg_reward);
      table << line;
    }
    write_text(dir / "comparison.csv", table.str());
    write_text(dir / "metrics.csv", metrics_text(result.log));
    qnet::save_checkpoint(dir / "checkpoints" / "final.json", result.checkpoint);
    write_text(dir / "config.yaml", to_yaml(cfg));

    ordered_json manifest = manifest_base("curriculum", cfg, args.config, cfg.train.seed, started);
    manifest["source_checkpoint"] = args.checkpoint.string();
    manifest["reset_k"] = args.reset_k;
    manifest["artifacts"] = {{"config", "config.yaml"},
                             {"metrics", "metrics.csv"},
                             {"comparison", "comparison.csv"},
                             {"final_checkpoint", "checkpoints/final.json"}};
    finish_manifest(manifest, dir);
    out << table.str();
    return kExitOk;
  });
}

int cmd_render(const RenderArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const RunConfig cfg = load(args.config, args.overrides);
    std::ifstream in(args.trajectory);
    if (!in) throw UsageError("cannot read trajectory log " + args.trajectory.string());
    const auto records = agent::read_trajectory(in);
    write_text(args.out_svg, render::top_down_svg(cfg.env, records));
    if (!args.altitude_svg.empty()) {
      write_text(args.altitude_svg, render::altitude_svg(cfg.env, records));
    }
    out << "rendered " << records.size() << " records to " << args.out_svg.string() << '\n';
    return kExitOk;
  });
}

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"UAV target tracking with deep Q-learning", "uavtrack"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  TrainArgs train;
  auto* t = app.add_subcommand("train", "Train a Q-network and write a run directory");
  t->add_option("config", train.config, "YAML configuration")->required();
  t->add_option("-o,--out", train.out_dir, "Run directory (default: $UAVTRACK_OUT_ROOT/...)");
  t->add_option("--seed", train.seed, "Training seed");
  t->add_option("--episodes", train.episodes, "Training episodes");
  t->add_option("--set", train.overrides, "Override a config entry, section.key=value");

  EvalArgs eval;
  auto* e = app.add_subcommand("eval", "Evaluate a checkpoint and print the three metrics");
  e->add_option("checkpoint", eval.checkpoint, "Checkpoint JSON")->required();
  e->add_option("config", eval.config, "YAML configuration")->required();
  e->add_option("--episodes", eval.episodes, "Evaluation episodes");
  e->add_option("--seed", eval.seed, "Evaluation seed");
  e->add_option("--threads", eval.threads, "Worker threads");
  e->add_option("--trajectories", eval.trajectories, "Directory for per-episode logs");
  e->add_option("--policy", eval.policy, "greedy or random")
      ->check(CLI::IsMember({"greedy", "random"}));
  e->add_option("--set", eval.overrides, "Override a config entry, section.key=value");

  CurriculumArgs curriculum;
  auto* c = app.add_subcommand("curriculum", "Fine-tune a checkpoint on a new environment");
  c->add_option("checkpoint", curriculum.checkpoint, "Checkpoint JSON")->required();
  c->add_option("config", curriculum.config, "YAML configuration of the new environment")
      ->required();
  c->add_option("-o,--out", curriculum.out_dir, "Run directory (default: $UAVTRACK_OUT_ROOT/...)");
  c->add_option("--episodes", curriculum.episodes, "Fine-tuning episodes");
  c->add_option("--seed", curriculum.seed, "Training seed");
  c->add_flag("!--keep-k", curriculum.reset_k, "Continue the exploration schedule");
  c->add_option("--set", curriculum.overrides, "Override a config entry, section.key=value");

  RenderArgs render_args;
  auto* r = app.add_subcommand("render", "Render a trajectory log as SVG");
  r->add_option("trajectory", render_args.trajectory, "Trajectory JSONL")->required();
  r->add_option("config", render_args.config, "YAML configuration")->required();
  r->add_option("out_svg", render_args.out_svg, "Top-down SVG output")->required();
  r->add_option("--altitude", render_args.altitude_svg, "Altitude-versus-time SVG output");
  r->add_option("--set", render_args.overrides, "Override a config entry, section.key=value");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& ex) {
    const int code = app.exit(ex, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }
  if (t->parsed()) return cmd_train(train, out, err);
  if (e->parsed()) return cmd_eval(eval, out, err);
  if (c->parsed()) return cmd_curriculum(curriculum, out, err);
  return cmd_render(render_args, out, err);
}

}  // namespace uavtrack::cli
