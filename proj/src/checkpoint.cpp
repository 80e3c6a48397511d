#include "uavtrack/checkpoint.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace uavtrack::qnet {

namespace {

using nlohmann::json;

json architecture_to_json(const Architecture& arch) {
  json j{{"input_dim", arch.input_dim},
         {"hidden", arch.hidden},
         {"outputs", arch.outputs},
         {"conv_channels", arch.conv_channels}};
  if (arch.grid) {
    j["grid"] = {{"channels", arch.grid->channels}, {"size", arch.grid->size}};
  } else {
    j["grid"] = nullptr;
  }
  return j;
}

Architecture architecture_from_json(const json& j) {
  Architecture arch;
  arch.input_dim = j.at("input_dim").get<int>();
  arch.hidden = j.at("hidden").get<std::vector<int>>();
  arch.outputs = j.at("outputs").get<int>();
  arch.conv_channels = j.at("conv_channels").get<std::vector<int>>();
  if (!j.at("grid").is_null()) {
    arch.grid = GridShape{j["grid"].at("channels").get<int>(), j["grid"].at("size").get<int>()};
  }
  arch.validate();
  return arch;
}

json parameters_to_json(const QNetwork& net) {
  json blocks = json::array();
  net.for_each_block([&blocks](std::span<const double> block) {
    blocks.push_back(std::vector<double>(block.begin(), block.end()));
  });
  return blocks;
}

QNetwork network_from_json(const Architecture& arch, const json& blocks) {
  QNetwork net(arch);
  std::size_t i = 0;
  if (!blocks.is_array()) throw CheckpointError("checkpoint: parameters must be an array");
  net.for_each_block([&](std::span<double> block) {
    if (i >= blocks.size()) throw CheckpointError("checkpoint: missing parameter block");
    const auto values = blocks[i++].get<std::vector<double>>();
    if (values.size() != block.size()) {
      throw CheckpointError("checkpoint: parameter block " + std::to_string(i - 1) + " has " +
                            std::to_string(values.size()) + " values, expected " +
                            std::to_string(block.size()));
    }
    std::copy(values.begin(), values.end(), block.begin());
  });
  if (i != blocks.size()) throw CheckpointError("checkpoint: extra parameter blocks");
  return net;
}

}  // namespace

std::string to_json(const Checkpoint& ckpt) {
  json j;
  j["format"] = kCheckpointFormat;
  j["version"] = kCheckpointVersion;
  j["observation"] = {{"mode", std::string(to_string(ckpt.observation.mode))},
                      {"dim", ckpt.observation.dim()},
                      {"t_cap", ckpt.observation.t_cap},
                      {"grid_size", ckpt.observation.grid_size}};
  j["architecture"] = architecture_to_json(ckpt.online.architecture());
  j["online"] = parameters_to_json(ckpt.online);
  j["target"] = parameters_to_json(ckpt.target);
  j["target_period"] = ckpt.target_period;
  j["optimizer"] = {{"kind", "sgd"}, {"learning_rate", ckpt.learning_rate}};
  j["episode"] = ckpt.episode;
  j["gradient_steps"] = ckpt.gradient_steps;
  j["rng_state"] = ckpt.rng_state;
  return j.dump(1);
}

Checkpoint checkpoint_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw CheckpointError(std::string("checkpoint: malformed document: ") + e.what());
  }
  try {
    if (j.value("format", std::string()) != kCheckpointFormat) {
      throw CheckpointError("checkpoint: not a uavtrack checkpoint");
    }
    const int version = j.at("version").get<int>();
    if (version != kCheckpointVersion) {
      throw CheckpointError("checkpoint: unsupported version " + std::to_string(version));
    }
    Checkpoint ckpt;
    const auto& obs = j.at("observation");
    ckpt.observation.mode = observation_mode_from_string(obs.at("mode").get<std::string>());
    ckpt.observation.t_cap = obs.at("t_cap").get<int>();
    ckpt.observation.grid_size = obs.at("grid_size").get<int>();
    const Architecture arch = architecture_from_json(j.at("architecture"));
    if (arch.input_dim != ckpt.observation.dim()) {
      throw CheckpointError("checkpoint: architecture input does not match observation layout");
    }
    ckpt.online = network_from_json(arch, j.at("online"));
    ckpt.target = network_from_json(arch, j.at("target"));
    ckpt.target_period = j.at("target_period").get<std::int64_t>();
    ckpt.learning_rate = j.at("optimizer").at("learning_rate").get<double>();
    ckpt.episode = j.at("episode").get<std::int64_t>();
    ckpt.gradient_steps = j.at("gradient_steps").get<std::int64_t>();
    ckpt.rng_state = j.at("rng_state").get<std::string>();
    return ckpt;
  } catch (const json::exception& e) {
    throw CheckpointError(std::string("checkpoint: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw CheckpointError(std::string("checkpoint: ") + e.what());
  }
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CheckpointError("cannot write checkpoint " + path.string());
  out << to_json(ckpt) << '\n';
  if (!out) throw CheckpointError("failed writing checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open checkpoint " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return checkpoint_from_json(text.str());
}

}  // namespace uavtrack::qnet
