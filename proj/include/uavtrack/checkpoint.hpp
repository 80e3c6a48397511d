#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>

#include "uavtrack/observation.hpp"
#include "uavtrack/qnet.hpp"

namespace uavtrack::qnet {

inline constexpr int kCheckpointVersion = 1;
inline constexpr const char* kCheckpointFormat = "uavtrack-checkpoint";

/// Everything needed to resume or evaluate a learner. Parameters are stored
/// as shortest round-trip decimals, so save -> load is lossless.
struct Checkpoint {
  ObservationSpec observation;
  QNetwork online;
  QNetwork target;
  std::int64_t target_period = 500;
  double learning_rate = 0.01;
  std::int64_t episode = 0;         // exploration episode index reached
  std::int64_t gradient_steps = 0;
  std::string rng_state;

  friend bool operator==(const Checkpoint&, const Checkpoint&) = default;
};

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string to_json(const Checkpoint& ckpt);
Checkpoint checkpoint_from_json(const std::string& text);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace uavtrack::qnet
