#pragma once

#include <cstddef>
#include <vector>

#include "uavtrack/qnet.hpp"
#include "uavtrack/rng.hpp"

namespace uavtrack::qnet {

struct Experience {
  Vector state;
  int action = 0;
  double reward = 0.0;
  Vector next_state;
  bool done = false;
};

/// Bounded FIFO of transitions stored column-wise. When full, a push
/// overwrites the oldest entry.
class ReplayBuffer {
 public:
  ReplayBuffer(std::size_t capacity, int obs_dim);

  void push(const Experience& e);

  std::size_t size() const { return size_; }
  std::size_t capacity() const { return capacity_; }
  int obs_dim() const { return obs_dim_; }
  bool empty() const { return size_ == 0; }

  /// Index 0 is the oldest stored transition.
  Experience at(std::size_t i) const;

  /// batch_size distinct positions (0 = oldest), uniform without replacement.
  /// Throws std::invalid_argument when fewer than batch_size transitions are stored.
  std::vector<std::size_t> sample_indices(std::size_t batch_size, Rng& rng) const;
  Batch sample(std::size_t batch_size, Rng& rng) const;
  Batch gather(const std::vector<std::size_t>& positions) const;

 private:
  std::size_t slot(std::size_t i) const;

  std::size_t capacity_;
  int obs_dim_;
  std::size_t head_ = 0;  // next slot to write
  std::size_t size_ = 0;
  Matrix states_;
  Matrix next_states_;
  std::vector<int> actions_;
  std::vector<double> rewards_;
  std::vector<std::uint8_t> dones_;
};

}  // namespace uavtrack::qnet
