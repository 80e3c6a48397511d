#include "uavtrack/replay.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace uavtrack::qnet {

ReplayBuffer::ReplayBuffer(std::size_t capacity, int obs_dim)
    : capacity_(capacity),
      obs_dim_(obs_dim),
      states_(obs_dim, static_cast<Eigen::Index>(capacity)),
      next_states_(obs_dim, static_cast<Eigen::Index>(capacity)),
      actions_(capacity),
      rewards_(capacity),
      dones_(capacity) {
  if (capacity == 0) throw std::invalid_argument("ReplayBuffer: capacity must be positive");
  if (obs_dim < 1) throw std::invalid_argument("ReplayBuffer: obs_dim must be positive");
}

void ReplayBuffer::push(const Experience& e) {
  if (e.state.size() != obs_dim_ || e.next_state.size() != obs_dim_) {
    throw std::invalid_argument("ReplayBuffer::push: observation dimension mismatch");
  }
  if (e.action < 0 || e.action >= kNumActions) {
    throw std::invalid_argument("ReplayBuffer::push: action out of range");
  }
  if (!std::isfinite(e.reward)) throw std::invalid_argument("ReplayBuffer::push: reward not finite");
  const auto col = static_cast<Eigen::Index>(head_);
  states_.col(col) = e.state;
  next_states_.col(col) = e.next_state;
  actions_[head_] = e.action;
  rewards_[head_] = e.reward;
  dones_[head_] = e.done ? 1 : 0;
  head_ = (head_ + 1) % capacity_;
  size_ = std::min(size_ + 1, capacity_);
}

std::size_t ReplayBuffer::slot(std::size_t i) const {
  if (i >= size_) throw std::out_of_range("ReplayBuffer: position out of range");
  return (head_ + capacity_ - size_ + i) % capacity_;
}

Experience ReplayBuffer::at(std::size_t i) const {
  const auto s = slot(i);
  const auto col = static_cast<Eigen::Index>(s);
  return {states_.col(col), actions_[s], rewards_[s], next_states_.col(col), dones_[s] != 0};
}

std::vector<std::size_t> ReplayBuffer::sample_indices(std::size_t batch_size, Rng& rng) const {
  if (batch_size == 0) throw std::invalid_argument("ReplayBuffer::sample: batch size is zero");
  if (batch_size > size_) {
    throw std::invalid_argument("ReplayBuffer::sample: need " + std::to_string(batch_size) +
                                " transitions, have " + std::to_string(size_));
  }
  // Floyd's algorithm: uniform subset without replacement.
  std::vector<std::size_t> picked;
  picked.reserve(batch_size);
  for (std::size_t j = size_ - batch_size; j < size_; ++j) {
    const std::size_t t = std::uniform_int_distribution<std::size_t>(0, j)(rng);
    const bool seen = std::find(picked.begin(), picked.end(), t) != picked.end();
    picked.push_back(seen ? j : t);
  }
  return picked;
}

Batch ReplayBuffer::sample(std::size_t batch_size, Rng& rng) const {
  return gather(sample_indices(batch_size, rng));
}

Batch ReplayBuffer::gather(const std::vector<std::size_t>& positions) const {
  const auto n = static_cast<Eigen::Index>(positions.size());
  Batch batch;
  batch.states.resize(obs_dim_, n);
  batch.next_states.resize(obs_dim_, n);
  batch.rewards.resize(n);
  batch.actions.resize(positions.size());
  batch.dones.resize(positions.size());
  for (std::size_t j = 0; j < positions.size(); ++j) {
    const auto s = slot(positions[j]);
    const auto col = static_cast<Eigen::Index>(s);
    const auto dst = static_cast<Eigen::Index>(j);
    batch.states.col(dst) = states_.col(col);
    batch.next_states.col(dst) = next_states_.col(col);
    batch.rewards(dst) = rewards_[s];
    batch.actions[j] = actions_[s];
    batch.dones[j] = dones_[s];
  }
  return batch;
}

}  // namespace uavtrack::qnet
