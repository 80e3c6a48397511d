#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "uavtrack/rng.hpp"

namespace uavtrack::qnet {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline constexpr int kNumActions = 6;

/// Square multi-channel input laid out channel-major, row-major within a channel.
struct GridShape {
  int channels = 0;
  int size = 0;

  int cells() const { return size * size; }
  friend bool operator==(const GridShape&, const GridShape&) = default;
};

/// Layer sizes. With a grid the input passes through 3x3 same-padding
/// convolutions (instance-normalised between them) before the dense head.
struct Architecture {
  int input_dim = 7;
  std::optional<GridShape> grid;
  std::vector<int> conv_channels;
  std::vector<int> hidden{128, 128};
  int outputs = kNumActions;

  void validate() const;
  friend bool operator==(const Architecture&, const Architecture&) = default;
};

struct DenseLayer {
  Matrix weights;  // out x in
  Vector bias;
};

struct ConvLayer {
  int in_channels = 0;
  int out_channels = 0;
  Matrix weights;  // out x (in * 9)
  Vector bias;
};

/// Feed-forward Q-function approximator. Rectified-linear hidden units,
/// identity output, one output per action. Also serves as its own gradient
/// container since gradients share the parameter shapes.
class QNetwork {
 public:
  QNetwork() = default;
  /// All parameters zero.
  explicit QNetwork(Architecture arch);
  /// He-uniform weights, zero biases.
  static QNetwork random(Architecture arch, Rng& rng);

  const Architecture& architecture() const { return arch_; }
  int input_dim() const { return arch_.input_dim; }

  Vector forward(const Vector& obs) const;
  /// Columns are samples.
  Matrix forward_batch(const Matrix& obs) const;

  std::size_t parameter_count() const;
  void for_each_block(const std::function<void(std::span<double>)>& fn);
  void for_each_block(const std::function<void(std::span<const double>)>& fn) const;
  std::vector<double> flatten() const;
  void assign(std::span<const double> flat);

  /// this += scale * other; shapes must match.
  void axpy(double scale, const QNetwork& other);
  void set_zero();
  double squared_norm() const;
  bool all_finite() const;

  std::vector<ConvLayer>& conv_layers() { return conv_; }
  const std::vector<ConvLayer>& conv_layers() const { return conv_; }
  std::vector<DenseLayer>& dense_layers() { return dense_; }
  const std::vector<DenseLayer>& dense_layers() const { return dense_; }

  friend bool operator==(const QNetwork& a, const QNetwork& b);

 private:
  Architecture arch_;
  std::vector<ConvLayer> conv_;
  std::vector<DenseLayer> dense_;
};

using Gradients = QNetwork;

/// Frozen copy of the online parameters, refreshed every `period` gradient steps.
struct TargetNetwork {
  QNetwork net;
  std::int64_t period = 500;

  /// Syncs when gradient_steps is a positive multiple of period. Returns true on sync.
  bool maybe_sync(const QNetwork& online, std::int64_t gradient_steps);
};

/// Column-major minibatch: one column per transition.
struct Batch {
  Matrix states;
  std::vector<int> actions;
  Vector rewards;
  Matrix next_states;
  std::vector<std::uint8_t> dones;

  std::size_t size() const { return actions.size(); }
};

/// r when done, else r + gamma * max(q_next).
double td_target(double r, std::span<const double> q_next, double gamma, bool done);

/// TD targets for every transition, computed with the frozen parameters.
Vector batch_targets(const QNetwork& target_net, const Batch& batch, double gamma);

/// Mean over the batch of 0.5 * (y - Q(s, a))^2.
double batch_loss(const QNetwork& net, const QNetwork& target_net, const Batch& batch,
                  double gamma);

/// Analytic gradient of batch_loss with respect to the online parameters only.
/// Writes the loss to *loss when provided.
Gradients gradient(const QNetwork& net, const QNetwork& target_net, const Batch& batch,
                   double gamma, double* loss = nullptr);

/// Gradient of mean 0.5 * (y - Q(s, a))^2 for externally supplied targets.
Gradients gradient_for_targets(const QNetwork& net, const Matrix& states,
                               const std::vector<int>& actions, const Vector& targets,
                               double* loss = nullptr);

/// As gradient_for_targets, writing into a reusable gradient of matching shape.
/// Returns the loss.
double gradient_into(const QNetwork& net, const Matrix& states, const std::vector<int>& actions,
                     const Vector& targets, Gradients& out);

/// Plain descent: theta <- theta - lr * grad. With max_norm > 0 the gradient
/// is first rescaled so its global norm does not exceed max_norm.
void sgd_step(QNetwork& net, const Gradients& grad, double lr, double max_norm = 0.0);

void sync_target(const QNetwork& net, QNetwork& target_net);

std::size_t argmax(std::span<const double> values);

}  // namespace uavtrack::qnet
