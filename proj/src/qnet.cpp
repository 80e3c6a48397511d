#include "uavtrack/qnet.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace uavtrack::qnet {

namespace {

constexpr double kNormEpsilon = 1e-5;
constexpr int kKernel = 3;
constexpr int kTaps = kKernel * kKernel;

using RowMajorMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

int dense_input_dim(const Architecture& arch) {
  if (arch.grid) return arch.conv_channels.back() * arch.grid->cells();
  return arch.input_dim;
}

// (channels * 9) x cells patch matrix for a 3x3 same-padding convolution.
Matrix im2col(const Matrix& x, int size) {
  const int channels = static_cast<int>(x.rows());
  Matrix cols = Matrix::Zero(channels * kTaps, size * size);
  for (int ch = 0; ch < channels; ++ch) {
    for (int kr = 0; kr < kKernel; ++kr) {
      for (int kc = 0; kc < kKernel; ++kc) {
        const int row = ch * kTaps + kr * kKernel + kc;
        for (int r = 0; r < size; ++r) {
          const int sr = r + kr - 1;
          if (sr < 0 || sr >= size) continue;
          for (int c = 0; c < size; ++c) {
            const int sc = c + kc - 1;
            if (sc < 0 || sc >= size) continue;
            cols(row, r * size + c) = x(ch, sr * size + sc);
          }
        }
      }
    }
  }
  return cols;
}

Matrix col2im(const Matrix& cols, int channels, int size) {
  Matrix x = Matrix::Zero(channels, size * size);
  for (int ch = 0; ch < channels; ++ch) {
    for (int kr = 0; kr < kKernel; ++kr) {
      for (int kc = 0; kc < kKernel; ++kc) {
        const int row = ch * kTaps + kr * kKernel + kc;
        for (int r = 0; r < size; ++r) {
          const int sr = r + kr - 1;
          if (sr < 0 || sr >= size) continue;
          for (int c = 0; c < size; ++c) {
            const int sc = c + kc - 1;
            if (sc < 0 || sc >= size) continue;
            x(ch, sr * size + sc) += cols(row, r * size + c);
          }
        }
      }
    }
  }
  return x;
}

// Per-sample intermediates of the convolutional trunk.
struct TrunkTrace {
  std::vector<Matrix> cols;      // im2col of each conv input
  std::vector<Matrix> normed;    // instance-normalised output (layers followed by a norm)
  std::vector<Vector> inv_std;
  std::vector<Matrix> relu_in;   // input to each rectifier
};

Vector trunk_forward(const std::vector<ConvLayer>& conv, const GridShape& grid,
                     const double* input, TrunkTrace* trace) {
  Matrix x = Eigen::Map<const RowMajorMatrix>(input, grid.channels, grid.cells());
  const std::size_t n = conv.size();
  if (trace) {
    trace->cols.resize(n);
    trace->normed.resize(n);
    trace->inv_std.resize(n);
    trace->relu_in.resize(n);
  }
  for (std::size_t l = 0; l < n; ++l) {
    Matrix cols = im2col(x, grid.size);
    Matrix z = conv[l].weights * cols;
    z.colwise() += conv[l].bias;
    if (l + 1 < n) {
      Vector inv(z.rows());
      for (Eigen::Index ch = 0; ch < z.rows(); ++ch) {
        const double mean = z.row(ch).mean();
        z.row(ch).array() -= mean;
        const double var = z.row(ch).squaredNorm() / static_cast<double>(z.cols());
        inv(ch) = 1.0 / std::sqrt(var + kNormEpsilon);
        z.row(ch) *= inv(ch);
      }
      if (trace) {
        trace->normed[l] = z;
        trace->inv_std[l] = inv;
      }
    }
    if (trace) {
      trace->cols[l] = std::move(cols);
      trace->relu_in[l] = z;
    }
    x = z.cwiseMax(0.0);
  }
  Vector features(x.size());
  Eigen::Map<RowMajorMatrix>(features.data(), x.rows(), x.cols()) = x;
  return features;
}

// Accumulates parameter gradients of one sample's trunk into grad.
void trunk_backward(const std::vector<ConvLayer>& conv, const GridShape& grid,
                    const TrunkTrace& trace, const double* d_features,
                    std::vector<ConvLayer>& grad) {
  const std::size_t n = conv.size();
  Matrix dx = Eigen::Map<const RowMajorMatrix>(d_features, conv.back().out_channels, grid.cells());
  for (std::size_t l = n; l-- > 0;) {
    Matrix dz = (trace.relu_in[l].array() > 0.0).cast<double>() * dx.array();
    if (l + 1 < n) {
      const Matrix& y = trace.normed[l];
      const double cells = static_cast<double>(y.cols());
      for (Eigen::Index ch = 0; ch < dz.rows(); ++ch) {
        const double mean_dy = dz.row(ch).sum() / cells;
        const double mean_dy_y = dz.row(ch).dot(y.row(ch)) / cells;
        dz.row(ch) = trace.inv_std[l](ch) *
                     (dz.row(ch).array() - mean_dy - y.row(ch).array() * mean_dy_y).matrix();
      }
    }
    grad[l].weights.noalias() += dz * trace.cols[l].transpose();
    grad[l].bias += dz.rowwise().sum();
    if (l > 0) {
      dx = col2im(conv[l].weights.transpose() * dz, conv[l].in_channels, grid.size);
    }
  }
}

struct DenseTrace {
  std::vector<Matrix> activations;  // input of each dense layer
  std::vector<Matrix> pre;          // pre-activation of each dense layer
};

Matrix dense_forward(const std::vector<DenseLayer>& dense, Matrix a, DenseTrace* trace) {
  if (trace) {
    trace->activations.clear();
    trace->pre.clear();
  }
  for (std::size_t l = 0; l < dense.size(); ++l) {
    Matrix z = dense[l].weights * a;
    z.colwise() += dense[l].bias;
    if (trace) {
      trace->activations.push_back(std::move(a));
      trace->pre.push_back(z);
    }
    a = l + 1 < dense.size() ? Matrix(z.cwiseMax(0.0)) : std::move(z);
  }
  return a;
}

void check_input(const QNetwork& net, Eigen::Index rows) {
  if (rows != net.input_dim()) {
    throw std::invalid_argument("QNetwork: observation dimension " + std::to_string(rows) +
                                " does not match network input " +
                                std::to_string(net.input_dim()));
  }
}

Matrix trunk_features(const QNetwork& net, const Matrix& obs, std::vector<TrunkTrace>* traces) {
  const auto& arch = net.architecture();
  if (!arch.grid) return obs;
  Matrix features(dense_input_dim(arch), obs.cols());
  if (traces) traces->resize(static_cast<std::size_t>(obs.cols()));
  for (Eigen::Index j = 0; j < obs.cols(); ++j) {
    features.col(j) = trunk_forward(net.conv_layers(), *arch.grid, obs.col(j).data(),
                                    traces ? &(*traces)[static_cast<std::size_t>(j)] : nullptr);
  }
  return features;
}

}  // namespace

void Architecture::validate() const {
  if (outputs < 1) throw std::invalid_argument("Architecture: outputs must be positive");
  if (input_dim < 1) throw std::invalid_argument("Architecture: input_dim must be positive");
  for (int h : hidden) {
    if (h < 1) throw std::invalid_argument("Architecture: hidden sizes must be positive");
  }
  if (grid) {
    if (grid->channels < 1 || grid->size < 1) {
      throw std::invalid_argument("Architecture: empty grid");
    }
    if (input_dim != grid->channels * grid->cells()) {
      throw std::invalid_argument("Architecture: input_dim must equal channels * size^2");
    }
    if (conv_channels.empty()) {
      throw std::invalid_argument("Architecture: grid input needs convolution channels");
    }
    for (int c : conv_channels) {
      if (c < 1) throw std::invalid_argument("Architecture: conv channels must be positive");
    }
  } else if (!conv_channels.empty()) {
    throw std::invalid_argument("Architecture: convolution layers need a grid input");
  }
}

QNetwork::QNetwork(Architecture arch) : arch_(std::move(arch)) {
  arch_.validate();
  if (arch_.grid) {
    int in = arch_.grid->channels;
    for (int out : arch_.conv_channels) {
      ConvLayer layer;
      layer.in_channels = in;
      layer.out_channels = out;
      layer.weights = Matrix::Zero(out, in * kTaps);
      layer.bias = Vector::Zero(out);
      conv_.push_back(std::move(layer));
      in = out;
    }
  }
  int in = dense_input_dim(arch_);
  std::vector<int> sizes = arch_.hidden;
  sizes.push_back(arch_.outputs);
  for (int out : sizes) {
    dense_.push_back({Matrix::Zero(out, in), Vector::Zero(out)});
    in = out;
  }
}

QNetwork QNetwork::random(Architecture arch, Rng& rng) {
  QNetwork net(std::move(arch));
  auto fill = [&rng](Matrix& w, int fan_in) {
    const double limit = std::sqrt(6.0 / fan_in);
    std::uniform_real_distribution<double> dist(-limit, limit);
    for (Eigen::Index j = 0; j < w.cols(); ++j) {
      for (Eigen::Index i = 0; i < w.rows(); ++i) w(i, j) = dist(rng);
    }
  };
  for (auto& layer : net.conv_) fill(layer.weights, layer.in_channels * kTaps);
  for (auto& layer : net.dense_) fill(layer.weights, static_cast<int>(layer.weights.cols()));
  return net;
}

Vector QNetwork::forward(const Vector& obs) const {
  check_input(*this, obs.size());
  return forward_batch(obs);
}

Matrix QNetwork::forward_batch(const Matrix& obs) const {
  check_input(*this, obs.rows());
  return dense_forward(dense_, trunk_features(*this, obs, nullptr), nullptr);
}

std::size_t QNetwork::parameter_count() const {
  std::size_t count = 0;
  for_each_block([&count](std::span<const double> block) { count += block.size(); });
  return count;
}

void QNetwork::for_each_block(const std::function<void(std::span<double>)>& fn) {
  auto visit = [&fn](auto& m) { fn({m.data(), static_cast<std::size_t>(m.size())}); };
  for (auto& layer : conv_) {
    visit(layer.weights);
    visit(layer.bias);
  }
  for (auto& layer : dense_) {
    visit(layer.weights);
    visit(layer.bias);
  }
}

void QNetwork::for_each_block(const std::function<void(std::span<const double>)>& fn) const {
  auto visit = [&fn](const auto& m) { fn({m.data(), static_cast<std::size_t>(m.size())}); };
  for (const auto& layer : conv_) {
    visit(layer.weights);
    visit(layer.bias);
  }
  for (const auto& layer : dense_) {
    visit(layer.weights);
    visit(layer.bias);
  }
}

std::vector<double> QNetwork::flatten() const {
  std::vector<double> flat;
  flat.reserve(parameter_count());
  for_each_block([&flat](std::span<const double> block) {
    flat.insert(flat.end(), block.begin(), block.end());
  });
  return flat;
}

void QNetwork::assign(std::span<const double> flat) {
  if (flat.size() != parameter_count()) {
    throw std::invalid_argument("QNetwork::assign: expected " + std::to_string(parameter_count()) +
                                " parameters, got " + std::to_string(flat.size()));
  }
  std::size_t offset = 0;
  for_each_block([&](std::span<double> block) {
    std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(offset), block.size(), block.begin());
    offset += block.size();
  });
}

void QNetwork::axpy(double scale, const QNetwork& other) {
  if (!(arch_ == other.arch_)) throw std::invalid_argument("QNetwork::axpy: shape mismatch");
  for (std::size_t l = 0; l < conv_.size(); ++l) {
    conv_[l].weights += scale * other.conv_[l].weights;
    conv_[l].bias += scale * other.conv_[l].bias;
  }
  for (std::size_t l = 0; l < dense_.size(); ++l) {
    dense_[l].weights += scale * other.dense_[l].weights;
    dense_[l].bias += scale * other.dense_[l].bias;
  }
}

void QNetwork::set_zero() {
  for_each_block([](std::span<double> block) { std::fill(block.begin(), block.end(), 0.0); });
}

double QNetwork::squared_norm() const {
  double total = 0.0;
  for_each_block([&total](std::span<const double> block) {
    for (double v : block) total += v * v;
  });
  return total;
}

bool QNetwork::all_finite() const {
  bool ok = true;
  for_each_block([&ok](std::span<const double> block) {
    for (double v : block) ok = ok && std::isfinite(v);
  });
  return ok;
}

bool operator==(const QNetwork& a, const QNetwork& b) {
  return a.arch_ == b.arch_ && a.flatten() == b.flatten();
}

bool TargetNetwork::maybe_sync(const QNetwork& online, std::int64_t gradient_steps) {
  if (period <= 0 || gradient_steps <= 0 || gradient_steps % period != 0) return false;
  sync_target(online, net);
  return true;
}

double td_target(double r, std::span<const double> q_next, double gamma, bool done) {
  if (done) return r;
  if (q_next.empty()) throw std::invalid_argument("td_target: empty next-state values");
  return r + gamma * *std::max_element(q_next.begin(), q_next.end());
}

Vector batch_targets(const QNetwork& target_net, const Batch& batch, double gamma) {
  if (batch.size() == 0) throw std::invalid_argument("batch_targets: empty batch");
  const Matrix q_next = target_net.forward_batch(batch.next_states);
  Vector y(static_cast<Eigen::Index>(batch.size()));
  for (Eigen::Index j = 0; j < y.size(); ++j) {
    const auto col = q_next.col(j);
    y(j) = td_target(batch.rewards(j), {col.data(), static_cast<std::size_t>(col.size())}, gamma,
                     batch.dones[static_cast<std::size_t>(j)] != 0);
  }
  return y;
}

double batch_loss(const QNetwork& net, const QNetwork& target_net, const Batch& batch,
                  double gamma) {
  if (batch.size() == 0) throw std::invalid_argument("batch_loss: empty batch");
  const Vector y = batch_targets(target_net, batch, gamma);
  const Matrix q = net.forward_batch(batch.states);
  double total = 0.0;
  for (Eigen::Index j = 0; j < y.size(); ++j) {
    const double err = y(j) - q(batch.actions[static_cast<std::size_t>(j)], j);
    total += 0.5 * err * err;
  }
  return total / static_cast<double>(batch.size());
}

Gradients gradient(const QNetwork& net, const QNetwork& target_net, const Batch& batch,
                   double gamma, double* loss) {
  if (batch.size() == 0) throw std::invalid_argument("gradient: empty batch");
  return gradient_for_targets(net, batch.states, batch.actions,
                              batch_targets(target_net, batch, gamma), loss);
}

Gradients gradient_for_targets(const QNetwork& net, const Matrix& states,
                               const std::vector<int>& actions, const Vector& targets,
                               double* loss) {
  Gradients grad(net.architecture());
  const double value = gradient_into(net, states, actions, targets, grad);
  if (loss) *loss = value;
  return grad;
}

double gradient_into(const QNetwork& net, const Matrix& states, const std::vector<int>& actions,
                     const Vector& targets, Gradients& grad) {
  const auto batch_size = static_cast<Eigen::Index>(actions.size());
  if (batch_size == 0 || states.cols() != batch_size || targets.size() != batch_size) {
    throw std::invalid_argument("gradient: inconsistent or empty batch");
  }
  check_input(net, states.rows());
  // A default-constructed network reports the default architecture but holds no layers.
  if (!(grad.architecture() == net.architecture()) ||
      grad.dense_layers().size() != net.dense_layers().size()) {
    grad = Gradients(net.architecture());
  }

  const bool has_trunk = !net.conv_layers().empty();
  std::vector<TrunkTrace> trunk;
  DenseTrace trace;
  const Matrix q = dense_forward(net.dense_layers(),
                                 trunk_features(net, states, has_trunk ? &trunk : nullptr), &trace);

  // dL/dQ is non-zero only at the taken action.
  Matrix dz = Matrix::Zero(q.rows(), q.cols());
  double total = 0.0;
  const double inv_n = 1.0 / static_cast<double>(batch_size);
  for (Eigen::Index j = 0; j < batch_size; ++j) {
    const int a = actions[static_cast<std::size_t>(j)];
    if (a < 0 || a >= q.rows()) throw std::invalid_argument("gradient: action out of range");
    const double err = q(a, j) - targets(j);
    total += 0.5 * err * err;
    dz(a, j) = err * inv_n;
  }

  auto& gdense = grad.dense_layers();
  const auto& dense = net.dense_layers();
  if (has_trunk) {
    for (auto& layer : grad.conv_layers()) {
      layer.weights.setZero();
      layer.bias.setZero();
    }
  }
  for (std::size_t l = dense.size(); l-- > 0;) {
    gdense[l].weights.noalias() = dz * trace.activations[l].transpose();
    gdense[l].bias.noalias() = dz.rowwise().sum();
    if (l == 0 && !has_trunk) break;
    Matrix da = dense[l].weights.transpose() * dz;
    if (l > 0) {
      dz = (trace.pre[l - 1].array() > 0.0).cast<double>() * da.array();
    } else {
      const auto& grid = *net.architecture().grid;
      for (Eigen::Index j = 0; j < batch_size; ++j) {
        trunk_backward(net.conv_layers(), grid, trunk[static_cast<std::size_t>(j)],
                       da.col(j).data(), grad.conv_layers());
      }
    }
  }
  return total * inv_n;
}

void sgd_step(QNetwork& net, const Gradients& grad, double lr, double max_norm) {
  if (lr < 0.0) throw std::invalid_argument("sgd_step: learning rate must be non-negative");
  double scale = lr;
  if (max_norm > 0.0) {
    const double norm = std::sqrt(grad.squared_norm());
    if (norm > max_norm) scale *= max_norm / norm;
  }
  if (scale == 0.0) return;
  net.axpy(-scale, grad);
}

void sync_target(const QNetwork& net, QNetwork& target_net) { target_net = net; }

std::size_t argmax(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("argmax: empty input");
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

}  // namespace uavtrack::qnet
