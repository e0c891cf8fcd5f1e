#pragma once

// Dense feed-forward networks with hand-written backprop and Adam.
//
// Batches are stored column-major with one sample per column, so a batch of
// B inputs of width d is a d x B matrix.

#include <cstdint>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "swar/error.hpp"
#include "swar/rng.hpp"

namespace swar::nn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;

enum class Activation { Relu, Tanh, Sigmoid, Identity };

std::string_view to_string(Activation act);

struct DenseLayer {
  Matrix weight;  // out x in
  Vector bias;    // out
  Activation activation = Activation::Identity;
};

struct NetGradients {
  std::vector<Matrix> weight;
  std::vector<Vector> bias;
  Matrix input;  // d loss / d input, same shape as the forward input
};

/// Activations of every layer for one forward pass; values[0] is the input.
struct ForwardTrace {
  std::vector<Matrix> values;
  const Matrix& output() const { return values.back(); }
};

class DenseNet {
 public:
  DenseNet() = default;
  explicit DenseNet(std::vector<DenseLayer> layers);

  /// Fully connected chain sizes[0] -> sizes[1] -> ... with weights drawn
  /// uniformly from +-1/sqrt(fan_in).
  static DenseNet mlp(std::span<const int> sizes, Activation hidden, Activation output, Rng& rng);
  static DenseNet mlp(std::initializer_list<int> sizes, Activation hidden, Activation output,
                      Rng& rng);

  Matrix forward(const Matrix& input) const;
  Vector forward(const Vector& input) const;
  ForwardTrace trace(const Matrix& input) const;

  NetGradients backward(const ForwardTrace& trace, const Matrix& output_grad) const;
  NetGradients backward(const Matrix& input, const Matrix& output_grad) const;
  /// Input gradient only; skips the parameter gradients.
  Matrix backward_input(const ForwardTrace& trace, const Matrix& output_grad) const;

  int input_dim() const;
  int output_dim() const;
  std::size_t parameter_count() const;

  std::vector<DenseLayer>& layers() { return layers_; }
  const std::vector<DenseLayer>& layers() const { return layers_; }

  bool operator==(const DenseNet& other) const;

 private:
  void check_input(const Matrix& input) const;

  std::vector<DenseLayer> layers_;
};

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  AdamState() = default;
  explicit AdamState(const DenseNet& net, AdamConfig config = {});

  AdamConfig config;
  std::vector<Matrix> m_weight, v_weight;
  std::vector<Vector> m_bias, v_bias;
  std::int64_t step = 0;
};

/// Bias-corrected adaptive-moment update of every layer of `net`.
/// Throws NumericError naming the offending block on a non-finite gradient.
void adam_step(DenseNet& net, const NetGradients& grads, AdamState& state, double lr);

/// target <- tau * source + (1 - tau) * target, layer by layer.
void soft_update(DenseNet& target, const DenseNet& source, double tau);

struct LossResult {
  double value = 0.0;
  Matrix grad;  // d value / d prediction
};

inline constexpr double kProbClamp = 1e-7;

/// Mean over all elements of (pred - target)^2.
LossResult mse_loss(const Matrix& pred, const Matrix& target);

/// Mean binary cross-entropy; prob is clamped to [1e-7, 1 - 1e-7].
LossResult bce_loss(const Matrix& prob, const Matrix& label);

/// Per-column losses (mean over rows), used as per-sample rewards.
RowVector per_sample_mse(const Matrix& pred, const Matrix& target);
RowVector per_sample_bce(const Matrix& prob, const Matrix& label);

using LossFn = std::function<LossResult(const Matrix& output)>;

/// Max over parameters of |analytic - numeric| / max(|analytic|, |numeric|, 1e-6)
/// against central differences with step h. The floor keeps round-off on
/// near-zero gradients from dominating.
double gradient_check(const DenseNet& net, const Matrix& input, const LossFn& loss,
                      double h = 1e-5);

}  // namespace swar::nn
