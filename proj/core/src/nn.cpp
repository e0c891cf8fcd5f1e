#include "swar/nn.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace swar::nn {
namespace {

void activate(Matrix& z, Activation act) {
  switch (act) {
    case Activation::Relu:
      z = z.cwiseMax(0.0);
      break;
    case Activation::Tanh:
      z = z.array().tanh();
      break;
    case Activation::Sigmoid:
      z = (1.0 + (-z.array()).exp()).inverse();
      break;
    case Activation::Identity:
      break;
  }
}

// Turns d loss / d y into d loss / d z in place, where y = act(z).
void activation_backward(Matrix& grad, const Matrix& y, Activation act) {
  switch (act) {
    case Activation::Relu:
      grad = (y.array() > 0.0).select(grad, 0.0);
      break;
    case Activation::Tanh:
      grad.array() *= 1.0 - y.array().square();
      break;
    case Activation::Sigmoid:
      grad.array() *= y.array() * (1.0 - y.array());
      break;
    case Activation::Identity:
      break;
  }
}

void check_same_shape(const Matrix& a, const Matrix& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ContractError(std::string(what) + ": shape mismatch (" + std::to_string(a.rows()) + "x" +
                        std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                        std::to_string(b.cols()) + ")");
  }
}

}  // namespace

std::string_view to_string(Activation act) {
  switch (act) {
    case Activation::Relu: return "relu";
    case Activation::Tanh: return "tanh";
    case Activation::Sigmoid: return "sigmoid";
    case Activation::Identity: return "identity";
  }
  return "unknown";
}

DenseNet::DenseNet(std::vector<DenseLayer> layers) : layers_(std::move(layers)) {
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const auto& l = layers_[i];
    if (l.bias.size() != l.weight.rows()) {
      throw ContractError("DenseNet: layer " + std::to_string(i) + " bias length does not match weight rows");
    }
    if (i > 0 && l.weight.cols() != layers_[i - 1].weight.rows()) {
      throw ContractError("DenseNet: layer " + std::to_string(i) + " input width does not chain");
    }
  }
}

DenseNet DenseNet::mlp(std::span<const int> sizes, Activation hidden, Activation output, Rng& rng) {
  if (sizes.size() < 2) throw ContractError("DenseNet::mlp: need at least input and output sizes");
  std::vector<DenseLayer> layers;
  for (std::size_t i = 0; i + 1 < sizes.size(); ++i) {
    const int in = sizes[i];
    const int out = sizes[i + 1];
    if (in <= 0 || out <= 0) throw ContractError("DenseNet::mlp: layer sizes must be positive");
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    DenseLayer layer;
    layer.weight.resize(out, in);
    layer.bias.resize(out);
    for (Eigen::Index c = 0; c < in; ++c)
      for (Eigen::Index r = 0; r < out; ++r) layer.weight(r, c) = rng.uniform(-bound, bound);
    for (Eigen::Index r = 0; r < out; ++r) layer.bias(r) = rng.uniform(-bound, bound);
    layer.activation = (i + 2 == sizes.size()) ? output : hidden;
    layers.push_back(std::move(layer));
  }
  return DenseNet(std::move(layers));
}

DenseNet DenseNet::mlp(std::initializer_list<int> sizes, Activation hidden, Activation output,
                       Rng& rng) {
  std::vector<int> v(sizes);
  return mlp(std::span<const int>(v), hidden, output, rng);
}

int DenseNet::input_dim() const {
  return layers_.empty() ? 0 : static_cast<int>(layers_.front().weight.cols());
}

int DenseNet::output_dim() const {
  return layers_.empty() ? 0 : static_cast<int>(layers_.back().weight.rows());
}

std::size_t DenseNet::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers_) n += static_cast<std::size_t>(l.weight.size() + l.bias.size());
  return n;
}

bool DenseNet::operator==(const DenseNet& other) const {
  if (layers_.size() != other.layers_.size()) return false;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const auto& a = layers_[i];
    const auto& b = other.layers_[i];
    if (a.activation != b.activation || a.weight.rows() != b.weight.rows() ||
        a.weight.cols() != b.weight.cols() || a.weight != b.weight || a.bias != b.bias) {
      return false;
    }
  }
  return true;
}

void DenseNet::check_input(const Matrix& input) const {
  if (layers_.empty()) throw ContractError("DenseNet: empty network");
  if (input.rows() != input_dim()) {
    throw ContractError("DenseNet: input has " + std::to_string(input.rows()) + " rows, expected " +
                        std::to_string(input_dim()));
  }
}

Matrix DenseNet::forward(const Matrix& input) const {
  check_input(input);
  Matrix x = input;
  for (const auto& l : layers_) {
    Matrix z(l.weight.rows(), x.cols());
    z.noalias() = l.weight * x;
    z.colwise() += l.bias;
    activate(z, l.activation);
    x = std::move(z);
  }
  return x;
}

Vector DenseNet::forward(const Vector& input) const {
  return forward(Matrix(input)).col(0);
}

ForwardTrace DenseNet::trace(const Matrix& input) const {
  check_input(input);
  ForwardTrace t;
  t.values.reserve(layers_.size() + 1);
  t.values.push_back(input);
  for (const auto& l : layers_) {
    Matrix z(l.weight.rows(), input.cols());
    z.noalias() = l.weight * t.values.back();
    z.colwise() += l.bias;
    activate(z, l.activation);
    t.values.push_back(std::move(z));
  }
  return t;
}

NetGradients DenseNet::backward(const ForwardTrace& trace, const Matrix& output_grad) const {
  if (trace.values.size() != layers_.size() + 1) throw ContractError("DenseNet::backward: stale trace");
  check_same_shape(trace.output(), output_grad, "DenseNet::backward");
  NetGradients g;
  g.weight.resize(layers_.size());
  g.bias.resize(layers_.size());
  Matrix delta = output_grad;
  for (std::size_t k = layers_.size(); k-- > 0;) {
    const auto& l = layers_[k];
    activation_backward(delta, trace.values[k + 1], l.activation);
    g.weight[k].noalias() = delta * trace.values[k].transpose();
    g.bias[k] = delta.rowwise().sum();
    Matrix prev(l.weight.cols(), delta.cols());
    prev.noalias() = l.weight.transpose() * delta;
    delta = std::move(prev);
  }
  g.input = std::move(delta);
  return g;
}

NetGradients DenseNet::backward(const Matrix& input, const Matrix& output_grad) const {
  return backward(trace(input), output_grad);
}

Matrix DenseNet::backward_input(const ForwardTrace& trace, const Matrix& output_grad) const {
  if (trace.values.size() != layers_.size() + 1) throw ContractError("DenseNet::backward: stale trace");
  check_same_shape(trace.output(), output_grad, "DenseNet::backward_input");
  Matrix delta = output_grad;
  for (std::size_t k = layers_.size(); k-- > 0;) {
    const auto& l = layers_[k];
    activation_backward(delta, trace.values[k + 1], l.activation);
    Matrix prev(l.weight.cols(), delta.cols());
    prev.noalias() = l.weight.transpose() * delta;
    delta = std::move(prev);
  }
  return delta;
}

AdamState::AdamState(const DenseNet& net, AdamConfig cfg) : config(cfg) {
  for (const auto& l : net.layers()) {
    m_weight.push_back(Matrix::Zero(l.weight.rows(), l.weight.cols()));
    v_weight.push_back(Matrix::Zero(l.weight.rows(), l.weight.cols()));
    m_bias.push_back(Vector::Zero(l.bias.size()));
    v_bias.push_back(Vector::Zero(l.bias.size()));
  }
}

namespace {

template <typename Param, typename Grad, typename Moment>
void adam_block(Param& p, const Grad& g, Moment& m, Moment& v, const AdamConfig& c, double step_size,
                double bias2) {
  m = c.beta1 * m + (1.0 - c.beta1) * g;
  v = c.beta2 * v + (1.0 - c.beta2) * g.cwiseProduct(g);
  p.array() -= step_size * m.array() / ((v.array() / bias2).sqrt() + c.eps);
}

}  // namespace

void adam_step(DenseNet& net, const NetGradients& grads, AdamState& state, double lr) {
  auto& layers = net.layers();
  if (grads.weight.size() != layers.size() || grads.bias.size() != layers.size() ||
      state.m_weight.size() != layers.size()) {
    throw ContractError("adam_step: gradient/state layer count does not match network");
  }
  for (std::size_t k = 0; k < layers.size(); ++k) {
    check_same_shape(layers[k].weight, grads.weight[k], "adam_step weight");
    if (grads.bias[k].size() != layers[k].bias.size()) throw ContractError("adam_step: bias shape mismatch");
    if (!grads.weight[k].allFinite()) {
      throw NumericError("adam_step: non-finite gradient in layer " + std::to_string(k) + " weight");
    }
    if (!grads.bias[k].allFinite()) {
      throw NumericError("adam_step: non-finite gradient in layer " + std::to_string(k) + " bias");
    }
  }
  ++state.step;
  const auto& c = state.config;
  const double t = static_cast<double>(state.step);
  const double bias1 = 1.0 - std::pow(c.beta1, t);
  const double bias2 = 1.0 - std::pow(c.beta2, t);
  const double step_size = lr / bias1;
  for (std::size_t k = 0; k < layers.size(); ++k) {
    adam_block(layers[k].weight, grads.weight[k], state.m_weight[k], state.v_weight[k], c, step_size, bias2);
    adam_block(layers[k].bias, grads.bias[k], state.m_bias[k], state.v_bias[k], c, step_size, bias2);
  }
}

void soft_update(DenseNet& target, const DenseNet& source, double tau) {
  auto& dst = target.layers();
  const auto& src = source.layers();
  if (dst.size() != src.size()) throw ContractError("soft_update: layer count mismatch");
  for (std::size_t k = 0; k < dst.size(); ++k) {
    check_same_shape(dst[k].weight, src[k].weight, "soft_update");
    if (dst[k].bias.size() != src[k].bias.size()) throw ContractError("soft_update: bias shape mismatch");
    dst[k].weight = tau * src[k].weight + (1.0 - tau) * dst[k].weight;
    dst[k].bias = tau * src[k].bias + (1.0 - tau) * dst[k].bias;
  }
}

LossResult mse_loss(const Matrix& pred, const Matrix& target) {
  check_same_shape(pred, target, "mse_loss");
  if (pred.size() == 0) throw ContractError("mse_loss: empty input");
  const double n = static_cast<double>(pred.size());
  Matrix diff = pred - target;
  return {diff.squaredNorm() / n, (2.0 / n) * diff};
}

namespace {

void check_labels(const Matrix& label, const char* what) {
  for (Eigen::Index i = 0; i < label.size(); ++i) {
    const double y = label.data()[i];
    if (y != 0.0 && y != 1.0) throw ContractError(std::string(what) + ": label outside {0,1}");
  }
}

}  // namespace

LossResult bce_loss(const Matrix& prob, const Matrix& label) {
  check_same_shape(prob, label, "bce_loss");
  if (prob.size() == 0) throw ContractError("bce_loss: empty input");
  check_labels(label, "bce_loss");
  const double n = static_cast<double>(prob.size());
  const auto p = prob.array().max(kProbClamp).min(1.0 - kProbClamp);
  const auto y = label.array();
  const double value = -(y * p.log() + (1.0 - y) * (1.0 - p).log()).sum() / n;
  Matrix grad = ((p - y) / (p * (1.0 - p)) / n).matrix();
  return {value, std::move(grad)};
}

RowVector per_sample_mse(const Matrix& pred, const Matrix& target) {
  check_same_shape(pred, target, "per_sample_mse");
  return (pred - target).array().square().colwise().mean();
}

RowVector per_sample_bce(const Matrix& prob, const Matrix& label) {
  check_same_shape(prob, label, "per_sample_bce");
  check_labels(label, "per_sample_bce");
  const auto p = prob.array().max(kProbClamp).min(1.0 - kProbClamp);
  const auto y = label.array();
  return (-(y * p.log() + (1.0 - y) * (1.0 - p).log())).colwise().mean();
}

double gradient_check(const DenseNet& net, const Matrix& input, const LossFn& loss, double h) {
  const auto tr = net.trace(input);
  const auto analytic = net.backward(tr, loss(tr.output()).grad);
  DenseNet probe = net;
  double worst = 0.0;
  auto compare = [&](double& param, double a) {
    const double saved = param;
    param = saved + h;
    const double up = loss(probe.forward(input)).value;
    param = saved - h;
    const double down = loss(probe.forward(input)).value;
    param = saved;
    const double numeric = (up - down) / (2.0 * h);
    const double denom = std::max({std::abs(a), std::abs(numeric), 1e-6});
    worst = std::max(worst, std::abs(a - numeric) / denom);
  };
  auto& layers = probe.layers();
  for (std::size_t k = 0; k < layers.size(); ++k) {
    for (Eigen::Index i = 0; i < layers[k].weight.size(); ++i) {
      compare(layers[k].weight.data()[i], analytic.weight[k].data()[i]);
    }
    for (Eigen::Index i = 0; i < layers[k].bias.size(); ++i) {
      compare(layers[k].bias.data()[i], analytic.bias[k].data()[i]);
    }
  }
  return worst;
}

}  // namespace swar::nn
