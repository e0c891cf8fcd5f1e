#include "swar/selector.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace swar::selection {
namespace {

void check_lengths(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw ContractError(std::string(what) + ": length mismatch (" + std::to_string(a) + " vs " +
                        std::to_string(b) + ")");
  }
}

double clamp_prob(double p) { return std::clamp(p, nn::kProbClamp, 1.0 - nn::kProbClamp); }

}  // namespace

Mask::Mask(std::initializer_list<int> bits) {
  bits_.reserve(bits.size());
  for (int b : bits) bits_.push_back(b != 0 ? 1 : 0);
}

Mask Mask::from_vector(const Vector& v) {
  Mask m(static_cast<std::size_t>(v.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) m.set(static_cast<std::size_t>(i), v(i) != 0.0);
  return m;
}

Mask Mask::from_indices(std::size_t size, const std::vector<int>& indices) {
  Mask m(size);
  for (int i : indices) {
    if (i < 0 || static_cast<std::size_t>(i) >= size) throw ContractError("Mask::from_indices: index out of range");
    m.set(static_cast<std::size_t>(i), true);
  }
  return m;
}

std::size_t Mask::cardinality() const {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

std::vector<int> Mask::indices() const {
  std::vector<int> out;
  for (std::size_t i = 0; i < bits_.size(); ++i)
    if (bits_[i]) out.push_back(static_cast<int>(i));
  return out;
}

Vector Mask::to_vector() const {
  Vector v(static_cast<Eigen::Index>(bits_.size()));
  for (std::size_t i = 0; i < bits_.size(); ++i) v(static_cast<Eigen::Index>(i)) = bits_[i];
  return v;
}

Mask Mask::complement() const {
  Mask m(bits_.size());
  for (std::size_t i = 0; i < bits_.size(); ++i) m.bits_[i] = bits_[i] ? 0 : 1;
  return m;
}

SelectorModel::SelectorModel(int input_dim, int output_dim, const SelectorConfig& config, Rng& rng) {
  std::vector<int> sizes;
  sizes.push_back(input_dim);
  sizes.insert(sizes.end(), config.hidden.begin(), config.hidden.end());
  sizes.push_back(output_dim);
  net_ = nn::DenseNet::mlp(std::span<const int>(sizes), nn::Activation::Relu, nn::Activation::Sigmoid, rng);
  adam_ = nn::AdamState(net_);
}

SelectorModel::SelectorModel(nn::DenseNet net) : net_(std::move(net)), adam_(net_) {
  if (net_.layers().empty() || net_.layers().back().activation != nn::Activation::Sigmoid) {
    throw ContractError("SelectorModel: network must end in a sigmoid layer");
  }
}

Matrix select_probs(const SelectorModel& selector, const Matrix& x) {
  return selector.net().forward(x).array().max(nn::kProbClamp).min(1.0 - nn::kProbClamp);
}

Vector select_probs(const SelectorModel& selector, const Vector& x) {
  return select_probs(selector, Matrix(x)).col(0);
}

Mask sample_mask(const Vector& probs, Rng& rng) {
  Mask m(static_cast<std::size_t>(probs.size()));
  for (Eigen::Index i = 0; i < probs.size(); ++i) m.set(static_cast<std::size_t>(i), rng.bernoulli(probs(i)));
  return m;
}

Matrix sample_masks(const Matrix& probs, Rng& rng) {
  Matrix m(probs.rows(), probs.cols());
  for (Eigen::Index c = 0; c < probs.cols(); ++c)
    for (Eigen::Index r = 0; r < probs.rows(); ++r) m(r, c) = rng.bernoulli(probs(r, c)) ? 1.0 : 0.0;
  return m;
}

Mask threshold_mask(const Vector& probs, double tau) {
  Mask m(static_cast<std::size_t>(probs.size()));
  for (Eigen::Index i = 0; i < probs.size(); ++i) m.set(static_cast<std::size_t>(i), probs(i) >= tau);
  return m;
}

Matrix threshold_masks(const Matrix& probs, double tau) {
  return (probs.array() >= tau).cast<double>();
}

Vector mask_apply(const Vector& x, const Mask& mask, const Vector& z) {
  check_lengths(static_cast<std::size_t>(x.size()), mask.size(), "mask_apply");
  check_lengths(static_cast<std::size_t>(z.size()), mask.size(), "mask_apply");
  Vector out(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) out(i) = mask[static_cast<std::size_t>(i)] ? x(i) : z(i);
  return out;
}

Vector mask_apply(const Vector& x, const Mask& mask) {
  return mask_apply(x, mask, Vector::Zero(x.size()));
}

Matrix mask_apply(const Matrix& x, const Matrix& masks) {
  if (x.rows() != masks.rows() || x.cols() != masks.cols()) throw ContractError("mask_apply: shape mismatch");
  return x.cwiseProduct(masks);
}

double log_prob(const Vector& probs, const Mask& mask) {
  check_lengths(static_cast<std::size_t>(probs.size()), mask.size(), "log_prob");
  double total = 0.0;
  for (Eigen::Index i = 0; i < probs.size(); ++i) {
    const double p = clamp_prob(probs(i));
    total += mask[static_cast<std::size_t>(i)] ? std::log(p) : std::log(1.0 - p);
  }
  return total;
}

RowVector log_probs(const Matrix& probs, const Matrix& masks) {
  if (probs.rows() != masks.rows() || probs.cols() != masks.cols()) throw ContractError("log_probs: shape mismatch");
  const auto p = probs.array().max(nn::kProbClamp).min(1.0 - nn::kProbClamp);
  const auto m = masks.array();
  return (m * p.log() + (1.0 - m) * (1.0 - p).log()).colwise().sum();
}

double selection_penalty(double cardinality, const SelectionPenaltyParams& pen) {
  if (pen.mode == PenaltyMode::Proportion) {
    if (pen.d <= 0) throw ContractError("selection_penalty: proportion mode needs d > 0");
    return pen.lambda * std::abs(cardinality / pen.d - pen.p_r);
  }
  return pen.lambda * std::abs(cardinality - pen.d * pen.p_r);
}

double selector_reward(double l_baseline, double l_selected, const Mask& mask,
                       const SelectionPenaltyParams& pen) {
  return (l_baseline - l_selected) - selection_penalty(static_cast<double>(mask.cardinality()), pen);
}

RowVector selector_rewards(const RowVector& l_baseline, const RowVector& l_selected, const Matrix& masks,
                           const SelectionPenaltyParams& pen) {
  if (l_baseline.size() != l_selected.size() || l_baseline.size() != masks.cols()) {
    throw ContractError("selector_rewards: batch size mismatch");
  }
  const RowVector card = masks.colwise().sum();
  RowVector out(card.size());
  for (Eigen::Index i = 0; i < card.size(); ++i) {
    out(i) = (l_baseline(i) - l_selected(i)) - selection_penalty(card(i), pen);
  }
  return out;
}

void selector_update(SelectorModel& selector, const Matrix& x, const Matrix& masks, const RowVector& rewards,
                     double lr, double logit_decay) {
  if (!rewards.allFinite()) throw NumericError("selector_update: non-finite reward");
  if (masks.cols() != x.cols() || rewards.size() != x.cols()) throw ContractError("selector_update: batch size mismatch");
  const auto trace = selector.net().trace(x);
  const auto p = trace.output().array().max(nn::kProbClamp).min(1.0 - nn::kProbClamp);
  const auto m = masks.array();
  // Loss is -mean_i r_i * log_prob_i; d log_prob / d p = m/p - (1-m)/(1-p).
  const double batch = static_cast<double>(x.cols());
  Matrix grad = (m / p - (1.0 - m) / (1.0 - p)).matrix();
  grad *= (-rewards / batch).asDiagonal();
  if (logit_decay > 0.0) {
    // d/dp of logit_decay * z^2 with z = log(p / (1 - p)); keeps the sigmoid out of saturation
    grad.array() += 2.0 * logit_decay * (p / (1.0 - p)).log() / (p * (1.0 - p)) / batch;
  }
  const auto grads = selector.net().backward(trace, grad);
  nn::adam_step(selector.net(), grads, selector.optimizer(), lr);
}

void selector_update(SelectorModel& selector, const Vector& x, const Mask& mask, double reward, double lr) {
  if (!std::isfinite(reward)) throw NumericError("selector_update: non-finite reward");
  check_lengths(mask.size(), static_cast<std::size_t>(selector.output_dim()), "selector_update");
  RowVector r(1);
  r(0) = reward;
  selector_update(selector, Matrix(x), Matrix(mask.to_vector()), r, lr);
}

Curriculum Curriculum::fixed(double lambda, double p_r) {
  return Curriculum{lambda, lambda, p_r, p_r, 1};
}

CurriculumValues curriculum_at(const Curriculum& c, std::int64_t step) {
  const double total = static_cast<double>(std::max<std::int64_t>(c.total_steps, 1));
  const double t = std::clamp(static_cast<double>(std::max<std::int64_t>(step, 0)) / total, 0.0, 1.0);
  return {c.lambda_start + t * (c.lambda_end - c.lambda_start), c.pr_start + t * (c.pr_end - c.pr_start)};
}

std::vector<Mask> iterative_select(const SelectorModel& selector, const Vector& x, int n_iters, const Vector& z) {
  if (n_iters < 1) throw ContractError("iterative_select: n_iters must be >= 1");
  std::vector<Mask> masks;
  Vector current = x;
  for (int k = 0; k < n_iters; ++k) {
    Mask m = threshold_mask(select_probs(selector, current));
    current = mask_apply(current, m, z);
    masks.push_back(std::move(m));
  }
  return masks;
}

std::vector<Mask> iterative_select(const SelectorModel& selector, const Vector& x, int n_iters) {
  return iterative_select(selector, x, n_iters, Vector::Zero(x.size()));
}

std::vector<Matrix> iterative_select(const SelectorModel& selector, const Matrix& x, int n_iters) {
  if (n_iters < 1) throw ContractError("iterative_select: n_iters must be >= 1");
  std::vector<Matrix> masks;
  Matrix current = x;
  for (int k = 0; k < n_iters; ++k) {
    Matrix m = threshold_masks(select_probs(selector, current));
    current = current.cwiseProduct(m);
    masks.push_back(std::move(m));
  }
  return masks;
}

Mask mask_or(const Mask& a, const Mask& b) {
  check_lengths(a.size(), b.size(), "mask_or");
  Mask out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out.set(i, a[i] || b[i]);
  return out;
}

Mask extend_mask(const Mask& m, std::size_t n2, Rng& rng) {
  const std::size_t have = m.cardinality();
  if (n2 < have || n2 > m.size()) {
    throw ContractError("extend_mask: need |m|_0 <= n2 <= d (|m|_0=" + std::to_string(have) +
                        ", n2=" + std::to_string(n2) + ", d=" + std::to_string(m.size()) + ")");
  }
  std::vector<int> free = m.complement().indices();
  std::shuffle(free.begin(), free.end(), rng.engine());
  Mask out = m;
  for (std::size_t k = 0; k < n2 - have; ++k) out.set(static_cast<std::size_t>(free[k]), true);
  return out;
}

}  // namespace swar::selection
