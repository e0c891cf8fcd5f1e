#include "swar/td3.hpp"

#include <cmath>
#include <sstream>

namespace swar::rl {
namespace {

nn::DenseNet make_mlp(int in, const std::vector<int>& hidden, int out, nn::Activation output, Rng& rng) {
  std::vector<int> sizes{in};
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(out);
  return nn::DenseNet::mlp(std::span<const int>(sizes), nn::Activation::Relu, output, rng);
}

Matrix clip_to_box(const Matrix& a, const Vector& low, const Vector& high) {
  Matrix out = a;
  for (Eigen::Index c = 0; c < out.cols(); ++c) out.col(c) = out.col(c).cwiseMax(low).cwiseMin(high);
  return out;
}

}  // namespace

Matrix stack_rows(const Matrix& top, const Matrix& bottom) {
  if (top.cols() != bottom.cols()) throw ContractError("stack_rows: column count mismatch");
  Matrix out(top.rows() + bottom.rows(), top.cols());
  out.topRows(top.rows()) = top;
  out.bottomRows(bottom.rows()) = bottom;
  return out;
}

Matrix masked_critic_input(const Matrix& s, const Matrix& a, const Matrix& masks) {
  if (a.rows() != masks.rows() || a.cols() != masks.cols()) throw ContractError("masked_critic_input: mask shape mismatch");
  Matrix out(s.rows() + 2 * a.rows(), s.cols());
  out.topRows(s.rows()) = s;
  out.middleRows(s.rows(), a.rows()) = a.cwiseProduct(masks);
  out.bottomRows(a.rows()) = masks;
  return out;
}

Vector uniform_action(const Vector& low, const Vector& high, Rng& rng) {
  Vector a(low.size());
  for (Eigen::Index i = 0; i < a.size(); ++i) a(i) = rng.uniform(low(i), high(i));
  return a;
}

// --- Actor -------------------------------------------------------------------

Actor::Actor(int state_dim, const Vector& low, const Vector& high, const std::vector<int>& hidden, Rng& rng)
    : low_(low), high_(high), center_(0.5 * (low + high)), half_(0.5 * (high - low)) {
  if (low.size() != high.size() || (high - low).minCoeff() <= 0.0) throw ContractError("Actor: invalid action box");
  net_ = make_mlp(state_dim, hidden, static_cast<int>(low.size()), nn::Activation::Tanh, rng);
  target_ = net_;
  adam_ = nn::AdamState(net_);
}

Matrix Actor::rescale(const Matrix& y) const {
  Matrix a = half_.asDiagonal() * y;
  a.colwise() += center_;
  return a;
}

Matrix Actor::act(const Matrix& s) const { return rescale(net_.forward(s)); }
Matrix Actor::act_target(const Matrix& s) const { return rescale(target_.forward(s)); }

void Actor::ascend(const Matrix& s, const Matrix& dq_da, double lr) {
  const auto trace = net_.trace(s);
  // Loss = -mean Q, so d loss / d y = -(half * dq_da) / n.
  const Matrix grad = -(half_.asDiagonal() * dq_da) / static_cast<double>(s.cols());
  nn::adam_step(net_, net_.backward(trace, grad), adam_, lr);
}

// --- TwinCritic --------------------------------------------------------------

TwinCritic::TwinCritic(int input_dim, const std::vector<int>& hidden, Rng& rng) {
  q1_ = make_mlp(input_dim, hidden, 1, nn::Activation::Identity, rng);
  q2_ = make_mlp(input_dim, hidden, 1, nn::Activation::Identity, rng);
  t1_ = q1_;
  t2_ = q2_;
  adam1_ = nn::AdamState(q1_);
  adam2_ = nn::AdamState(q2_);
}

RowVector TwinCritic::target_min(const Matrix& x) const {
  return t1_.forward(x).cwiseMin(t2_.forward(x));
}

RowVector TwinCritic::q1(const Matrix& x) const { return q1_.forward(x); }

double TwinCritic::regress(const Matrix& x, const RowVector& y, double lr, RowVector* per_sample) {
  const auto tr1 = q1_.trace(x);
  const auto tr2 = q2_.trace(x);
  const Matrix target = y;
  const auto l1 = nn::mse_loss(tr1.output(), target);
  const auto l2 = nn::mse_loss(tr2.output(), target);
  if (!std::isfinite(l1.value) || !std::isfinite(l2.value)) throw NumericError("TwinCritic::regress: non-finite loss");
  if (per_sample) {
    *per_sample = 0.5 * ((tr1.output() - target).array().square() + (tr2.output() - target).array().square()).matrix();
  }
  nn::adam_step(q1_, q1_.backward(tr1, l1.grad), adam1_, lr);
  nn::adam_step(q2_, q2_.backward(tr2, l2.grad), adam2_, lr);
  return 0.5 * (l1.value + l2.value);
}

Matrix TwinCritic::q1_input_grad(const Matrix& x, double* mean_q1) const {
  const auto tr = q1_.trace(x);
  if (mean_q1) *mean_q1 = tr.output().mean();
  return q1_.backward_input(tr, Matrix::Ones(1, x.cols()));
}

void TwinCritic::soft_update(double tau) {
  nn::soft_update(t1_, q1_, tau);
  nn::soft_update(t2_, q2_, tau);
}

// --- TD3Agent ----------------------------------------------------------------

Matrix AllOnesMask::masks(const Matrix&, const Matrix& a) const { return Matrix::Ones(a.rows(), a.cols()); }

TD3Agent::TD3Agent(int state_dim, const Vector& low, const Vector& high, TD3Config config, Rng& init_rng)
    : config_(std::move(config)), state_dim_(state_dim), action_dim_(static_cast<int>(low.size())) {
  if (!(config_.gamma > 0.0 && config_.gamma <= 1.0) && config_.gamma != 0.0) {
    throw ContractError("TD3Agent: gamma must lie in [0, 1]");
  }
  if (config_.exploration_noise < 0 || config_.target_noise < 0 || config_.noise_clip < 0) {
    throw ContractError("TD3Agent: noise parameters must be non-negative");
  }
  if (config_.policy_delay < 1) throw ContractError("TD3Agent: policy_delay must be >= 1");
  actor_ = Actor(state_dim, low, high, config_.hidden, init_rng);
  const int critic_in = state_dim + (config_.mask_input ? 2 : 1) * action_dim_;
  critics_ = TwinCritic(critic_in, config_.hidden, init_rng);
}

Vector TD3Agent::act(const Vector& s, ActMode mode, Rng& rng) const {
  if (mode == ActMode::Warmup) return uniform_action(actor_.low(), actor_.high(), rng);
  Vector a = actor_.act(Matrix(s)).col(0);
  if (mode == ActMode::Explore && config_.exploration_noise > 0.0) {
    for (Eigen::Index i = 0; i < a.size(); ++i) a(i) += rng.normal(0.0, config_.exploration_noise);
  }
  return a.cwiseMax(actor_.low()).cwiseMin(actor_.high());
}

Matrix TD3Agent::smoothed_target_action(const Matrix& s_next, Rng& rng) const {
  Matrix a = actor_.act_target(s_next);
  if (config_.target_noise > 0.0) {
    for (Eigen::Index c = 0; c < a.cols(); ++c)
      for (Eigen::Index r = 0; r < a.rows(); ++r)
        a(r, c) += std::clamp(rng.normal(0.0, config_.target_noise), -config_.noise_clip, config_.noise_clip);
  }
  return clip_to_box(a, actor_.low(), actor_.high());
}

Matrix TD3Agent::current_masks(const Matrix& s, const Matrix& a) const {
  if (mask_source_) return mask_source_->masks(s, a);
  return Matrix::Ones(a.rows(), a.cols());
}

Matrix TD3Agent::critic_input(const Matrix& s, const Matrix& a) const {
  if (!config_.mask_input) return stack_rows(s, a);
  return masked_critic_input(s, a, current_masks(s, a));
}

RowVector TD3Agent::td3_target(const RowVector& r, const RowVector& not_terminal, const Matrix& s_next,
                               const Matrix& a_tilde) const {
  const RowVector q = critics_.target_min(critic_input(s_next, a_tilde));
  return r + config_.gamma * not_terminal.cwiseProduct(q);
}

UpdateDiagnostics TD3Agent::update(const Batch& batch, Rng& rng, std::int64_t step) {
  if (batch.size() == 0) throw ContractError("TD3Agent::update: empty batch");
  UpdateDiagnostics diag;

  const Matrix a_tilde = smoothed_target_action(batch.s_next, rng);
  const RowVector y = td3_target(batch.r, batch.not_terminal, batch.s_next, a_tilde);

  Matrix x;
  if (config_.mask_input) {
    const Matrix m = current_masks(batch.s, batch.a);
    const RowVector card = m.colwise().sum();
    diag.mean_mask_cardinality = card.mean();
    diag.degenerate_masks = static_cast<int>((card.array() == 0.0).count());
    x = masked_critic_input(batch.s, batch.a, m);
  } else {
    x = stack_rows(batch.s, batch.a);
  }
  try {
    diag.critic_loss = critics_.regress(x, y, config_.lr);
  } catch (const NumericError& e) {
    std::ostringstream msg;
    msg << "TD3 update at step " << step << ": " << e.what();
    throw NumericError(msg.str());
  }
  ++updates_;

  if (updates_ % config_.policy_delay == 0) {
    const Matrix a_pi = actor_.act(batch.s);
    Matrix dq_da;
    if (config_.mask_input) {
      const Matrix m = current_masks(batch.s, a_pi);
      const Matrix g = critics_.q1_input_grad(masked_critic_input(batch.s, a_pi, m), &diag.actor_objective);
      dq_da = g.middleRows(state_dim_, action_dim_).cwiseProduct(m);
    } else {
      dq_da = critics_.q1_input_grad(stack_rows(batch.s, a_pi), &diag.actor_objective).bottomRows(action_dim_);
    }
    actor_.ascend(batch.s, dq_da, config_.lr);
    critics_.soft_update(config_.tau);
    actor_.soft_update(config_.tau);
    ++actor_updates_;
    diag.actor_updated = true;
  }
  return diag;
}

}  // namespace swar::rl
