#include "swar/agents.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace swar::rl {
namespace {

nn::DenseNet make_regressor(int in, const std::vector<int>& hidden, int out, Rng& rng) {
  std::vector<int> sizes{in};
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(out);
  return nn::DenseNet::mlp(std::span<const int>(sizes), nn::Activation::Relu, nn::Activation::Identity, rng);
}

int selector_width(int state_dim, int action_dim, SelectorInput mode) {
  return mode == SelectorInput::StateAction ? state_dim + action_dim : state_dim;
}

void fill_mask_stats(UpdateDiagnostics& diag, const Matrix& masks) {
  const RowVector card = masks.colwise().sum();
  diag.mean_mask_cardinality = card.mean();
  diag.degenerate_masks = static_cast<int>((card.array() == 0.0).count());
}

}  // namespace

Matrix selector_input(const Matrix& s, const Matrix& a, SelectorInput mode) {
  return mode == SelectorInput::StateAction ? stack_rows(s, a) : s;
}

// --- TD-SWAR -------------------------------------------------------------------

TDSWARAgent::TDSWARAgent(int state_dim, const Vector& low, const Vector& high, TDSWARConfig config,
                         Rng& init_rng)
    : config_(std::move(config)), state_dim_(state_dim), action_dim_(static_cast<int>(low.size())) {
  actor_ = Actor(state_dim, low, high, config_.td3.hidden, init_rng);
  critics_ = TwinCritic(state_dim + 2 * action_dim_, config_.td3.hidden, init_rng);
  baselines_ = TwinCritic(state_dim + action_dim_, config_.td3.hidden, init_rng);
  selector_ = selection::SelectorModel(selector_width(state_dim, action_dim_, config_.selector_input), action_dim_,
                                       config_.selector, init_rng);
}

Vector TDSWARAgent::act(const Vector& s, ActMode mode, Rng& rng) const {
  if (mode == ActMode::Warmup) return uniform_action(actor_.low(), actor_.high(), rng);
  Vector a = actor_.act(Matrix(s)).col(0);
  if (mode == ActMode::Explore && config_.td3.exploration_noise > 0.0) {
    for (Eigen::Index i = 0; i < a.size(); ++i) a(i) += rng.normal(0.0, config_.td3.exploration_noise);
  }
  return a.cwiseMax(actor_.low()).cwiseMin(actor_.high());
}

Matrix TDSWARAgent::sampled_masks(const Matrix& s, const Matrix& a, Rng& rng) const {
  return selection::sample_masks(selection::select_probs(selector_, selector_input(s, a, config_.selector_input)), rng);
}

std::optional<Matrix> TDSWARAgent::evaluation_masks(const Matrix& s, const Matrix& a) const {
  return selection::threshold_masks(selection::select_probs(selector_, selector_input(s, a, config_.selector_input)));
}

std::optional<selection::CurriculumValues> TDSWARAgent::curriculum(std::int64_t) const {
  return selection::curriculum_at(config_.curriculum, selector_updates_);
}

UpdateDiagnostics TDSWARAgent::update(const Batch& batch, Rng& rng, std::int64_t step) {
  if (batch.size() == 0) throw ContractError("TDSWARAgent::update: empty batch");
  const auto& cfg = config_.td3;
  UpdateDiagnostics diag;
  try {
    // Targets: masked critics vs unmasked baselines on the smoothed next action.
    Matrix a_tilde = actor_.act_target(batch.s_next);
    if (cfg.target_noise > 0.0) {
      for (Eigen::Index c = 0; c < a_tilde.cols(); ++c)
        for (Eigen::Index r = 0; r < a_tilde.rows(); ++r)
          a_tilde(r, c) += std::clamp(rng.normal(0.0, cfg.target_noise), -cfg.noise_clip, cfg.noise_clip);
    }
    for (Eigen::Index c = 0; c < a_tilde.cols(); ++c)
      a_tilde.col(c) = a_tilde.col(c).cwiseMax(actor_.low()).cwiseMin(actor_.high());

    const Matrix m_next = sampled_masks(batch.s_next, a_tilde, rng);
    const RowVector discount = cfg.gamma * batch.not_terminal;
    const RowVector y_c =
        batch.r + discount.cwiseProduct(critics_.target_min(masked_critic_input(batch.s_next, a_tilde, m_next)));
    const RowVector y_b = batch.r + discount.cwiseProduct(baselines_.target_min(stack_rows(batch.s_next, a_tilde)));

    // Regression of both pairs; per-sample losses come from the pre-step predictions.
    const Matrix sel_in = selector_input(batch.s, batch.a, config_.selector_input);
    const Matrix probs = selection::select_probs(selector_, sel_in);
    const Matrix m = selection::sample_masks(probs, rng);
    fill_mask_stats(diag, m);
    RowVector l_c, l_b;
    diag.critic_loss = critics_.regress(masked_critic_input(batch.s, batch.a, m), y_c, cfg.lr, &l_c);
    diag.baseline_loss = baselines_.regress(stack_rows(batch.s, batch.a), y_b, cfg.lr, &l_b);

    // Selector: reinforce masks whose critic fits better than the baseline.
    const auto cv = selection::curriculum_at(config_.curriculum, selector_updates_);
    const selection::SelectionPenaltyParams pen{cv.lambda, cv.p_r, action_dim_, config_.penalty_mode};
    RowVector rewards = selection::selector_rewards(l_b, l_c, m, pen);
    diag.mean_reward = rewards.mean();
    if (config_.center_rewards) rewards.array() -= diag.mean_reward;
    selection::selector_update(selector_, sel_in, m, rewards, config_.selector.lr, config_.logit_decay);
    ++selector_updates_;
  } catch (const NumericError& e) {
    std::ostringstream msg;
    msg << "TD-SWAR update at step " << step << ": " << e.what();
    throw NumericError(msg.str());
  }
  ++updates_;

  if (updates_ % cfg.policy_delay == 0) {
    const Matrix a_pi = actor_.act(batch.s);
    const Matrix m_eval = *evaluation_masks(batch.s, a_pi);
    const Matrix g = critics_.q1_input_grad(masked_critic_input(batch.s, a_pi, m_eval), &diag.actor_objective);
    actor_.ascend(batch.s, g.middleRows(state_dim_, action_dim_).cwiseProduct(m_eval), cfg.lr);
    critics_.soft_update(cfg.tau);
    baselines_.soft_update(cfg.tau);
    actor_.soft_update(cfg.tau);
    diag.actor_updated = true;
  }
  return diag;
}

// --- Dyn-SWAR selector ---------------------------------------------------------

DynSelectorResult dyn_selector_train(const ReplayBuffer& warmup, const DynSelectorConfig& config, Rng& rng) {
  const auto n = warmup.size();
  if (n < static_cast<std::size_t>(config.batch_size) || config.batch_size <= 0) {
    throw ContractError("dyn_selector_train: warm-up buffer holds " + std::to_string(n) +
                        " transitions, fewer than the batch size " + std::to_string(config.batch_size));
  }
  const int s_dim = warmup.state_dim();
  const int a_dim = warmup.action_dim();
  const Batch data = warmup.all();

  DynSelectorResult result;
  result.selector = selection::SelectorModel(selector_width(s_dim, a_dim, config.selector_input), a_dim,
                                             config.selector, rng);
  nn::DenseNet critic = make_regressor(s_dim + 2 * a_dim, config.predictor_hidden, s_dim, rng);
  nn::DenseNet baseline = make_regressor(s_dim + a_dim, config.predictor_hidden, s_dim, rng);
  nn::AdamState critic_adam(critic);
  nn::AdamState baseline_adam(baseline);

  const auto per_epoch = static_cast<std::int64_t>(n / static_cast<std::size_t>(config.batch_size));
  const std::int64_t total = per_epoch * config.epochs;
  selection::Curriculum curriculum = config.curriculum;
  curriculum.total_steps =
      std::max<std::int64_t>(1, static_cast<std::int64_t>(std::llround(config.curriculum_fraction * total)));

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto b = config.batch_size;
  Matrix s(s_dim, b), a(a_dim, b), s_next(s_dim, b);

  std::int64_t step = 0;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng.engine());
    for (std::int64_t k = 0; k < per_epoch; ++k, ++step) {
      for (int j = 0; j < b; ++j) {
        const auto idx = static_cast<Eigen::Index>(order[static_cast<std::size_t>(k * b + j)]);
        s.col(j) = data.s.col(idx);
        a.col(j) = data.a.col(idx);
        s_next.col(j) = data.s_next.col(idx);
      }
      const Matrix sel_in = selector_input(s, a, config.selector_input);
      const Matrix m = selection::sample_masks(selection::select_probs(result.selector, sel_in), rng);

      const auto c_trace = critic.trace(masked_critic_input(s, a, m));
      const RowVector l_c = nn::per_sample_mse(c_trace.output(), s_next);
      const auto c_loss = nn::mse_loss(c_trace.output(), s_next);
      nn::adam_step(critic, critic.backward(c_trace, c_loss.grad), critic_adam, config.predictor_lr);

      const auto b_trace = baseline.trace(stack_rows(s, a));
      const RowVector l_b = nn::per_sample_mse(b_trace.output(), s_next);
      const auto b_loss = nn::mse_loss(b_trace.output(), s_next);
      nn::adam_step(baseline, baseline.backward(b_trace, b_loss.grad), baseline_adam, config.predictor_lr);

      if (!std::isfinite(c_loss.value) || !std::isfinite(b_loss.value)) {
        throw NumericError("dyn_selector_train: non-finite loss at update " + std::to_string(step));
      }
      const auto cv = selection::curriculum_at(curriculum, step);
      const selection::SelectionPenaltyParams pen{cv.lambda, cv.p_r, a_dim, config.penalty_mode};
      selection::selector_update(result.selector, sel_in, m, selection::selector_rewards(l_b, l_c, m, pen),
                                 config.selector.lr);
      result.final_critic_loss = c_loss.value;
      result.final_baseline_loss = b_loss.value;
    }
  }
  result.updates = step;
  return result;
}

FrozenSelectorMask::FrozenSelectorMask(std::shared_ptr<const selection::SelectorModel> selector, SelectorInput input)
    : selector_(std::move(selector)), input_(input) {
  if (!selector_) throw ContractError("FrozenSelectorMask: null selector");
}

Matrix FrozenSelectorMask::masks(const Matrix& s, const Matrix& a) const {
  return selection::threshold_masks(selection::select_probs(*selector_, selector_input(s, a, input_)));
}

// --- Dyn-SWAR agent --------------------------------------------------------------

namespace {

TD3Config with_mask_input(TD3Config c) {
  c.mask_input = true;
  return c;
}

}  // namespace

DynSWARAgent::DynSWARAgent(int state_dim, const Vector& low, const Vector& high, DynSWARConfig config, Rng& init_rng)
    : config_(std::move(config)), core_(state_dim, low, high, with_mask_input(config_.td3), init_rng) {}

DynSWARAgent::DynSWARAgent(int state_dim, const Vector& low, const Vector& high, DynSWARConfig config,
                           std::shared_ptr<const selection::SelectorModel> frozen, Rng& init_rng)
    : DynSWARAgent(state_dim, low, high, std::move(config), init_rng) {
  install(std::move(frozen));
}

void DynSWARAgent::install(std::shared_ptr<const selection::SelectorModel> selector) {
  frozen_ = std::move(selector);
  core_.set_mask_source(std::make_shared<FrozenSelectorMask>(frozen_, config_.selector.selector_input));
}

void DynSWARAgent::on_warmup_complete(const ReplayBuffer& buffer, Rng& rng) {
  if (frozen_) return;
  trained_ = dyn_selector_train(buffer, config_.selector, rng);
  install(std::make_shared<const selection::SelectorModel>(trained_->selector));
}

UpdateDiagnostics DynSWARAgent::update(const Batch& batch, Rng& rng, std::int64_t step) {
  if (!frozen_) throw ContractError("DynSWARAgent::update: selector has not been trained");
  return core_.update(batch, rng, step);
}

std::optional<Matrix> DynSWARAgent::evaluation_masks(const Matrix& s, const Matrix& a) const {
  if (!frozen_) return std::nullopt;
  return core_.mask_source()->masks(s, a);
}

std::optional<selection::CurriculumValues> DynSWARAgent::curriculum(std::int64_t) const {
  if (!trained_) return std::nullopt;
  return selection::curriculum_at(config_.selector.curriculum, config_.selector.curriculum.total_steps);
}

selection::Mask combined_mask(const selection::Mask& dyn_mask, const selection::Mask& reward_mask) {
  return selection::mask_or(dyn_mask, reward_mask);
}

}  // namespace swar::rl
