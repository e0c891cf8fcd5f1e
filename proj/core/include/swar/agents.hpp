#pragma once

// Action-selecting agents layered on TD3:
//  - TDSWARAgent trains its selector inside temporal-difference learning from
//    the TD-error gap between a masked critic pair and an unmasked baseline pair.
//  - DynSWARAgent trains its selector on one-step dynamics prediction over the
//    warm-up buffer, then freezes it and masks every critic input with it.

#include <memory>

#include "swar/selector.hpp"
#include "swar/td3.hpp"

namespace swar::rl {

enum class SelectorInput {
  StateAction,  // selector sees s ++ a
  StateOnly,    // selector sees s
};

/// Builds the selector input for a batch of (s, a) columns.
Matrix selector_input(const Matrix& s, const Matrix& a, SelectorInput mode);

struct TDSWARConfig {
  TD3Config td3;
  selection::SelectorConfig selector{{100, 100}, 1e-4};
  selection::Curriculum curriculum{};  // total_steps counts selector updates
  selection::PenaltyMode penalty_mode = selection::PenaltyMode::Count;
  SelectorInput selector_input = SelectorInput::StateAction;
  bool center_rewards = true;
  double logit_decay = 1e-3;
};

class TDSWARAgent final : public Agent {
 public:
  TDSWARAgent(int state_dim, const Vector& low, const Vector& high, TDSWARConfig config, Rng& init_rng);

  std::string name() const override { return "td-swar"; }
  Vector act(const Vector& s, ActMode mode, Rng& rng) const override;
  /// One TD-SWAR step; `step` indexes the curriculum (selector updates so far
  /// are counted internally).
  UpdateDiagnostics update(const Batch& batch, Rng& rng, std::int64_t step) override;
  std::optional<Matrix> evaluation_masks(const Matrix& s, const Matrix& a) const override;
  std::optional<selection::CurriculumValues> curriculum(std::int64_t step) const override;

  selection::SelectorModel& selector() { return selector_; }
  const selection::SelectorModel& selector() const { return selector_; }
  const TwinCritic& critics() const { return critics_; }
  const TwinCritic& baselines() const { return baselines_; }
  const Actor& actor() const { return actor_; }
  std::int64_t selector_updates() const { return selector_updates_; }
  TDSWARConfig& config() { return config_; }

 private:
  Matrix sampled_masks(const Matrix& s, const Matrix& a, Rng& rng) const;

  TDSWARConfig config_;
  int state_dim_;
  int action_dim_;
  Actor actor_;
  TwinCritic critics_;
  TwinCritic baselines_;
  selection::SelectorModel selector_;
  std::int64_t updates_ = 0;
  std::int64_t selector_updates_ = 0;
};

struct DynSelectorConfig {
  int epochs = 50;
  int batch_size = 128;
  selection::SelectorConfig selector{{100, 100}, 1e-4};
  std::vector<int> predictor_hidden{200, 200};
  double predictor_lr = 1e-3;
  selection::Curriculum curriculum{};
  /// Fraction of selector updates over which the curriculum anneals.
  double curriculum_fraction = 0.8;
  selection::PenaltyMode penalty_mode = selection::PenaltyMode::Proportion;
  SelectorInput selector_input = SelectorInput::StateAction;
};

struct DynSelectorResult {
  selection::SelectorModel selector;
  double final_critic_loss = 0.0;
  double final_baseline_loss = 0.0;
  std::int64_t updates = 0;
};

/// Trains a dynamics critic on (s, m * a, m) -> s' and a dynamics baseline on
/// (s, a) -> s' jointly with the selector, rewarding masks by the
/// baseline/critic loss gap minus the curriculum penalty.
DynSelectorResult dyn_selector_train(const ReplayBuffer& warmup, const DynSelectorConfig& config, Rng& rng);

/// Thresholded masks of a frozen selector.
class FrozenSelectorMask final : public MaskSource {
 public:
  FrozenSelectorMask(std::shared_ptr<const selection::SelectorModel> selector, SelectorInput input);
  Matrix masks(const Matrix& s, const Matrix& a) const override;
  const selection::SelectorModel& selector() const { return *selector_; }

 private:
  std::shared_ptr<const selection::SelectorModel> selector_;
  SelectorInput input_;
};

struct DynSWARConfig {
  TD3Config td3;
  DynSelectorConfig selector;
};

class DynSWARAgent final : public Agent {
 public:
  /// Selector is trained from the warm-up buffer in on_warmup_complete.
  DynSWARAgent(int state_dim, const Vector& low, const Vector& high, DynSWARConfig config, Rng& init_rng);
  /// Uses an already-trained selector; on_warmup_complete leaves it untouched.
  DynSWARAgent(int state_dim, const Vector& low, const Vector& high, DynSWARConfig config,
               std::shared_ptr<const selection::SelectorModel> frozen, Rng& init_rng);

  std::string name() const override { return "dyn-swar"; }
  Vector act(const Vector& s, ActMode mode, Rng& rng) const override { return core_.act(s, mode, rng); }
  UpdateDiagnostics update(const Batch& batch, Rng& rng, std::int64_t step) override;
  void on_warmup_complete(const ReplayBuffer& buffer, Rng& rng) override;
  std::optional<Matrix> evaluation_masks(const Matrix& s, const Matrix& a) const override;
  std::optional<selection::CurriculumValues> curriculum(std::int64_t step) const override;

  bool has_selector() const { return static_cast<bool>(frozen_); }
  const selection::SelectorModel& selector() const { return *frozen_; }
  const TD3Agent& core() const { return core_; }
  const DynSelectorResult* training_result() const { return trained_ ? &*trained_ : nullptr; }

 private:
  void install(std::shared_ptr<const selection::SelectorModel> selector);

  DynSWARConfig config_;
  TD3Agent core_;
  std::shared_ptr<const selection::SelectorModel> frozen_;
  std::optional<DynSelectorResult> trained_;
};

/// OR-combination of a dynamics-derived mask with a reward-derived mask.
selection::Mask combined_mask(const selection::Mask& dyn_mask, const selection::Mask& reward_mask);

}  // namespace swar::rl
