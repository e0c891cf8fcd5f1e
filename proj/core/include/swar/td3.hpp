#pragma once

// Twin-delayed deterministic policy gradient: replay buffer, actor, twin
// critics with target copies, and the agent interface the experiment runner
// drives.

#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "swar/envs.hpp"
#include "swar/nn.hpp"
#include "swar/rng.hpp"
#include "swar/selector.hpp"

namespace swar::rl {

using nn::Matrix;
using nn::RowVector;
using nn::Vector;

struct TD3Config {
  double gamma = 0.99;
  double tau = 0.005;
  int policy_delay = 2;
  double exploration_noise = 0.1;
  double target_noise = 0.2;
  double noise_clip = 0.5;
  int batch_size = 256;
  double lr = 3e-4;
  int warmup_steps = 25000;
  std::vector<int> hidden{256, 256};
  /// Append a mask block to the critic input: [s, m * a, m].
  bool mask_input = false;
};

struct Batch {
  Matrix s;             // state_dim x n
  Matrix a;             // action_dim x n
  RowVector r;          // n
  Matrix s_next;        // state_dim x n
  RowVector not_terminal;  // 0 at true terminals, 1 otherwise
  Eigen::Index size() const { return r.size(); }
};

/// Fixed-capacity FIFO ring of transitions.
class ReplayBuffer {
 public:
  ReplayBuffer(int state_dim, int action_dim, std::size_t capacity);

  void push(const envs::Transition& t);
  /// Uniform sampling with replacement; throws on an empty buffer.
  Batch sample(std::size_t n, Rng& rng) const;
  /// Every stored transition, oldest first.
  Batch all() const;

  std::size_t size() const { return size_; }
  std::size_t capacity() const { return capacity_; }
  int state_dim() const { return static_cast<int>(s_.rows()); }
  int action_dim() const { return static_cast<int>(a_.rows()); }
  /// Index of the i-th oldest item in storage order.
  std::size_t slot(std::size_t i) const;
  double reward_at(std::size_t slot) const { return r_(static_cast<Eigen::Index>(slot)); }

 private:
  Batch gather(const std::vector<std::size_t>& slots) const;

  std::size_t capacity_;
  std::size_t size_ = 0;
  std::size_t cursor_ = 0;
  Matrix s_, a_, s_next_;
  RowVector r_, not_terminal_;
};

/// Deterministic policy with tanh output rescaled to the action box.
class Actor {
 public:
  Actor() = default;
  Actor(int state_dim, const Vector& low, const Vector& high, const std::vector<int>& hidden, Rng& rng);

  Matrix act(const Matrix& s) const;
  Matrix act_target(const Matrix& s) const;
  /// One Adam step along d Q / d a (ascent), averaged over the batch.
  void ascend(const Matrix& s, const Matrix& dq_da, double lr);
  void soft_update(double tau) { nn::soft_update(target_, net_, tau); }

  const Vector& low() const { return low_; }
  const Vector& high() const { return high_; }
  const nn::DenseNet& net() const { return net_; }
  const nn::DenseNet& target() const { return target_; }

 private:
  Matrix rescale(const Matrix& y) const;

  nn::DenseNet net_, target_;
  nn::AdamState adam_;
  Vector low_, high_, center_, half_;
};

/// Two Q networks with target copies.
class TwinCritic {
 public:
  TwinCritic() = default;
  TwinCritic(int input_dim, const std::vector<int>& hidden, Rng& rng);

  /// min(Q1', Q2') on target networks.
  RowVector target_min(const Matrix& x) const;
  RowVector q1(const Matrix& x) const;
  /// Regresses both critics to y; returns the mean of the two MSE losses.
  /// If per_sample is given it receives the per-column squared error
  /// averaged over the twins, measured before the step.
  double regress(const Matrix& x, const RowVector& y, double lr, RowVector* per_sample = nullptr);
  /// d Q1 / d x per column; optionally reports mean Q1 over the batch.
  Matrix q1_input_grad(const Matrix& x, double* mean_q1 = nullptr) const;
  void soft_update(double tau);

  const nn::DenseNet& net(int k) const { return k == 0 ? q1_ : q2_; }
  const nn::DenseNet& target(int k) const { return k == 0 ? t1_ : t2_; }
  nn::DenseNet& target(int k) { return k == 0 ? t1_ : t2_; }

 private:
  nn::DenseNet q1_, q2_, t1_, t2_;
  nn::AdamState adam1_, adam2_;
};

/// Supplies 0/1 masks over action dimensions for critic inputs.
class MaskSource {
 public:
  virtual ~MaskSource() = default;
  virtual Matrix masks(const Matrix& s, const Matrix& a) const = 0;
};

class AllOnesMask final : public MaskSource {
 public:
  Matrix masks(const Matrix& s, const Matrix& a) const override;
};

struct UpdateDiagnostics {
  static constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
  double critic_loss = kNaN;
  double actor_objective = kNaN;  // mean Q1 of the policy action
  bool actor_updated = false;
  double baseline_loss = kNaN;
  double mean_reward = kNaN;          // selector reward
  double mean_mask_cardinality = kNaN;
  int degenerate_masks = 0;           // masks with cardinality 0
};

enum class ActMode { Greedy, Explore, Warmup };

/// Interface the experiment runner drives.
class Agent {
 public:
  virtual ~Agent() = default;
  virtual std::string name() const = 0;
  virtual Vector act(const Vector& s, ActMode mode, Rng& rng) const = 0;
  virtual UpdateDiagnostics update(const Batch& batch, Rng& rng, std::int64_t step) = 0;
  /// Called once when the warm-up phase ends, before the first update.
  virtual void on_warmup_complete(const ReplayBuffer&, Rng&) {}
  /// Deterministic evaluation masks, for agents that select actions.
  virtual std::optional<Matrix> evaluation_masks(const Matrix&, const Matrix&) const { return std::nullopt; }
  virtual std::optional<selection::CurriculumValues> curriculum(std::int64_t) const { return std::nullopt; }
};

Vector uniform_action(const Vector& low, const Vector& high, Rng& rng);

class TD3Agent : public Agent {
 public:
  TD3Agent(int state_dim, const Vector& low, const Vector& high, TD3Config config, Rng& init_rng);

  std::string name() const override { return "td3"; }
  Vector act(const Vector& s, ActMode mode, Rng& rng) const override;
  UpdateDiagnostics update(const Batch& batch, Rng& rng, std::int64_t step) override;

  /// clip(pi'(s') + clip(eps, -c, c), bounds), eps ~ N(0, target_noise^2).
  Matrix smoothed_target_action(const Matrix& s_next, Rng& rng) const;
  /// r + gamma * not_terminal * min(Q1', Q2') at (s', a_tilde).
  RowVector td3_target(const RowVector& r, const RowVector& not_terminal, const Matrix& s_next,
                       const Matrix& a_tilde) const;
  /// [s, a] or, with mask_input, [s, m * a, m].
  Matrix critic_input(const Matrix& s, const Matrix& a) const;

  void set_mask_source(std::shared_ptr<const MaskSource> source) { mask_source_ = std::move(source); }
  const MaskSource* mask_source() const { return mask_source_.get(); }

  const TD3Config& config() const { return config_; }
  const Actor& actor() const { return actor_; }
  const TwinCritic& critics() const { return critics_; }
  std::int64_t update_count() const { return updates_; }
  std::int64_t actor_update_count() const { return actor_updates_; }

 protected:
  Matrix current_masks(const Matrix& s, const Matrix& a) const;

  TD3Config config_;
  int state_dim_;
  int action_dim_;
  Actor actor_;
  TwinCritic critics_;
  std::shared_ptr<const MaskSource> mask_source_;
  std::int64_t updates_ = 0;
  std::int64_t actor_updates_ = 0;
};

/// Concatenates [s; a] (and optionally [s; m * a; m]).
Matrix stack_rows(const Matrix& top, const Matrix& bottom);
Matrix masked_critic_input(const Matrix& s, const Matrix& a, const Matrix& masks);

}  // namespace swar::rl
