#pragma once

// Physics-engine-free episodic environments and the redundant-action wrapper.

#include <array>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "swar/nn.hpp"
#include "swar/rng.hpp"
#include "swar/selector.hpp"

namespace swar::envs {

using nn::Vector;

struct EnvSpec {
  int state_dim = 0;
  int action_dim = 0;
  Vector action_low;
  Vector action_high;
  int horizon = 0;
};

struct Transition {
  Vector s;
  Vector a;
  double r = 0.0;
  Vector s_next;
  bool done = false;      // episode ended (horizon or terminal)
  bool terminal = false;  // true environment terminal; horizon cuts are not
};

struct StepResult {
  Vector observation;
  double reward = 0.0;
  bool done = false;
  bool terminal = false;
};

class Env {
 public:
  virtual ~Env() = default;
  virtual const EnvSpec& spec() const = 0;
  virtual std::string name() const = 0;
  virtual Vector reset(Rng& rng) = 0;
  virtual StepResult step(const Vector& action) = 0;
  virtual std::unique_ptr<Env> clone() const = 0;
};

// --- Pendulum swing-up -------------------------------------------------------

struct PendulumState {
  double theta = 0.0;      // 0 is upright
  double theta_dot = 0.0;
};

struct PendulumParams {
  double g = 10.0;
  double m = 1.0;
  double l = 1.0;
  double dt = 0.05;
  double max_torque = 2.0;
  double max_speed = 8.0;
  int horizon = 200;
};

struct PendulumStep {
  PendulumState state;
  double reward = 0.0;
};

/// Wraps an angle into [-pi, pi).
double wrap_angle(double theta);

/// Semi-implicit Euler step; the reward is charged on the pre-step state.
PendulumStep pendulum_step(const PendulumState& state, double torque, const PendulumParams& p = {});
Vector pendulum_observation(const PendulumState& state);
/// 0.5 * theta_dot^2 + (3g / 2l) cos(theta), conserved by the continuous dynamics when u = 0.
double pendulum_energy(const PendulumState& state, const PendulumParams& p = {});

class Pendulum final : public Env {
 public:
  explicit Pendulum(PendulumParams params = {});
  const EnvSpec& spec() const override { return spec_; }
  std::string name() const override { return "pendulum"; }
  Vector reset(Rng& rng) override;
  StepResult step(const Vector& action) override;
  std::unique_ptr<Env> clone() const override { return std::make_unique<Pendulum>(*this); }

  const PendulumState& state() const { return state_; }
  void set_state(const PendulumState& s) { state_ = s; }

 private:
  PendulumParams params_;
  EnvSpec spec_;
  PendulumState state_;
  int t_ = 0;
};

// --- FourRewardMaze ------------------------------------------------------------

struct MazeParams {
  double step_scale = 0.1;
  double site_radius = 0.15;
  double site_offset = 0.8;  // sites at (+-offset, +-offset)
  int horizon = 32;
};

struct MazeState {
  Eigen::Vector2d position = Eigen::Vector2d::Zero();
  std::array<bool, 4> collected{};
  int t = 0;
};

struct MazeStep {
  double reward = 0.0;
  bool done = false;
};

std::array<Eigen::Vector2d, 4> maze_sites(const MazeParams& p = {});

/// Moves by step_scale * clip(a), clamps to the box, collects every
/// uncollected site within site_radius of the new position.
MazeStep maze_step(MazeState& state, const Eigen::Vector2d& action, const MazeParams& p = {});

class FourRewardMaze final : public Env {
 public:
  explicit FourRewardMaze(MazeParams params = {});
  const EnvSpec& spec() const override { return spec_; }
  std::string name() const override { return "maze"; }
  Vector reset(Rng& rng) override;
  StepResult step(const Vector& action) override;
  std::unique_ptr<Env> clone() const override { return std::make_unique<FourRewardMaze>(*this); }

  const MazeState& state() const { return state_; }
  MazeState& state() { return state_; }

 private:
  MazeParams params_;
  EnvSpec spec_;
  MazeState state_;
};

// --- Redundant action wrapper ------------------------------------------------

/// Appends n_redundant action dimensions in [-1, 1] that the base
/// environment never sees.
class RedundantWrapper final : public Env {
 public:
  RedundantWrapper(std::unique_ptr<Env> base, int n_redundant);
  RedundantWrapper(const RedundantWrapper& other);

  const EnvSpec& spec() const override { return spec_; }
  std::string name() const override { return base_->name(); }
  Vector reset(Rng& rng) override;
  StepResult step(const Vector& action) override;
  std::unique_ptr<Env> clone() const override { return std::make_unique<RedundantWrapper>(*this); }

  /// 1 on base dimensions, 0 on injected ones.
  const selection::Mask& ground_truth_mask() const { return truth_; }
  int n_redundant() const { return n_red_; }
  Env& base() { return *base_; }
  const Vector& observation() const { return obs_; }

 private:
  std::unique_ptr<Env> base_;
  int n_red_;
  EnvSpec spec_;
  selection::Mask truth_;
  Vector obs_;
};

/// Steps the wrapper and packages (s, a, r, s', done).
Transition wrapped_step(RedundantWrapper& env, const Vector& action);

/// "pendulum" or "maze", wrapped with n_redundant injected dimensions.
std::unique_ptr<RedundantWrapper> make_env(const std::string& name, int n_redundant);
bool is_known_env(const std::string& name);

/// Columns: step, s1..sn, a1..am, r, done.
void write_trace_csv(const std::vector<Transition>& trace, const std::filesystem::path& path);

}  // namespace swar::envs
