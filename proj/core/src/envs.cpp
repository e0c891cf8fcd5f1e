#include "swar/envs.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

namespace swar::envs {

double wrap_angle(double theta) {
  const double two_pi = 2.0 * std::numbers::pi;
  double x = std::fmod(theta + std::numbers::pi, two_pi);
  if (x < 0.0) x += two_pi;
  return x - std::numbers::pi;
}

PendulumStep pendulum_step(const PendulumState& state, double torque, const PendulumParams& p) {
  if (!std::isfinite(state.theta) || !std::isfinite(state.theta_dot) || !std::isfinite(torque)) {
    throw NumericError("pendulum_step: non-finite state or action");
  }
  const double u = std::clamp(torque, -p.max_torque, p.max_torque);
  const double th = wrap_angle(state.theta);
  const double cost = th * th + 0.1 * state.theta_dot * state.theta_dot + 0.001 * u * u;

  const double accel = 3.0 * p.g / (2.0 * p.l) * std::sin(state.theta) + 3.0 / (p.m * p.l * p.l) * u;
  double theta_dot = state.theta_dot + accel * p.dt;
  theta_dot = std::clamp(theta_dot, -p.max_speed, p.max_speed);
  const double theta = state.theta + theta_dot * p.dt;
  return {{theta, theta_dot}, -cost};
}

Vector pendulum_observation(const PendulumState& state) {
  Vector o(3);
  o << std::cos(state.theta), std::sin(state.theta), state.theta_dot;
  return o;
}

double pendulum_energy(const PendulumState& state, const PendulumParams& p) {
  return 0.5 * state.theta_dot * state.theta_dot + 3.0 * p.g / (2.0 * p.l) * std::cos(state.theta);
}

Pendulum::Pendulum(PendulumParams params) : params_(params) {
  spec_.state_dim = 3;
  spec_.action_dim = 1;
  spec_.action_low = Vector::Constant(1, -params_.max_torque);
  spec_.action_high = Vector::Constant(1, params_.max_torque);
  spec_.horizon = params_.horizon;
}

Vector Pendulum::reset(Rng& rng) {
  state_.theta = rng.uniform(-std::numbers::pi, std::numbers::pi);
  state_.theta_dot = rng.uniform(-1.0, 1.0);
  t_ = 0;
  return pendulum_observation(state_);
}

StepResult Pendulum::step(const Vector& action) {
  if (action.size() != 1) throw ContractError("Pendulum::step: expected a 1-dim action");
  const auto next = pendulum_step(state_, action(0), params_);
  state_ = next.state;
  ++t_;
  return {pendulum_observation(state_), next.reward, t_ >= params_.horizon, false};
}

std::array<Eigen::Vector2d, 4> maze_sites(const MazeParams& p) {
  const double o = p.site_offset;
  return {Eigen::Vector2d(o, o), Eigen::Vector2d(-o, o), Eigen::Vector2d(-o, -o), Eigen::Vector2d(o, -o)};
}

MazeStep maze_step(MazeState& state, const Eigen::Vector2d& action, const MazeParams& p) {
  const Eigen::Vector2d a = action.cwiseMax(-1.0).cwiseMin(1.0);
  state.position = (state.position + p.step_scale * a).cwiseMax(-1.0).cwiseMin(1.0);
  MazeStep out;
  const auto sites = maze_sites(p);
  for (std::size_t k = 0; k < sites.size(); ++k) {
    if (!state.collected[k] && (state.position - sites[k]).norm() <= p.site_radius) {
      state.collected[k] = true;
      out.reward += 1.0;
    }
  }
  ++state.t;
  out.done = state.t >= p.horizon;
  return out;
}

FourRewardMaze::FourRewardMaze(MazeParams params) : params_(params) {
  spec_.state_dim = 2;
  spec_.action_dim = 2;
  spec_.action_low = Vector::Constant(2, -1.0);
  spec_.action_high = Vector::Constant(2, 1.0);
  spec_.horizon = params_.horizon;
}

Vector FourRewardMaze::reset(Rng& rng) {
  state_ = MazeState{};
  state_.position = Eigen::Vector2d(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
  return state_.position;
}

StepResult FourRewardMaze::step(const Vector& action) {
  if (action.size() != 2) throw ContractError("FourRewardMaze::step: expected a 2-dim action");
  const auto r = maze_step(state_, Eigen::Vector2d(action(0), action(1)), params_);
  return {state_.position, r.reward, r.done, false};
}

RedundantWrapper::RedundantWrapper(std::unique_ptr<Env> base, int n_redundant)
    : base_(std::move(base)), n_red_(n_redundant) {
  if (!base_) throw ContractError("RedundantWrapper: null base environment");
  if (n_red_ < 0) throw ContractError("RedundantWrapper: n_redundant must be >= 0");
  const auto& b = base_->spec();
  spec_ = b;
  spec_.action_dim = b.action_dim + n_red_;
  spec_.action_low.resize(spec_.action_dim);
  spec_.action_high.resize(spec_.action_dim);
  spec_.action_low << b.action_low, Vector::Constant(n_red_, -1.0);
  spec_.action_high << b.action_high, Vector::Constant(n_red_, 1.0);
  truth_ = selection::Mask(static_cast<std::size_t>(spec_.action_dim));
  for (int i = 0; i < b.action_dim; ++i) truth_.set(static_cast<std::size_t>(i), true);
}

RedundantWrapper::RedundantWrapper(const RedundantWrapper& other)
    : base_(other.base_->clone()), n_red_(other.n_red_), spec_(other.spec_), truth_(other.truth_), obs_(other.obs_) {}

Vector RedundantWrapper::reset(Rng& rng) {
  obs_ = base_->reset(rng);
  return obs_;
}

StepResult RedundantWrapper::step(const Vector& action) {
  if (action.size() != spec_.action_dim) {
    throw ContractError("RedundantWrapper::step: expected " + std::to_string(spec_.action_dim) +
                        "-dim action, got " + std::to_string(action.size()));
  }
  auto r = base_->step(action.head(base_->spec().action_dim));
  obs_ = r.observation;
  return r;
}

Transition wrapped_step(RedundantWrapper& env, const Vector& action) {
  Transition t;
  t.s = env.observation();
  t.a = action;
  const auto r = env.step(action);
  t.r = r.reward;
  t.s_next = r.observation;
  t.done = r.done;
  t.terminal = r.terminal;
  return t;
}

bool is_known_env(const std::string& name) { return name == "pendulum" || name == "maze"; }

std::unique_ptr<RedundantWrapper> make_env(const std::string& name, int n_redundant) {
  if (name == "pendulum") return std::make_unique<RedundantWrapper>(std::make_unique<Pendulum>(), n_redundant);
  if (name == "maze") return std::make_unique<RedundantWrapper>(std::make_unique<FourRewardMaze>(), n_redundant);
  throw ContractError("make_env: unknown environment '" + name + "' (valid: pendulum, maze)");
}

void write_trace_csv(const std::vector<Transition>& trace, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_trace_csv: cannot open " + path.string());
  if (trace.empty()) {
    out << "step,r,done\n";
    return;
  }
  out << "step";
  for (Eigen::Index i = 0; i < trace.front().s.size(); ++i) out << ",s" << (i + 1);
  for (Eigen::Index i = 0; i < trace.front().a.size(); ++i) out << ",a" << (i + 1);
  out << ",r,done\n";
  out.precision(17);
  for (std::size_t k = 0; k < trace.size(); ++k) {
    const auto& t = trace[k];
    out << k;
    for (Eigen::Index i = 0; i < t.s.size(); ++i) out << ',' << t.s(i);
    for (Eigen::Index i = 0; i < t.a.size(); ++i) out << ',' << t.a(i);
    out << ',' << t.r << ',' << (t.done ? 1 : 0) << '\n';
  }
}

}  // namespace swar::envs
