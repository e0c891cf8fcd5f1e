#include <filesystem>
#include <fstream>
#include <cmath>
#include <numbers>

#include "doctest.h"
#include "swar/envs.hpp"
#include "swar/error.hpp"

using namespace swar;
using namespace swar::envs;

TEST_CASE("pendulum step examples") {
  const auto upright = pendulum_step({0.0, 0.0}, 0.0);
  CHECK(upright.state.theta == 0.0);
  CHECK(upright.state.theta_dot == 0.0);
  CHECK(upright.reward == 0.0);

  const auto hanging = pendulum_step({std::numbers::pi, 0.0}, 0.0);
  CHECK(hanging.state.theta_dot == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(hanging.reward == doctest::Approx(-std::numbers::pi * std::numbers::pi).epsilon(1e-9));

  // torque and speed clipping
  const auto pushed = pendulum_step({0.0, 0.0}, 50.0);
  CHECK(pushed.state.theta_dot == doctest::Approx(3.0 * 2.0 * 0.05));
  CHECK(pendulum_step({0.0, 7.99}, 2.0).state.theta_dot <= 8.0);

  CHECK_THROWS_AS(pendulum_step({std::nan(""), 0.0}, 0.0), NumericError);

  Rng rng(1);
  for (int i = 0; i < 10000; ++i) {
    const PendulumState s{rng.uniform(-10, 10), rng.uniform(-8, 8)};
    CHECK(pendulum_step(s, rng.uniform(-3, 3)).reward <= 0.0);
  }
}

TEST_CASE("wrap_angle lands in [-pi, pi)") {
  for (double a : {-7.0, -3.5, 0.0, 3.14159, 3.5, 100.0}) {
    const double w = wrap_angle(a);
    CHECK(w >= -std::numbers::pi);
    CHECK(w < std::numbers::pi);
    CHECK(std::cos(w) == doctest::Approx(std::cos(a)));
  }
  CHECK(wrap_angle(std::numbers::pi) == doctest::Approx(-std::numbers::pi));
}

TEST_CASE("pendulum energy drift per step under 1% for swings up to 0.5 rad") {
  // at dt = 0.05 the bound only holds for moderate swings; large ones are checked for bounded error below
  double worst = 0.0;
  for (double amp = 0.05; amp <= 0.5; amp += 0.05) {
    for (double sign : {-1.0, 1.0}) {
      PendulumState s{wrap_angle(std::numbers::pi + sign * amp), 0.0};
      for (int t = 0; t < 400; ++t) {
        const auto next = pendulum_step(s, 0.0).state;
        worst = std::max(worst, std::abs(pendulum_energy(next) - pendulum_energy(s)) / std::abs(pendulum_energy(s)));
        s = next;
      }
    }
  }
  CHECK(worst < 0.01);
}

TEST_CASE("pendulum energy has no secular drift over long unforced runs") {
  Rng rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    PendulumState s{rng.uniform(-std::numbers::pi, std::numbers::pi), rng.uniform(-1, 1)};
    double early = 0.0, late = 0.0;
    const int n = 20000, window = 2000;
    for (int t = 0; t < n; ++t) {
      s = pendulum_step(s, 0.0).state;
      REQUIRE(std::abs(s.theta_dot) < 8.0);
      if (t < window) early += pendulum_energy(s) / window;
      if (t >= n - window) late += pendulum_energy(s) / window;
    }
    CHECK(std::abs(early - late) < 0.05);
  }
}

TEST_CASE("pendulum env spec, reset bounds, fixed horizon") {
  Pendulum env;
  CHECK(env.spec().state_dim == 3);
  CHECK(env.spec().action_dim == 1);
  CHECK(env.spec().horizon == 200);
  Rng a(3), b(3);
  CHECK(env.reset(a) == Pendulum().reset(b));
  Rng rng(4);
  for (int i = 0; i < 1000; ++i) {
    const Vector obs = env.reset(rng);
    CHECK(std::abs(obs(2)) <= 1.0);
    CHECK(obs.head(2).norm() == doctest::Approx(1.0));
  }
  env.reset(rng);
  int steps = 0;
  bool done = false;
  while (!done) {
    const auto r = env.step(Vector::Constant(1, 1.0));
    CHECK_FALSE(r.terminal);
    done = r.done;
    ++steps;
  }
  CHECK(steps == 200);
}

TEST_CASE("maze step examples") {
  const auto sites = maze_sites();
  MazeState s;
  s.position = sites[0];
  CHECK(maze_step(s, {0.01, 0.0}).reward == 1.0);
  CHECK(maze_step(s, {0.01, 0.0}).reward == 0.0);

  MazeState far;
  const auto r = maze_step(far, {0.0, 0.0});
  CHECK(r.reward == 0.0);
  CHECK(far.position == Eigen::Vector2d::Zero());

  MazeState edge;
  edge.position = {0.98, -0.98};
  maze_step(edge, {5.0, -5.0});
  CHECK(edge.position == Eigen::Vector2d(1.0, -1.0));
}

TEST_CASE("maze episodes: bounds, horizon, return at most 4") {
  FourRewardMaze env;
  CHECK(env.spec().horizon == 32);
  Rng rng(5);
  for (int ep = 0; ep < 300; ++ep) {
    env.reset(rng);
    double total = 0.0;
    int steps = 0;
    for (bool done = false; !done; ++steps) {
      Vector a(2);
      a << rng.uniform(-1.5, 1.5), rng.uniform(-1.5, 1.5);
      const auto r = env.step(a);
      CHECK(r.observation.cwiseAbs().maxCoeff() <= 1.0);
      total += r.reward;
      done = r.done;
    }
    CHECK(steps == 32);
    CHECK(total <= 4.0);
  }
}

TEST_CASE("maze reset is uniform on the box") {
  FourRewardMaze env;
  Rng rng(6);
  Eigen::Vector2d mean = Eigen::Vector2d::Zero();
  for (int i = 0; i < 10000; ++i) mean += env.reset(rng);
  mean /= 10000.0;
  CHECK(mean.cwiseAbs().maxCoeff() < 0.05);
}

TEST_CASE("redundant wrapper shape and ground truth") {
  auto w = make_env("pendulum", 100);
  CHECK(w->spec().action_dim == 101);
  const auto truth = w->ground_truth_mask();
  CHECK(truth.size() == 101);
  CHECK(truth.indices() == std::vector<int>{0});
  CHECK(w->spec().action_low.size() == 101);
  CHECK(w->spec().action_high(50) == 1.0);
  Rng rng(1);
  w->reset(rng);
  CHECK_THROWS_AS(wrapped_step(*w, Vector::Zero(100)), ContractError);
  CHECK_THROWS_AS(make_env("walker", 0), ContractError);
}

TEST_CASE("n_red = 0 is the identity on the base env") {
  auto w = make_env("maze", 0);
  FourRewardMaze base;
  Rng a(8), b(8);
  CHECK(w->reset(a) == base.reset(b));
  for (int t = 0; t < 32; ++t) {
    Vector act(2);
    act << a.uniform(-1, 1), a.uniform(-1, 1);
    b.uniform();
    b.uniform();
    const auto r1 = w->step(act);
    const auto r2 = base.step(act);
    CHECK(r1.observation == r2.observation);
    CHECK(r1.reward == r2.reward);
    CHECK(r1.done == r2.done);
  }
}

TEST_CASE("redundancy invariance over 10,000 random tails") {
  for (const char* name : {"pendulum", "maze"}) {
    auto proto = make_env(name, 100);
    Rng rng(13);
    const int base_dim = proto->spec().action_dim - 100;
    for (int pair = 0; pair < 1000; ++pair) {
      proto->reset(rng);
      // advance to a random state
      for (int k = static_cast<int>(rng.index(5)); k > 0; --k) {
        Vector a = Vector::Zero(proto->spec().action_dim);
        for (int j = 0; j < base_dim; ++j) a(j) = rng.uniform(-1, 1);
        wrapped_step(*proto, a);
      }
      Vector head(base_dim);
      for (int j = 0; j < base_dim; ++j) head(j) = rng.uniform(-2, 2);
      Transition ref;
      for (int tail = 0; tail < 10; ++tail) {
        RedundantWrapper copy(*proto);
        Vector a(proto->spec().action_dim);
        a.head(base_dim) = head;
        for (int j = base_dim; j < a.size(); ++j) a(j) = rng.uniform(-1, 1);
        const auto tr = wrapped_step(copy, a);
        if (tail == 0) {
          ref = tr;
          continue;
        }
        CHECK(tr.s_next == ref.s_next);
        CHECK(tr.r == ref.r);
        CHECK(tr.done == ref.done);
      }
    }
  }
}

TEST_CASE("trace csv export") {
  auto w = make_env("maze", 2);
  Rng rng(2);
  w->reset(rng);
  std::vector<Transition> trace;
  for (int t = 0; t < 5; ++t) trace.push_back(wrapped_step(*w, Vector::Constant(4, 0.5)));
  const auto path = std::filesystem::temp_directory_path() / "swar_trace.csv";
  write_trace_csv(trace, path);
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  CHECK(header == "step,s1,s2,a1,a2,a3,a4,r,done");
  std::filesystem::remove(path);
}
