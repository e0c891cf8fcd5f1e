#include <cmath>

#include "doctest.h"
#include "swar/error.hpp"
#include "swar/nn.hpp"

using namespace swar;
using namespace swar::nn;

namespace {

DenseNet single(const Matrix& w, const Vector& b, Activation act) { return DenseNet({DenseLayer{w, b, act}}); }

LossResult half_square(const Matrix& y) { return {0.5 * y.squaredNorm(), y}; }

}  // namespace

TEST_CASE("forward on hand-built layers") {
  const auto id = single(Matrix::Identity(2, 2), Vector::Zero(2), Activation::Identity);
  CHECK(id.forward(Vector{{1.0, 2.0}}) == Vector{{1.0, 2.0}});

  const auto affine = single(Matrix{{2.0}}, Vector{{1.0}}, Activation::Identity);
  CHECK(affine.forward(Vector{{3.0}})(0) == 7.0);

  const auto relu = single(Matrix::Identity(2, 2), Vector::Zero(2), Activation::Relu);
  CHECK(relu.forward(Vector{{-1.0, 4.0}}) == Vector{{0.0, 4.0}});
}

TEST_CASE("forward rejects a wrong input width") {
  Rng rng(1);
  const auto net = DenseNet::mlp({3, 4, 2}, Activation::Tanh, Activation::Identity, rng);
  CHECK_THROWS_AS(net.forward(Vector(Vector::Zero(4))), ContractError);
  CHECK_THROWS_AS(DenseNet({DenseLayer{Matrix::Zero(2, 3), Vector::Zero(2)}, DenseLayer{Matrix::Zero(1, 3), Vector::Zero(1)}}),
                  ContractError);
}

TEST_CASE("forward is bit-deterministic") {
  Rng rng(5);
  const auto net = DenseNet::mlp({6, 32, 32, 3}, Activation::Relu, Activation::Sigmoid, rng);
  const Matrix x = Matrix::Random(6, 17);
  CHECK(net.forward(x) == net.forward(x));
}

TEST_CASE("backward: scalar product and linearity") {
  // y = w x with w = 2, x = 3, L = y^2: dL/dw = 2 y x = 36
  const auto net = single(Matrix{{2.0}}, Vector{{0.0}}, Activation::Identity);
  const Matrix x{{3.0}};
  const Matrix y = net.forward(x);
  const auto g = net.backward(x, 2.0 * y);
  CHECK(g.weight[0](0, 0) == doctest::Approx(36.0).epsilon(1e-12));
  CHECK(g.bias[0](0) == doctest::Approx(12.0));

  Rng rng(2);
  const auto deep = DenseNet::mlp({3, 5, 2}, Activation::Tanh, Activation::Identity, rng);
  const Matrix in = Matrix::Random(3, 4);
  const auto zero = deep.backward(in, Matrix::Zero(2, 4));
  for (const auto& w : zero.weight) CHECK(w.isZero(0));
  for (const auto& b : zero.bias) CHECK(b.isZero(0));

  const auto lin = single(Matrix::Random(2, 3), Vector::Random(2), Activation::Identity);
  const Matrix og = Matrix::Random(2, 1);
  CHECK(lin.backward(Matrix::Random(3, 1), og).bias[0] == og.col(0));
}

TEST_CASE("gradient_check on known cases") {
  Rng rng(0);
  const auto tanh_net = DenseNet::mlp({4, 8, 3}, Activation::Tanh, Activation::Tanh, rng);
  CHECK(gradient_check(tanh_net, Matrix::Random(4, 3), half_square) < 1e-4);

  const auto linear = DenseNet::mlp({3, 2}, Activation::Identity, Activation::Identity, rng);
  CHECK(gradient_check(linear, Matrix::Random(3, 5), half_square) < 1e-7);

  auto constant = linear;
  constant.layers()[0].weight.setZero();
  const auto zero_loss = [](const Matrix& y) { return LossResult{0.0, Matrix::Zero(y.rows(), y.cols())}; };
  CHECK(gradient_check(constant, Matrix::Random(3, 2), zero_loss) == 0.0);
}

TEST_CASE("gradient_check < 1e-4 on 100 random nets per activation and depth") {
  const Activation acts[] = {Activation::Relu, Activation::Tanh, Activation::Sigmoid, Activation::Identity};
  Rng rng(42);
  int checked = 0;
  for (Activation act : acts) {
    for (int depth = 1; depth <= 4; ++depth) {
      double worst = 0.0;
      for (int trial = 0; trial < 100; ++trial) {
        std::vector<int> sizes{1 + static_cast<int>(rng.index(5))};
        for (int k = 0; k < depth; ++k) sizes.push_back(1 + static_cast<int>(rng.index(6)));
        const auto net = DenseNet::mlp(std::span<const int>(sizes), act, act, rng);
        Matrix x(sizes.front(), 3);
        for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = rng.normal();
        worst = std::max(worst, gradient_check(net, x, half_square));
        ++checked;
      }
      INFO(to_string(act), " depth ", depth);
      CHECK(worst < 1e-4);
    }
  }
  CHECK(checked == 1600);
}

TEST_CASE("adam: first step, zero gradient, two steps, lr 0") {
  Rng rng(3);
  auto net = DenseNet::mlp({3, 4, 2}, Activation::Relu, Activation::Identity, rng);
  const auto before = net;
  NetGradients ones;
  NetGradients zeros;
  for (const auto& l : net.layers()) {
    ones.weight.push_back(Matrix::Ones(l.weight.rows(), l.weight.cols()));
    ones.bias.push_back(Vector::Ones(l.bias.size()));
    zeros.weight.push_back(Matrix::Zero(l.weight.rows(), l.weight.cols()));
    zeros.bias.push_back(Vector::Zero(l.bias.size()));
  }
  const double lr = 1e-3;

  AdamState idle(net);
  adam_step(net, zeros, idle, lr);
  CHECK(net == before);

  AdamState state(net);
  adam_step(net, ones, state, lr);
  for (std::size_t k = 0; k < net.layers().size(); ++k) {
    const Matrix dw = before.layers()[k].weight - net.layers()[k].weight;
    CHECK(std::abs(dw.maxCoeff() - lr) < 1e-6);
    CHECK(std::abs(dw.minCoeff() - lr) < 1e-6);
  }
  const auto after_one = net;
  adam_step(net, ones, state, lr);
  const double step1 = (before.layers()[0].weight - after_one.layers()[0].weight)(0, 0);
  const double step2 = (after_one.layers()[0].weight - net.layers()[0].weight)(0, 0);
  CHECK(std::abs(step2 - step1) / step1 < 0.01);
  CHECK(state.step == 2);

  const auto frozen = net;
  adam_step(net, ones, state, 0.0);
  CHECK(net == frozen);
}

TEST_CASE("adam names the block holding a non-finite gradient") {
  Rng rng(4);
  auto net = DenseNet::mlp({2, 3, 1}, Activation::Relu, Activation::Identity, rng);
  AdamState state(net);
  auto g = net.backward(Matrix::Ones(2, 1), Matrix::Ones(1, 1));
  g.bias[1](0) = std::nan("");
  try {
    adam_step(net, g, state, 1e-3);
    FAIL("expected NumericError");
  } catch (const NumericError& e) {
    CHECK(std::string(e.what()).find("layer 1 bias") != std::string::npos);
  }
}

TEST_CASE("mse loss") {
  CHECK(mse_loss(Matrix{{1.0, 3.0}}, Matrix{{1.0, 3.0}}).value == 0.0);
  CHECK(mse_loss(Matrix{{1.0, 3.0}}, Matrix{{1.0, 1.0}}).value == 2.0);
  CHECK(mse_loss(Matrix{{2.0}}, Matrix{{0.0}}).grad(0, 0) == 4.0);
  CHECK_THROWS_AS(mse_loss(Matrix(0, 0), Matrix(0, 0)), ContractError);
  CHECK_THROWS_AS(mse_loss(Matrix::Zero(1, 2), Matrix::Zero(1, 3)), ContractError);
  Rng rng(9);
  for (int i = 0; i < 50; ++i) {
    const Matrix a = Matrix::Random(3, 4), b = Matrix::Random(3, 4);
    CHECK(mse_loss(a, b).value > 0.0);
  }
}

TEST_CASE("bce loss") {
  CHECK(bce_loss(Matrix{{0.5}}, Matrix{{1.0}}).value == doctest::Approx(std::log(2.0)));
  CHECK(bce_loss(Matrix{{1.0}}, Matrix{{1.0}}).value == doctest::Approx(0.0).epsilon(1e-6));
  CHECK(bce_loss(Matrix{{0.9}}, Matrix{{0.0}}).value == doctest::Approx(-std::log(0.1)));
  CHECK(std::isfinite(bce_loss(Matrix{{0.0}}, Matrix{{1.0}}).value));
  CHECK_THROWS_AS(bce_loss(Matrix{{0.5}}, Matrix{{0.3}}), ContractError);
  const RowVector per = per_sample_bce(Matrix{{0.5, 0.9}}, Matrix{{1.0, 0.0}});
  CHECK(per(1) == doctest::Approx(-std::log(0.1)));
}

TEST_CASE("soft update") {
  auto target = single(Matrix{{0.0}}, Vector{{0.0}}, Activation::Identity);
  const auto source = single(Matrix{{10.0}}, Vector{{10.0}}, Activation::Identity);
  soft_update(target, source, 0.1);
  CHECK(target.layers()[0].weight(0, 0) == doctest::Approx(1.0));

  auto unchanged = target;
  soft_update(unchanged, source, 0.0);
  CHECK(unchanged == target);
  soft_update(unchanged, source, 1.0);
  CHECK(unchanged == source);

  Rng rng(1);
  const auto other = DenseNet::mlp({2, 3}, Activation::Relu, Activation::Identity, rng);
  CHECK_THROWS_AS(soft_update(target, other, 0.5), ContractError);
}
