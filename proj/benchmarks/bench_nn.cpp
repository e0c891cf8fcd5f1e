#include <benchmark/benchmark.h>

#include "swar/nn.hpp"
#include "swar/selector.hpp"

using namespace swar;
using namespace swar::nn;

namespace {

Matrix random_batch(int rows, int cols, Rng& rng) {
  return Matrix::NullaryExpr(rows, cols, [&] { return rng.normal(); });
}

// args: hidden width, batch
void BM_Forward(benchmark::State& state) {
  Rng rng(1);
  const int h = static_cast<int>(state.range(0)), b = static_cast<int>(state.range(1));
  const auto net = DenseNet::mlp({104, h, h, 1}, Activation::Relu, Activation::Identity, rng);
  const Matrix x = random_batch(104, b, rng);
  for (auto _ : state) benchmark::DoNotOptimize(net.forward(x));
  state.SetItemsProcessed(state.iterations() * b);
}
BENCHMARK(BM_Forward)->Args({64, 128})->Args({256, 256});

void BM_ForwardBackwardAdam(benchmark::State& state) {
  Rng rng(2);
  const int h = static_cast<int>(state.range(0)), b = static_cast<int>(state.range(1));
  auto net = DenseNet::mlp({104, h, h, 1}, Activation::Relu, Activation::Identity, rng);
  AdamState adam(net);
  const Matrix x = random_batch(104, b, rng);
  const Matrix y = random_batch(1, b, rng);
  for (auto _ : state) {
    const auto tr = net.trace(x);
    const auto loss = mse_loss(tr.output(), y);
    adam_step(net, net.backward(tr, loss.grad), adam, 1e-4);
  }
  state.SetItemsProcessed(state.iterations() * b);
}
BENCHMARK(BM_ForwardBackwardAdam)->Args({64, 128})->Args({256, 256});

void BM_SelectorUpdate(benchmark::State& state) {
  Rng rng(3);
  const int d = static_cast<int>(state.range(0));
  selection::SelectorModel sel(d, d, {{100, 100}, 1e-4}, rng);
  const Matrix x = random_batch(d, 128, rng);
  const RowVector r = RowVector::NullaryExpr(128, [&] { return rng.normal(); });
  for (auto _ : state) {
    const Matrix masks = selection::sample_masks(selection::select_probs(sel, x), rng);
    selection::selector_update(sel, x, masks, r, 1e-4);
  }
}
BENCHMARK(BM_SelectorUpdate)->Arg(11)->Arg(100);

}  // namespace
