#include <benchmark/benchmark.h>

#include "swar/agents.hpp"
#include "swar/envs.hpp"
#include "swar/td3.hpp"

using namespace swar;
using namespace swar::rl;

namespace {

Batch random_batch(int n, int sdim, int adim, Rng& rng) {
  Batch b;
  b.s = Matrix::NullaryExpr(sdim, n, [&] { return rng.normal(); });
  b.a = Matrix::NullaryExpr(adim, n, [&] { return rng.uniform(-1, 1); });
  b.r = RowVector::NullaryExpr(n, [&] { return rng.normal(); });
  b.s_next = Matrix::NullaryExpr(sdim, n, [&] { return rng.normal(); });
  b.not_terminal = RowVector::Ones(n);
  return b;
}

TD3Config config(int hidden, int batch) {
  TD3Config c;
  c.hidden = {hidden, hidden};
  c.batch_size = batch;
  return c;
}

// Pendulum with 100 redundant action dims: state 3, action 101.
void BM_TD3Update(benchmark::State& state) {
  Rng init(1), rng(2);
  const int h = static_cast<int>(state.range(0)), b = static_cast<int>(state.range(1));
  TD3Agent agent(3, Vector::Constant(101, -1), Vector::Constant(101, 1), config(h, b), init);
  const auto batch = random_batch(b, 3, 101, rng);
  std::int64_t step = 0;
  for (auto _ : state) benchmark::DoNotOptimize(agent.update(batch, rng, step++));
}
BENCHMARK(BM_TD3Update)->Args({64, 128})->Args({256, 256})->Unit(benchmark::kMillisecond);

void BM_TDSWARUpdate(benchmark::State& state) {
  Rng init(1), rng(2);
  const int h = static_cast<int>(state.range(0)), b = static_cast<int>(state.range(1));
  TDSWARConfig cfg;
  cfg.td3 = config(h, b);
  cfg.curriculum.total_steps = 1000;
  TDSWARAgent agent(3, Vector::Constant(101, -1), Vector::Constant(101, 1), cfg, init);
  const auto batch = random_batch(b, 3, 101, rng);
  std::int64_t step = 0;
  for (auto _ : state) benchmark::DoNotOptimize(agent.update(batch, rng, step++));
}
BENCHMARK(BM_TDSWARUpdate)->Args({64, 128})->Args({256, 256})->Unit(benchmark::kMillisecond);

void BM_WrappedStep(benchmark::State& state) {
  auto env = envs::make_env("pendulum", static_cast<int>(state.range(0)));
  Rng rng(3);
  env->reset(rng);
  const auto& spec = env->spec();
  const Vector a = uniform_action(spec.action_low, spec.action_high, rng);
  for (auto _ : state) {
    const auto tr = envs::wrapped_step(*env, a);
    if (tr.done) env->reset(rng);
    benchmark::DoNotOptimize(tr.r);
  }
}
BENCHMARK(BM_WrappedStep)->Arg(0)->Arg(100);

}  // namespace
BENCHMARK_MAIN();
