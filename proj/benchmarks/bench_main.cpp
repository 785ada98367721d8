#include <benchmark/benchmark.h>

#include <random>

#include "hise/data.hpp"
#include "hise/model.hpp"
#include "hise/training.hpp"

namespace {

hise::RunConfig bench_config() {
  hise::RunConfig c;
  c.pairs = 16;
  c.epochs = 1;
  c.batch_size = 8;
  c.eval_every = 0;
  return c;
}

void BM_TapeMatmulBackward(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  std::mt19937_64 rng(7);
  const hise::Matrix a = hise::Matrix::gaussian(n, n, 1.0, rng);
  const hise::Matrix b = hise::Matrix::gaussian(n, n, 1.0, rng);
  for (auto _ : state) {
    hise::Tape tape;
    hise::Value x = tape.leaf(a);
    hise::Value y = tape.leaf(b);
    hise::Value loss = hise::sum_all(hise::matmul(x, y));
    tape.backward(loss);
    benchmark::DoNotOptimize(tape.grad(x));
  }
}
BENCHMARK(BM_TapeMatmulBackward)->Arg(16)->Arg(32)->Arg(64);

void BM_HalLoss(benchmark::State& state) {
  const int q = static_cast<int>(state.range(0));
  std::mt19937_64 rng(7);
  hise::Matrix sims(q, q);
  std::uniform_real_distribution<double> u(-0.9, 0.9);
  for (int i = 0; i < sims.size(); ++i) sims.data()[i] = u(rng);
  std::vector<int> diag(q);
  for (int i = 0; i < q; ++i) diag[i] = i;
  for (auto _ : state) {
    hise::Tape tape;
    hise::Value s = tape.leaf(sims);
    hise::Value loss = hise::hal_loss(tape, s, diag, diag, 0.3, 0.1);
    tape.backward(loss);
    benchmark::DoNotOptimize(tape.grad(s));
  }
}
BENCHMARK(BM_HalLoss)->Arg(16)->Arg(64);

void BM_ForwardPair(benchmark::State& state) {
  const hise::RunConfig config = bench_config();
  const hise::DatasetSplit split = hise::generate_synthetic(config, 0);
  std::mt19937_64 rng(0);
  const hise::ModelParams params = hise::init_model_params(config, rng);
  for (auto _ : state) {
    hise::Tape tape;
    hise::LiftedModel lifted = hise::lift_model(tape, params);
    auto t = hise::forward_text(tape, split.texts[0], lifted.refs, config);
    auto v = hise::forward_video(tape, split.videos[0], lifted.refs, config);
    benchmark::DoNotOptimize(tape.value(t.fused));
    benchmark::DoNotOptimize(tape.value(v.fused));
  }
}
BENCHMARK(BM_ForwardPair);

void BM_TrainStep(benchmark::State& state) {
  const hise::RunConfig config = bench_config();
  const hise::DatasetSplit split = hise::generate_synthetic(config, 0);
  hise::TrainerState trainer = hise::make_trainer_state(config);
  std::vector<int> batch;
  for (int i = 0; i < config.batch_size; ++i) batch.push_back(i);
  for (auto _ : state) {
    benchmark::DoNotOptimize(hise::train_step(trainer, split, batch, config));
  }
}
BENCHMARK(BM_TrainStep);

}  // namespace

BENCHMARK_MAIN();
