// Copyright 2026 The voxdenoise Authors
// SPDX-License-Identifier: Apache-2.0

#include <benchmark/benchmark.h>

#include <random>

#include "voxdenoise/ops.hpp"

namespace {

using namespace voxdenoise;

Tensor random(Shape shape, std::uint64_t seed, bool grad = false) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> u(-1.0f, 1.0f);
  std::vector<float> v(shape_numel(shape));
  for (auto& x : v) x = u(rng);
  return Tensor::from(std::move(shape), std::move(v), grad);
}

// Desk-scale geometry: batch 32 of 16 x 16 x 6 volumes.
void BM_Conv3dForward(benchmark::State& state) {
  const auto cin = static_cast<std::size_t>(state.range(0)), cout = static_cast<std::size_t>(state.range(1));
  const auto x = random({32, cin, 16, 16, 6}, 1);
  const auto k = random({cout, cin, 3, 3, 3}, 2), b = random({cout}, 3);
  for (auto _ : state) {
    Tape32 tape;
    benchmark::DoNotOptimize(ops::conv3d(tape, x, k, b).values().data());
  }
  state.counters["GFLOP/s"] = benchmark::Counter(2.0 * 32 * cout * cin * 27 * 16 * 16 * 6 * 1e-9,
                                                 benchmark::Counter::kIsIterationInvariantRate);
}
BENCHMARK(BM_Conv3dForward)->Args({1, 16})->Args({16, 32})->Unit(benchmark::kMillisecond);

void BM_Conv3dBackward(benchmark::State& state) {
  const auto cin = static_cast<std::size_t>(state.range(0)), cout = static_cast<std::size_t>(state.range(1));
  const auto x = random({32, cin, 16, 16, 6}, 1, true);
  const auto k = random({cout, cin, 3, 3, 3}, 2, true), b = random({cout}, 3, true);
  for (auto _ : state) {
    Tape32 tape;
    const auto y = ops::conv3d(tape, x, k, b);
    tape.backward(ops::sum(tape, y));
    benchmark::DoNotOptimize(k.grad().data());
  }
}
BENCHMARK(BM_Conv3dBackward)->Args({1, 16})->Args({16, 32})->Unit(benchmark::kMillisecond);

void BM_Deconv3dForward(benchmark::State& state) {
  const auto cin = static_cast<std::size_t>(state.range(0)), cout = static_cast<std::size_t>(state.range(1));
  const auto x = random({32, cin, 16, 16, 6}, 4);
  const auto k = random({cin, cout, 3, 3, 3}, 5), b = random({cout}, 6);
  for (auto _ : state) {
    Tape32 tape;
    benchmark::DoNotOptimize(ops::deconv3d(tape, x, k, b).values().data());
  }
}
BENCHMARK(BM_Deconv3dForward)->Args({32, 16})->Args({16, 1})->Unit(benchmark::kMillisecond);

void BM_LinearForwardBackward(benchmark::State& state) {
  const auto din = static_cast<std::size_t>(state.range(0)), dout = static_cast<std::size_t>(state.range(1));
  const auto x = random({32, din}, 7, true);
  const auto w = random({dout, din}, 8, true), b = random({dout}, 9, true);
  for (auto _ : state) {
    Tape32 tape;
    const auto y = ops::linear(tape, x, w, b);
    tape.backward(ops::sum(tape, y));
    benchmark::DoNotOptimize(w.grad().data());
  }
}
BENCHMARK(BM_LinearForwardBackward)->Args({1536, 3072})->Args({3072, 1536})->Unit(benchmark::kMillisecond);

void BM_LayerNorm(benchmark::State& state) {
  const auto x = random({32, 1536}, 10);
  const auto g = Tensor::filled({1536}, 1.0f), s = Tensor::zeros({1536});
  for (auto _ : state) {
    Tape32 tape;
    benchmark::DoNotOptimize(ops::layer_norm(tape, x, g, s).values().data());
  }
}
BENCHMARK(BM_LayerNorm);

}  // namespace
