#include <benchmark/benchmark.h>

#include <random>

#include "percpool/layer_spec.hpp"
#include "percpool/model.hpp"

using namespace percpool;

namespace {

Tensor<float> input(std::size_t side, std::size_t channels = 4) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<float> u(-1.0f, 1.0f);
  Tensor<float> x(Shape4{1, channels, side, side});
  for (auto& v : x.data()) v = u(rng);
  return x;
}

void pool_forward(benchmark::State& state, const char* kind) {
  const auto side = static_cast<std::size_t>(state.range(0));
  auto layer = make_bench_pool<float>(kind);
  auto x = input(side);
  layer->bind(x.shape());
  for (auto _ : state) benchmark::DoNotOptimize(layer->forward(x, Mode::Train));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(x.size()));
}

void pool_backward(benchmark::State& state, const char* kind) {
  const auto side = static_cast<std::size_t>(state.range(0));
  auto layer = make_bench_pool<float>(kind);
  auto x = input(side);
  layer->bind(x.shape());
  auto y = layer->forward(x, Mode::Train);
  Tensor<float> g(y.shape(), 1.0f);
  for (auto _ : state) benchmark::DoNotOptimize(layer->backward(g));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(x.size()));
}

void model_step(benchmark::State& state, const char* pooling) {
  auto config = parse_config(std::string("model = model_c_like\ndata.dataset = cifar10\npooling = ") + pooling);
  auto model = build_model<float>(config);
  auto x = input(32, 3);
  Tensor<float> batch(Shape4{8, 3, 32, 32});
  for (std::size_t i = 0; i < batch.size(); ++i) batch[i] = x[i % x.size()];
  for (auto _ : state) {
    auto y = model.net.forward(batch, Mode::Train);
    model.net.backward(Tensor<float>(y.shape(), 0.01f));
  }
  state.SetItemsProcessed(state.iterations() * 8);
}

}  // namespace

BENCHMARK_CAPTURE(pool_forward, max, "max")->RangeMultiplier(2)->Range(64, 512);
BENCHMARK_CAPTURE(pool_forward, average, "average")->RangeMultiplier(2)->Range(64, 512);
BENCHMARK_CAPTURE(pool_forward, perceptron, "perceptron")->RangeMultiplier(2)->Range(64, 512);
BENCHMARK_CAPTURE(pool_forward, perceptron_p4, "perceptron_p4")->RangeMultiplier(2)->Range(64, 512);
BENCHMARK_CAPTURE(pool_forward, nn_4_1, "nn_4_1")->RangeMultiplier(2)->Range(64, 512);
BENCHMARK_CAPTURE(pool_forward, nn_16_1, "nn_16_1")->RangeMultiplier(2)->Range(64, 256);
BENCHMARK_CAPTURE(pool_forward, nn_tensor, "nn_tensor")->RangeMultiplier(2)->Range(64, 512);
BENCHMARK_CAPTURE(pool_backward, perceptron, "perceptron")->RangeMultiplier(2)->Range(64, 512);
BENCHMARK_CAPTURE(pool_backward, nn_4_1, "nn_4_1")->RangeMultiplier(2)->Range(64, 512);
BENCHMARK_CAPTURE(model_step, average, "average")->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(model_step, perceptron, "perceptron")->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
