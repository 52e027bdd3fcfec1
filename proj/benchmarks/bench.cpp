#include <benchmark/benchmark.h>

#include <cmath>
#include <random>

#include "dynonet/blocks.hpp"
#include "dynonet/pem.hpp"
#include "dynonet/quantized.hpp"
#include "dynonet/tape.hpp"
#include "dynonet/tf_grad.hpp"
#include "dynonet/transfer_function.hpp"

namespace {

using namespace dynonet;

Signal noise_signal(std::size_t batch, std::size_t length, std::uint64_t seed = 1) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  Signal s(batch, length, 1);
  for (double& v : s.flat()) v = n(rng);
  return s;
}

// An order-n filter with poles at 0.9 so long inputs stay bounded.
TransferFunction test_filter(std::size_t order) {
  std::vector<double> a{-0.9};
  for (std::size_t i = 1; i < order; ++i) {
    std::vector<double> next(a.size() + 1, 0.0);
    next[0] = a[0] - 0.9;
    for (std::size_t j = 1; j < a.size(); ++j) next[j] = a[j] - 0.9 * a[j - 1];
    next[a.size()] = -0.9 * a.back();
    a = next;
  }
  return TransferFunction(std::vector<double>(order + 1, 0.1), a, 1);
}

void BM_FilterForward(benchmark::State& state) {
  const auto T = static_cast<std::size_t>(state.range(0));
  const auto g = test_filter(static_cast<std::size_t>(state.range(1)));
  const Signal u = noise_signal(1, T);
  for (auto _ : state) benchmark::DoNotOptimize(filter_forward(g, u));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(T));
}
BENCHMARK(BM_FilterForward)->ArgsProduct({{1024, 16384, 131072}, {2, 8}});

void BM_GBlockBackward(benchmark::State& state) {
  const auto T = static_cast<std::size_t>(state.range(0));
  const auto g = test_filter(static_cast<std::size_t>(state.range(1)));
  const Signal u = noise_signal(1, T), y_bar = noise_signal(1, T, 2);
  const Signal y = filter_forward(g, u);
  for (auto _ : state) benchmark::DoNotOptimize(gblock_backward(g.view(), u, y, y_bar));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(T));
}
BENCHMARK(BM_GBlockBackward)->ArgsProduct({{1024, 16384, 131072}, {2, 8}});

void BM_WhForwardBackward(benchmark::State& state) {
  std::mt19937_64 rng(3);
  DynoNetModel model = build_wh({}, rng);
  const Signal u = noise_signal(1, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    Tape tape;
    const Var out = model.forward(tape, tape.constant(u));
    tape.backward(tape.mean(tape.square(out)));
    model.parameters().zero_grad();
  }
}
BENCHMARK(BM_WhForwardBackward)->Arg(2000)->Arg(20000)->Unit(benchmark::kMillisecond);

void BM_PemLoss(benchmark::State& state) {
  std::mt19937_64 rng(4);
  PemModel pem(build_wh({}, rng));
  const auto T = static_cast<std::size_t>(state.range(0));
  const Signal u = noise_signal(1, T), y = noise_signal(1, T, 5);
  for (auto _ : state) {
    Tape tape;
    tape.backward(pem.pem_loss(tape, tape.constant(u), tape.constant(y)));
  }
}
BENCHMARK(BM_PemLoss)->Arg(20000)->Unit(benchmark::kMillisecond);

void BM_QuantizedLoglik(benchmark::State& state) {
  const auto T = static_cast<std::size_t>(state.range(0));
  const Quantizer qz = Quantizer::uniform(-1.0, 1.0, 12);
  Signal y_sim = noise_signal(1, T);
  for (double& v : y_sim.flat()) v *= 0.5;
  const BinSignal z = quantize(noise_signal(1, T, 6), qz);
  for (auto _ : state) {
    benchmark::DoNotOptimize(quantized_loglik(y_sim, z, NoiseScale{std::log(0.1)}, qz));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(T));
}
BENCHMARK(BM_QuantizedLoglik)->Arg(4096)->Arg(81920);

void BM_PwhQuantizedStep(benchmark::State& state) {
  std::mt19937_64 rng(8);
  DynoNetModel model = build_pwh({}, rng);
  const auto T = static_cast<std::size_t>(state.range(0));
  const Quantizer qz = Quantizer::uniform(-1.0, 1.0, 12);
  const Signal u = noise_signal(1, T);
  const BinSignal z = quantize(noise_signal(1, T, 9), qz);
  ParameterStore sigma;
  const ParamId log_sigma = sigma.add("log_sigma_e", {std::log(0.5)});
  for (auto _ : state) {
    Tape tape;
    const Var y = model.forward(tape, tape.constant(u));
    tape.backward(quantized_nll_loss(tape, y, z, sigma, log_sigma, qz));
    model.parameters().zero_grad();
    sigma.zero_grad();
  }
}
BENCHMARK(BM_PwhQuantizedStep)->Arg(4096)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
