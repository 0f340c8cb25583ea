#include <benchmark/benchmark.h>

#include <vector>

#include "spinmarket/dynamics.hpp"
#include "spinmarket/engine.hpp"
#include "spinmarket/stats.hpp"

using namespace spinmarket;

namespace {

const WMNoiseParams kDefaultNoise(5.0, 2.0, 0.21);

void BM_WmSample(benchmark::State& state) {
  Rng rng(1);
  const WmSampler sampler(kDefaultNoise);
  for (auto _ : state) benchmark::DoNotOptimize(sampler(rng));
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_WmSample);

void BM_GaussianSample(benchmark::State& state) {
  Rng rng(1);
  GaussianSampler sampler(0.42);
  for (auto _ : state) benchmark::DoNotOptimize(sampler(rng));
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_GaussianSample);

void BM_RunRound(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  Rng rng(2);
  SpinLattice lattice(n);
  lattice.randomize(rng);
  RoundRunner runner(ModelParams{1.0, 1.0, kDefaultNoise});
  double m = lattice.magnetization();
  for (auto _ : state) m = runner.run_round(lattice, m, rng);
  benchmark::DoNotOptimize(m);
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n) * n);
}
BENCHMARK(BM_RunRound)->Arg(16)->Arg(32)->Arg(64);

void BM_RunSimulation(benchmark::State& state) {
  RunConfig c;
  c.rounds = state.range(0);
  c.thermalization = 0;
  c.seed = 3;
  c.model = ModelParams{1.0, 1.0, kDefaultNoise};
  for (auto _ : state) benchmark::DoNotOptimize(run_simulation(c).series.size());
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_RunSimulation)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_TailExponent(benchmark::State& state) {
  Rng rng(4);
  const WmSampler sampler(kDefaultNoise);
  std::vector<double> samples(static_cast<std::size_t>(state.range(0)));
  for (auto& x : samples) x = sampler(rng);
  for (auto _ : state) benchmark::DoNotOptimize(tail_exponent(samples, 0.84).exponent);
}
BENCHMARK(BM_TailExponent)->Arg(100000)->Unit(benchmark::kMillisecond);

void BM_Autocorrelation(benchmark::State& state) {
  Rng rng(5);
  GaussianSampler g(1.0);
  std::vector<double> x(static_cast<std::size_t>(state.range(0)));
  for (auto& v : x) v = g(rng);
  for (auto _ : state) benchmark::DoNotOptimize(autocorrelation(x, 100));
}
BENCHMARK(BM_Autocorrelation)->Arg(100000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
