#include <benchmark/benchmark.h>

#include "chainlab/dynamics.hpp"
#include "chainlab/gibbs.hpp"
#include "chainlab/observables.hpp"
#include "chainlab/symbolic.hpp"
#include "chainlab/variational.hpp"

using namespace chainlab;

namespace {

Potential potential_for(int anharmonic) {
  if (!anharmonic) return make_potential({});
  PotentialSpec s;
  s.family = "log-cosh";
  s.epsilon = 0.5;
  return make_potential(s);
}

void BM_NoiseSweep(benchmark::State& state) {
  const Potential v = potential_for(static_cast<int>(state.range(1)));
  RngStream rng(1, 0);
  ChainState s = sample_gibbs(v, 1.0, static_cast<std::size_t>(state.range(0)), rng);
  NoiseSweeper sweeper(v);
  for (auto _ : state) benchmark::DoNotOptimize(sweeper.sweep(s, 0.05, 1.0, rng));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_NoiseSweep)->Args({128, 0})->Args({128, 1});

void BM_Step(benchmark::State& state) {
  SimParams sim;
  sim.potential = potential_for(static_cast<int>(state.range(1)));
  sim.N = static_cast<std::size_t>(state.range(0));
  RngStream rng(2, 0);
  ChainState s = sample_gibbs(sim.potential, 1.0, sim.N, rng);
  Integrator integrator(sim);
  for (auto _ : state) integrator.advance(s, rng, 1);
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Step)->Args({128, 0})->Args({128, 1});

void BM_GeneratorApply(benchmark::State& state) {
  using P = symbolic::ExactPolynomial;
  const auto mode = symbolic::Mode::general;
  const P f = symbolic::site_energy<symbolic::Rational>(0, mode) * P::p(1, mode) + P::r(0, mode) * P::r(1, mode);
  const symbolic::Rational gamma(3);
  for (auto _ : state) benchmark::DoNotOptimize(symbolic::generator_apply(f, gamma, mode));
}
BENCHMARK(BM_GeneratorApply);

void BM_CheckFd(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(symbolic::check_fd_identity(symbolic::Rational(2)));
}
BENCHMARK(BM_CheckFd);

void BM_SolveSaddle(benchmark::State& state) {
  const Potential v = make_potential({});
  for (auto _ : state) benchmark::DoNotOptimize(solve_saddle(v, 1.0, 1.0, static_cast<int>(state.range(0)), 2));
}
BENCHMARK(BM_SolveSaddle)->Arg(1)->Arg(2);

void BM_AnalyzeTrajectory(benchmark::State& state) {
  CorrelationSpec spec;
  spec.N = 128;
  spec.max_lag = 200;
  spec.modes = {1, 2};
  spec.mode_max_lag = 400;
  spec.mean_energy = 1.0;
  RngStream rng(3, 0);
  std::vector<std::vector<double>> snaps(401, std::vector<double>(spec.N));
  for (auto& row : snaps)
    for (double& e : row) e = -std::log(rng.uniform());
  for (auto _ : state) benchmark::DoNotOptimize(analyze_trajectory(spec, snaps));
}
BENCHMARK(BM_AnalyzeTrajectory)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
