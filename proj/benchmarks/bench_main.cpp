#include <benchmark/benchmark.h>

#include "epitrack/ctmc.hpp"
#include "epitrack/error_analysis.hpp"
#include "epitrack/population.hpp"
#include "epitrack/simulation.hpp"
#include "epitrack/solver.hpp"

namespace {

using namespace epitrack;

PopulationSpec scenario(std::size_t n) {
  PopulationSpec spec;
  spec.theta = 0.5;
  spec.total_rate = 16.0;
  auto lambdas = geometric_rate_profile(n, 0.9, 6.0);
  auto mus = geometric_rate_profile(n, 1.1, 4.0);
  for (std::size_t i = 0; i < n; ++i) spec.people.push_back({lambdas[i], mus[i]});
  return spec;
}

void BM_ErrorRates(benchmark::State& state) {
  PersonParams p{0.9, 0.3};
  for (auto _ : state)
    benchmark::DoNotOptimize(error_rates(p, 1.2, 0.8));
}
BENCHMARK(BM_ErrorRates);

void BM_CtmcStationary(benchmark::State& state) {
  PersonParams p{0.9, 0.3};
  for (auto _ : state)
    benchmark::DoNotOptimize(ctmc_stationary(p, 1.2, 0.8));
}
BENCHMARK(BM_CtmcStationary);

void BM_Waterfill(benchmark::State& state) {
  auto spec = scenario(static_cast<std::size_t>(state.range(0)));
  auto policy = random_init(spec, 5);
  auto phi = phi_values(spec, policy);
  auto k = phi_coefficients(spec, policy);
  for (auto _ : state)
    benchmark::DoNotOptimize(waterfill(k, phi, spec.total_rate));
}
BENCHMARK(BM_Waterfill)->Arg(10)->Arg(100)->Arg(1000);

void BM_AlternateMinimize(benchmark::State& state) {
  auto spec = scenario(static_cast<std::size_t>(state.range(0)));
  auto init = random_init(spec, 5);
  for (auto _ : state)
    benchmark::DoNotOptimize(alternate_minimize(spec, init));
}
BENCHMARK(BM_AlternateMinimize)->Arg(10)->Arg(30);

void BM_Solve(benchmark::State& state) {
  auto spec = scenario(10);
  for (auto _ : state)
    benchmark::DoNotOptimize(solve(spec, static_cast<int>(state.range(0)), 1));
}
BENCHMARK(BM_Solve)->Arg(5)->Arg(30);

void BM_SimulatePerson(benchmark::State& state) {
  PersonParams p{0.9, 0.3};
  double horizon = static_cast<double>(state.range(0));
  for (auto _ : state)
    benchmark::DoNotOptimize(simulate_person(p, 1.2, 0.8, 0.5, horizon, 3));
}
BENCHMARK(BM_SimulatePerson)->Arg(1000)->Arg(100000);

}  // namespace

BENCHMARK_MAIN();
