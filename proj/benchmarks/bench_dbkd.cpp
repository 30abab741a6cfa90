#include <benchmark/benchmark.h>

#include "dbkd/decision_model.hpp"
#include "dbkd/orthant.hpp"
#include "dbkd/solver.hpp"

using namespace dbkd;

namespace {

std::vector<double> spread(std::size_t n) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = 0.8 - 0.45 * static_cast<double>(i);
  return v;
}

void BM_Orthant(benchmark::State& state, OrthantStrategy strategy) {
  const auto k = static_cast<std::size_t>(state.range(0));
  const OrthantProblem problem(spread(k), difference_covariance(k, NoiseScale(1.0)));
  QuadratureConfig cfg;
  cfg.strategy = strategy;
  for (auto _ : state) benchmark::DoNotOptimize(orthant_probability(problem, cfg));
}
BENCHMARK_CAPTURE(BM_Orthant, automatic, OrthantStrategy::kAutomatic)->DenseRange(1, 5);
// Nested quadrature costs nodes^(K-1); stop before it gets slow.
BENCHMARK_CAPTURE(BM_Orthant, direct, OrthantStrategy::kDirect)->DenseRange(1, 3);

void BM_TheoreticalDistribution(benchmark::State& state) {
  const LogitsVector z(spread(static_cast<std::size_t>(state.range(0))));
  for (auto _ : state) benchmark::DoNotOptimize(theoretical_distribution(z));
}
BENCHMARK(BM_TheoreticalDistribution)->DenseRange(2, 6)->Unit(benchmark::kMicrosecond);

void BM_SolveLogits(benchmark::State& state) {
  const auto l = static_cast<std::size_t>(state.range(0));
  std::vector<std::size_t> counts(l, 1);
  counts[0] = 10 - (l - 1);
  const auto p = DecisionDistribution::from_counts(counts);
  for (auto _ : state) benchmark::DoNotOptimize(solve_logits(p, SolverConfig{}));
}
BENCHMARK(BM_SolveLogits)->DenseRange(2, 5)->Unit(benchmark::kMillisecond);

void BM_BuildLookupTable(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(build_lookup_table(LabelSpace(4), n, SolverConfig{}));
  }
}
BENCHMARK(BM_BuildLookupTable)->Arg(5)->Arg(10)->Unit(benchmark::kMillisecond)->Iterations(1);

}  // namespace
BENCHMARK_MAIN();
