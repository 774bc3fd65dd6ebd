#include <benchmark/benchmark.h>

#include "ldlab/mean_law.hpp"
#include "ldlab/pressure.hpp"

namespace {

void BM_MeanLawIid(benchmark::State& state) {
  const ldlab::FieldModel m = ldlab::FieldModel::iid(ldlab::scalar_values({-1.0, 0.0, 2.0}), {0.5, 0.3, 0.2});
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(ldlab::mean_law_exact(m, n));
}
BENCHMARK(BM_MeanLawIid)->Arg(50)->Arg(100)->Arg(200)->Arg(400);

void BM_MeanLawMarkov(benchmark::State& state) {
  const ldlab::FieldModel m = ldlab::FieldModel::markov(ldlab::scalar_values({-1.0, 1.0}), {{0.7, 0.3}, {0.4, 0.6}});
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(ldlab::mean_law_exact(m, n));
}
BENCHMARK(BM_MeanLawMarkov)->Arg(50)->Arg(100)->Arg(200)->Arg(400);

void BM_PressureLimitMarkov(benchmark::State& state) {
  const ldlab::FieldModel m = ldlab::FieldModel::markov(ldlab::scalar_values({-1.0, 0.0, 1.0}),
                                                        {{0.5, 0.3, 0.2}, {0.2, 0.5, 0.3}, {0.3, 0.3, 0.4}});
  const std::vector<double> lambda{0.7};
  for (auto _ : state) benchmark::DoNotOptimize(ldlab::pressure_limit(m, lambda));
}
BENCHMARK(BM_PressureLimitMarkov);

}  // namespace
