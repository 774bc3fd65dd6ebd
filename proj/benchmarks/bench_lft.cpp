#include <benchmark/benchmark.h>

#include <cmath>

#include "ldlab/convex_duality.hpp"

namespace {

ldlab::GridFunction log_cosh(int points) {
  return ldlab::GridFunction::tabulate({ldlab::symmetric_axis(5.0, points)},
                                       [](std::span<const double> l) { return std::log(std::cosh(l[0])); });
}

void BM_LftHull1D(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const ldlab::GridFunction f = log_cosh(n);
  const std::vector<ldlab::GridAxis> xs{ldlab::symmetric_axis(1.0, n)};
  for (auto _ : state) benchmark::DoNotOptimize(ldlab::lft(f, xs));
  state.SetComplexityN(n);
}
BENCHMARK(BM_LftHull1D)->RangeMultiplier(4)->Range(64, 16384)->Complexity();

void BM_LftDirect1D(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const ldlab::GridFunction f = log_cosh(n);
  const std::vector<ldlab::GridAxis> xs{ldlab::symmetric_axis(1.0, n)};
  for (auto _ : state) benchmark::DoNotOptimize(ldlab::lft_direct(f, xs));
  state.SetComplexityN(n);
}
BENCHMARK(BM_LftDirect1D)->RangeMultiplier(4)->Range(64, 4096)->Complexity();

void BM_Lft2D(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto axis = ldlab::symmetric_axis(3.0, n);
  const ldlab::GridFunction f = ldlab::GridFunction::tabulate(
      {axis, axis}, [](std::span<const double> l) { return std::log(std::cosh(l[0]) + std::cosh(l[1])); });
  const std::vector<ldlab::GridAxis> xs{ldlab::symmetric_axis(1.0, n), ldlab::symmetric_axis(1.0, n)};
  for (auto _ : state) benchmark::DoNotOptimize(ldlab::lft(f, xs));
}
BENCHMARK(BM_Lft2D)->Arg(51)->Arg(101)->Arg(201);

}  // namespace
