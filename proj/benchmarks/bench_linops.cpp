#include <benchmark/benchmark.h>

#include "qds/generator.hpp"
#include "qds/linops.hpp"
#include "qds/models.hpp"

using namespace qds;

namespace {

void BM_Expm(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const ComplexMatrix g = damped_oscillator(1.0, 0.5, n).model.g();
  for (auto _ : state) benchmark::DoNotOptimize(expm(g, 0.5));
}
BENCHMARK(BM_Expm)->Arg(32)->Arg(64)->Arg(128)->Unit(benchmark::kMicrosecond);

void BM_Sylvester(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const ComplexMatrix g = quadratic_pump(n).model.g();
  const auto dim = static_cast<Eigen::Index>(n);
  const ComplexMatrix rhs = ComplexMatrix::Identity(dim, dim);
  for (auto _ : state) benchmark::DoNotOptimize(solve_sylvester(1.0, g, rhs));
}
BENCHMARK(BM_Sylvester)->Arg(32)->Arg(64)->Arg(128)->Unit(benchmark::kMicrosecond);

void BM_LindbladApply(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const LindbladModel m = damped_oscillator(1.0, 0.5, n).model;
  const auto dim = static_cast<Eigen::Index>(n);
  const ComplexMatrix x = ComplexMatrix::Random(dim, dim);
  for (auto _ : state) benchmark::DoNotOptimize(lindblad_apply(m, x));
}
BENCHMARK(BM_LindbladApply)->Arg(32)->Arg(64)->Arg(128)->Unit(benchmark::kMicrosecond);

}  // namespace
