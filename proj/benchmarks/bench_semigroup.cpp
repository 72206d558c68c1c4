#include <benchmark/benchmark.h>

#include "qds/criteria.hpp"
#include "qds/models.hpp"
#include "qds/semigroup.hpp"

using namespace qds;

namespace {

// Schur factorization plus the diagnostic sequence up to k_max.
void BM_QTrace(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const LindbladModel m = damped_oscillator(1.0, 0.5, n).model;
  const ComplexVector u = basis_vector(n, 1);
  for (auto _ : state) benchmark::DoNotOptimize(ResolventMaps(m).trace(1.0, u, 256));
}
BENCHMARK(BM_QTrace)->Arg(32)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_QTracePump(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const LindbladModel m = quadratic_pump(n).model;
  const ComplexVector u = basis_vector(n, 0);
  const ResolventMaps maps(m);
  for (auto _ : state) benchmark::DoNotOptimize(maps.trace(1.0, u, 256));
}
BENCHMARK(BM_QTracePump)->Arg(32)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

}  // namespace
