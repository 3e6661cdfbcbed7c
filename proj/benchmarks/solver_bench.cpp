#include <benchmark/benchmark.h>

#include <random>

#include "optdesign/design.hpp"
#include "optdesign/robustness.hpp"
#include "optdesign/simulation.hpp"
#include "optdesign/solver.hpp"

namespace {

using namespace optdesign;

std::vector<VarianceVector> random_variances(std::size_t n) {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(4.0, 20.0);
  std::vector<VarianceVector> out;
  while (out.size() < n) {
    VarianceVector v({u(rng), u(rng), u(rng), u(rng)});
    if (!is_saturated(v).saturated) out.push_back(v);
  }
  return out;
}

void BM_SolveGeneral(benchmark::State& state) {
  const auto vs = random_variances(256);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_general(vs[i++ % vs.size()]));
  }
}
BENCHMARK(BM_SolveGeneral);

void BM_SolveGeneralNearSaturation(benchmark::State& state) {
  const VarianceVector v({5.999, 1.0, 2.0, 3.0});
  for (auto _ : state) benchmark::DoNotOptimize(solve_general(v));
}
BENCHMARK(BM_SolveGeneralNearSaturation);

void BM_GridOracle(benchmark::State& state) {
  const VarianceVector v({1.0, 2.0, 3.0, 4.0});
  const int resolution = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(grid_oracle(v, resolution));
}
BENCHMARK(BM_GridOracle)->Arg(50)->Arg(200);

void BM_RMax(benchmark::State& state) {
  const auto vs = random_variances(256);
  std::vector<DesignMeasure> ps;
  for (const auto& v : vs) ps.push_back(solve(v).p);
  const RangeSpec range(4.0, 20.0);
  std::size_t i = 0;
  for (auto _ : state) {
    const std::size_t k = i++ % vs.size();
    benchmark::DoNotOptimize(r_max(ps[k], vs[k], range));
  }
}
BENCHMARK(BM_RMax);

void BM_RunStudy(benchmark::State& state) {
  StudyConfig cfg = StudyConfig::defaults(Link::logit);
  cfg.n_samples = static_cast<int>(state.range(0));
  cfg.seed = 7;
  for (auto _ : state) benchmark::DoNotOptimize(run_study(cfg));
}
BENCHMARK(BM_RunStudy)->Arg(200)->Arg(1000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
