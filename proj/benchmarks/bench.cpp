#include <benchmark/benchmark.h>

#include <cmath>

#include "iqccert/sdp.hpp"
#include "iqccert/simulate.hpp"

namespace {

using namespace iqccert;

void BM_SymEig12(benchmark::State& state) {
  SymMatrix m(12);
  for (int i = 0; i < 12; ++i)
    for (int j = i; j < 12; ++j) m.set(i, j, std::cos(1.7 * i + 0.3 * j));
  for (auto _ : state) {
    benchmark::DoNotOptimize(sym_eig(m));
  }
}
BENCHMARK(BM_SymEig12);

void BM_AssembleDgtLmi(benchmark::State& state) {
  const MixingMatrix w = two_node_w(0.5);
  for (auto _ : state) {
    benchmark::DoNotOptimize(make_dgt_lmi(w, 1.0, 1.0));
  }
}
BENCHMARK(BM_AssembleDgtLmi);

void BM_SolveFeasibleTwoNode(benchmark::State& state) {
  const LmiProblem lmi = make_dgt_lmi(two_node_w(0.5), 1.0, 1.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_feasibility(lmi, 1e-8, 200));
  }
}
BENCHMARK(BM_SolveFeasibleTwoNode);

void BM_SolveInfeasibleTwoNode(benchmark::State& state) {
  const LmiProblem lmi = make_dgt_lmi(two_node_w(0.5), 1.5, 1.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_feasibility(lmi, 1e-8, 200));
  }
}
BENCHMARK(BM_SolveInfeasibleTwoNode);

void BM_RunDgt1000(benchmark::State& state) {
  const ObjectiveFamily obj = quadratic_family({1.0, 0.5}, {{1.0}, {-1.0}});
  const MixingMatrix w = two_node_w(0.5);
  const std::vector<double> x0 = default_x0(2, 1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(run_dgt(obj, w, 0.5, x0, 1000));
  }
}
BENCHMARK(BM_RunDgt1000);

}  // namespace

BENCHMARK_MAIN();
