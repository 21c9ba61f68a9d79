#include <benchmark/benchmark.h>

#include "dpca/eigensolver.hpp"
#include "dpca/estimation.hpp"
#include "dpca/runtime.hpp"
#include "dpca/synth.hpp"

using namespace dpca;

namespace {

const Dataset& tracking() {
  static const Dataset ds = make_preset("paper-tracking", 1);
  return ds;
}

const BlockSparseConcentration& tracking_window() {
  static const BlockSparseConcentration K =
      fit_concentration(tracking().graph, SampleSet{tracking().samples.samples.topRows(500)});
  return K;
}

void BM_FeasibilitySweep(benchmark::State& state) {
  const auto& K = tracking_window();
  const double t = 0.5 * upper_bound(K);
  for (auto _ : state) benchmark::DoNotOptimize(feasibility_sweep(K, t));
}
BENCHMARK(BM_FeasibilitySweep)->Unit(benchmark::kMicrosecond);

void BM_DenseMinEig(benchmark::State& state) {
  const Matrix dense = tracking_window().to_dense();
  for (auto _ : state) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(dense, Eigen::EigenvaluesOnly);
    benchmark::DoNotOptimize(eig.eigenvalues()(0));
  }
}
BENCHMARK(BM_DenseMinEig)->Unit(benchmark::kMillisecond);

void BM_Bisection(benchmark::State& state) {
  const auto& K = tracking_window();
  const double ub = upper_bound(K);
  for (auto _ : state) benchmark::DoNotOptimize(bisect_min_eig(K, {0.0, ub, 1e-3}));
}
BENCHMARK(BM_Bisection)->Unit(benchmark::kMillisecond);

void BM_Assembly(benchmark::State& state) {
  const auto& ds = tracking();
  const SampleSet win{ds.samples.samples.topRows(500)};
  for (auto _ : state) benchmark::DoNotOptimize(fit_concentration(ds.graph, win));
}
BENCHMARK(BM_Assembly)->Unit(benchmark::kMillisecond);

void BM_DistributedAssembly(benchmark::State& state) {
  const auto& ds = tracking();
  const SampleSet win{ds.samples.samples.topRows(500)};
  for (auto _ : state) {
    auto net = spawn_cliques(ds.graph, win);
    benchmark::DoNotOptimize(run_protocol(net, ProtocolRequest::assemble()));
  }
}
BENCHMARK(BM_DistributedAssembly)->Unit(benchmark::kMillisecond);

void BM_Spectrum(benchmark::State& state) {
  const auto inst = random_instance(7, 80, 8, 5);
  const int j = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(spectrum(inst.K, j, 1e-8));
}
BENCHMARK(BM_Spectrum)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
