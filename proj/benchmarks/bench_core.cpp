#include <benchmark/benchmark.h>

#include "fgdim/combinatorics.hpp"
#include "fgdim/path_sim.hpp"
#include "fgdim/simplex_quadrature.hpp"
#include "fgdim/spectral_estimator.hpp"

using namespace fgdim;

static void BM_GraphFt(benchmark::State& state) {
  const auto M = std::size_t(state.range(0));
  const auto path = sample_fbm(0.7, M, derive_stream(1, 0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(graph_ft_sum(path.values, {17.0, 9.0}));
  }
  state.SetItemsProcessed(state.iterations() * std::int64_t(M));
}
BENCHMARK(BM_GraphFt)->RangeMultiplier(4)->Range(1 << 10, 1 << 16);

static void BM_SampleFbm(benchmark::State& state) {
  const auto M = std::size_t(state.range(0));
  const FbmSampler sampler(0.7, M);
  std::vector<double> out(M + 1);
  std::uint64_t i = 0;
  for (auto _ : state) {
    Generator g(derive_stream(2, i++));
    sampler.sample_into(g, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * std::int64_t(M));
}
BENCHMARK(BM_SampleFbm)->RangeMultiplier(4)->Range(1 << 10, 1 << 16);

static void BM_SampleStable(benchmark::State& state) {
  const auto M = std::size_t(state.range(0));
  std::vector<double> out(M + 1);
  std::uint64_t i = 0;
  for (auto _ : state) {
    Generator g(derive_stream(3, i++));
    sample_stable_into(1.5, g, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * std::int64_t(M));
}
BENCHMARK(BM_SampleStable)->Arg(1 << 12);

static void BM_ReduceAll(benchmark::State& state) {
  const int q = int(state.range(0));
  const auto A = enumerate_A(q);
  const auto Om = enumerate_Omega(q);
  for (auto _ : state) {
    std::size_t total = 0;
    for (const auto& e : A) {
      for (const auto& s : Om) total += reduce(e, s).I();
    }
    benchmark::DoNotOptimize(total);
  }
  state.SetItemsProcessed(state.iterations() * std::int64_t(A.size() * Om.size()));
}
BENCHMARK(BM_ReduceAll)->DenseRange(1, 4);

static void BM_IntegrateI(benchmark::State& state) {
  const auto eps = state.range(0) == 1 ? SignVector::parse("+ -") : SignVector::parse("+ + - -");
  const OscillatorySpec spec{1.0, 1.0, eps, FbmCharFunction::of(eps, 0.75, kPiCharScale)};
  SimplexQuadOptions opt;
  opt.rel_tol = 1e-8;
  for (auto _ : state) {
    benchmark::DoNotOptimize(integrate_I(spec, opt).value);
  }
}
BENCHMARK(BM_IntegrateI)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);

static void BM_MomentGrid(benchmark::State& state) {
  const auto pts = ray_points(Direction::Vertical, log_grid(4, 128, 12));
  MomentGridOptions opt;
  opt.workers = 1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(moment_grid(ProcessParams::fbm(0.7), 1, pts, 100, 5, 4096, opt));
  }
}
BENCHMARK(BM_MomentGrid)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
