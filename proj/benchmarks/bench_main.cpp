#include <benchmark/benchmark.h>

#include "polymart/checks.hpp"
#include "polymart/martingale.hpp"
#include "polymart/orthopoly.hpp"
#include "polymart/simkit.hpp"

using namespace polymart;

namespace {

void BM_BuildFamily(benchmark::State& state) {
    const int order = static_cast<int>(state.range(0));
    const MomentModel model = MomentModel::wiener(order);
    for (auto _ : state) {
        MartingaleFamily fam = build_family(model, order);
        benchmark::DoNotOptimize(fam);
    }
}
BENCHMARK(BM_BuildFamily)->DenseRange(4, 10, 2)->Unit(benchmark::kMillisecond);

void BM_BuildFamilyPoisson(benchmark::State& state) {
    const int order = static_cast<int>(state.range(0));
    const MomentModel model = MomentModel::poisson(Rational(3, 2), order);
    for (auto _ : state) {
        MartingaleFamily fam = build_family(model, order);
        benchmark::DoNotOptimize(fam);
    }
}
BENCHMARK(BM_BuildFamilyPoisson)->DenseRange(4, 8, 2)->Unit(benchmark::kMillisecond);

void BM_QHSolveSymbolic(benchmark::State& state) {
    const MartingaleFamily fam = build_family(MomentModel::wiener(12), 6);
    for (auto _ : state) {
        CheckReport rep = qh_solve(fam);
        benchmark::DoNotOptimize(rep);
    }
}
BENCHMARK(BM_QHSolveSymbolic)->Unit(benchmark::kMillisecond);

void BM_HarnessCheck(benchmark::State& state) {
    const MartingaleFamily fam = build_family(MomentModel::wiener(12), 6);
    for (auto _ : state) {
        CheckReport rep = check_harness(fam);
        benchmark::DoNotOptimize(rep);
    }
}
BENCHMARK(BM_HarnessCheck)->Unit(benchmark::kMillisecond);

void BM_ConstantGramSchmidt(benchmark::State& state) {
    const int order = static_cast<int>(state.range(0));
    const MartingaleFamily fam = build_family(MomentModel::poisson(1, 2 * order), order);
    for (auto _ : state) {
        GramSchmidt gs = constant_gram_schmidt(fam);
        benchmark::DoNotOptimize(gs);
    }
}
BENCHMARK(BM_ConstantGramSchmidt)->DenseRange(3, 6, 1)->Unit(benchmark::kMillisecond);

void BM_MarginalOrthogonal(benchmark::State& state) {
    const int size = static_cast<int>(state.range(0));
    const MomentModel model = MomentModel::gamma_process(2 * size);
    for (auto _ : state) {
        OrthogonalSystem sys = marginal_orthogonal(model, Rational(3, 2), size);
        benchmark::DoNotOptimize(sys);
    }
}
BENCHMARK(BM_MarginalOrthogonal)->DenseRange(4, 8, 2)->Unit(benchmark::kMillisecond);

void BM_SamplePaths(benchmark::State& state) {
    const std::size_t n_paths = static_cast<std::size_t>(state.range(0));
    const int workers = static_cast<int>(state.range(1));
    const std::vector<Rational> grid = {Rational(1, 2), 1, 2, 4};
    for (auto _ : state) {
        PathBatch batch = sample_paths("wiener", grid, n_paths, 42, workers);
        benchmark::DoNotOptimize(batch);
    }
    state.SetItemsProcessed(static_cast<int64_t>(state.iterations()) *
                            static_cast<int64_t>(n_paths));
}
BENCHMARK(BM_SamplePaths)
    ->Args({100000, 1})
    ->Args({100000, 4})
    ->Args({1000000, 4})
    ->Unit(benchmark::kMillisecond)
    ->UseRealTime();

void BM_MartingaleDefect(benchmark::State& state) {
    const MomentModel model = MomentModel::wiener(12);
    const MartingaleFamily fam = build_family(model, 3);
    const PathBatch batch = sample_paths("wiener", {1, 2, 4}, 200000, 42, 4);
    for (auto _ : state) {
        auto results = mc_martingale_test(fam, batch, 3, 1, 2, 2);
        benchmark::DoNotOptimize(results);
    }
    state.SetItemsProcessed(static_cast<int64_t>(state.iterations()) *
                            static_cast<int64_t>(batch.n_paths));
}
BENCHMARK(BM_MartingaleDefect)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
