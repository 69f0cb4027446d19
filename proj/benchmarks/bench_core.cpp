#include <benchmark/benchmark.h>

#include "hyperseg/clustering.hpp"
#include "hyperseg/factor_reduction.hpp"
#include "hyperseg/gradients.hpp"
#include "hyperseg/model_reduction.hpp"
#include "hyperseg/morphology.hpp"
#include "hyperseg/rng.hpp"
#include "hyperseg/watershed.hpp"

namespace {

using namespace hyperseg;

HyperCube random_cube(int w, int h, int L, std::uint64_t seed) {
    Rng rng(seed);
    HyperCube cube(w, h, L);
    for (double& v : cube.data()) v = 0.1 + rng.uniform01();
    return cube;
}

void BM_MorphGradient(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    Rng rng(1);
    ScalarImage img(n, n);
    for (double& v : img.data()) v = rng.uniform01();
    const StructuringElement se = StructuringElement::square8();
    for (auto _ : state) {
        benchmark::DoNotOptimize(morph_gradient(img, se));
    }
    state.SetItemsProcessed(state.iterations() * n * n);
}
BENCHMARK(BM_MorphGradient)->Arg(128)->Arg(256);

void BM_Leveling(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    Rng rng(2);
    ScalarImage img(n, n);
    for (double& v : img.data()) v = rng.uniform01();
    const ScalarImage marker = gaussian_filter(img, 11);
    const StructuringElement se = StructuringElement::cross4();
    for (auto _ : state) {
        benchmark::DoNotOptimize(leveling(img, marker, se));
    }
}
BENCHMARK(BM_Leveling)->Arg(128)->Arg(256);

void BM_FcaFitProjectReconstruct(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const HyperCube cube = random_cube(n, n, 30, 3);
    for (auto _ : state) {
        const FcaModel model = fca_fit(cube, 2);
        const HyperCube factors = fca_project(model, cube);
        benchmark::DoNotOptimize(fca_reconstruct(model, factors));
    }
}
BENCHMARK(BM_FcaFitProjectReconstruct)->Arg(64)->Arg(128);

void BM_MetricGradient(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const HyperCube cube = random_cube(n, n, 3, 4);
    const StructuringElement se = StructuringElement::square8();
    const DistanceKind kind = DistanceKind::mahalanobis_from_cube(cube, true);
    for (auto _ : state) {
        benchmark::DoNotOptimize(gradient_metric(cube, se, kind));
    }
    state.SetItemsProcessed(state.iterations() * n * n);
}
BENCHMARK(BM_MetricGradient)->Arg(128)->Arg(256);

void BM_Watershed(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    Rng rng(5);
    ScalarImage g(n, n);
    for (double& v : g.data()) v = rng.uniform01();
    LabelImage markers(n, n, 0);
    markers(n / 4, n / 4) = 1;
    markers(3 * n / 4, n / 4) = 2;
    markers(n / 4, 3 * n / 4) = 3;
    markers(3 * n / 4, 3 * n / 4) = 4;
    const FloodSpec spec;
    for (auto _ : state) {
        benchmark::DoNotOptimize(watershed(g, markers, spec));
    }
    state.SetItemsProcessed(state.iterations() * n * n);
}
BENCHMARK(BM_Watershed)->Arg(128)->Arg(256)->Arg(512);

void BM_Clara(benchmark::State& state) {
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    Rng rng(6);
    std::vector<double> pts(n * 3);
    for (double& v : pts) v = rng.gaussian();
    const PointsView view{pts.data(), n, 3};
    ClusteringSpec spec;
    spec.k = 3;
    spec.samples = 5;
    for (auto _ : state) {
        benchmark::DoNotOptimize(clara(view, spec));
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_Clara)->Arg(4096)->Arg(16384);

} // namespace

BENCHMARK_MAIN();
