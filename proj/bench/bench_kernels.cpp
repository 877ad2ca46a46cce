// OpenMP kernels against their serial reference implementations.
// Thread count follows OMP_NUM_THREADS.

#include <benchmark/benchmark.h>

#include "lava/amf.hpp"
#include "lava/correlation.hpp"
#include "lava/neighbors.hpp"
#include "lava/random.hpp"

namespace {

lava::RealMatrix random_points(std::size_t rows, std::size_t cols, std::uint64_t seed) {
    lava::Rng rng(seed);
    lava::RealMatrix m(rows, cols);
    for (auto& v : m.values()) {
        v = rng.normal();
    }
    return m;
}

struct CorrelationInput {
    lava::FeatureMatrix features;
    lava::LocalitySet localities;
};

CorrelationInput correlation_input(std::size_t features, std::size_t localities) {
    CorrelationInput in;
    in.features.values = random_points(2000, features, 2);
    const auto probes = random_points(localities, 2, 3);
    const auto latent = random_points(2000, 2, 4);
    in.localities.probes = probes;
    in.localities.members = lava::knn(latent, probes, 50).neighbors;
    return in;
}

void BM_knn(benchmark::State& state) {
    const auto points = random_points(static_cast<std::size_t>(state.range(0)), 8, 1);
    for (auto _ : state) {
        benchmark::DoNotOptimize(lava::knn(points, points, 30));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_knn_reference(benchmark::State& state) {
    const auto points = random_points(static_cast<std::size_t>(state.range(0)), 8, 1);
    for (auto _ : state) {
        benchmark::DoNotOptimize(lava::reference::knn(points, points, 30, false));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_correlations(benchmark::State& state) {
    const auto in = correlation_input(static_cast<std::size_t>(state.range(0)), 64);
    for (auto _ : state) {
        benchmark::DoNotOptimize(lava::locality_correlations(in.features, in.localities, 0.75));
    }
}

void BM_correlations_reference(benchmark::State& state) {
    const auto in = correlation_input(static_cast<std::size_t>(state.range(0)), 64);
    for (auto _ : state) {
        benchmark::DoNotOptimize(lava::reference::locality_correlations(in.features, in.localities, 0.75));
    }
}

void BM_reconstruct(benchmark::State& state) {
    const auto model = lava::random_model(static_cast<std::size_t>(state.range(0)), 4950, 8, 5);
    for (auto _ : state) {
        benchmark::DoNotOptimize(lava::reconstruct(model));
    }
}

void BM_reconstruct_reference(benchmark::State& state) {
    const auto model = lava::random_model(static_cast<std::size_t>(state.range(0)), 4950, 8, 5);
    for (auto _ : state) {
        benchmark::DoNotOptimize(lava::reference::reconstruct(model));
    }
}

}  // namespace

BENCHMARK(BM_knn)->Arg(1000)->Arg(4000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_knn_reference)->Arg(1000)->Arg(4000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_correlations)->Arg(20)->Arg(60)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_correlations_reference)->Arg(20)->Arg(60)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_reconstruct)->Arg(200)->Arg(1000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_reconstruct_reference)->Arg(200)->Arg(1000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
