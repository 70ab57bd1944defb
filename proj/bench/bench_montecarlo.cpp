// Serial reference vs OpenMP backend on the instability estimator.

#include <benchmark/benchmark.h>

#include <thread>

#include "nnstab/montecarlo.hpp"

namespace {

nnstab::ExperimentConfig bench_config(std::size_t d) {
    nnstab::ExperimentConfig cfg{nnstab::DistributionSpec::uniform_cube(d),
                                 nnstab::DatasetSizeRule::constant(256), nnstab::PNorm{2.0},
                                 nnstab::Epsilon{0.2}};
    cfg.trials = 256;
    cfg.seed = 3;
    return cfg;
}

void run(benchmark::State& state, const nnstab::Execution& exec) {
    const auto cfg = bench_config(static_cast<std::size_t>(state.range(0)));
    const std::vector<double> q(cfg.dimension(), 0.5);
    for (auto _ : state) benchmark::DoNotOptimize(nnstab::estimate_instability_probability(cfg, q, exec));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(cfg.trials));
}

void BM_Serial(benchmark::State& state) { run(state, nnstab::Execution::serial()); }

void BM_OpenMP(benchmark::State& state) {
    run(state, nnstab::Execution::parallel(static_cast<int>(std::max(1u, std::thread::hardware_concurrency()))));
}

}  // namespace

BENCHMARK(BM_Serial)->Arg(16)->Arg(128)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_OpenMP)->Arg(16)->Arg(128)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
