#include "binstream/binned_matrix.hpp"
#include "binstream/binning.hpp"
#include "binstream/factorization.hpp"
#include "binstream/toeplitz.hpp"

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

using namespace binstream;

namespace {

void BM_SqrtCoeffs(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) {
        const ToeplitzSpec spec(0.99, 0.9, n);
        benchmark::DoNotOptimize(spec.sqrt_coeffs().data());
    }
}
BENCHMARK(BM_SqrtCoeffs)->Arg(1 << 10)->Arg(1 << 12)->Arg(1 << 14);

void BM_BuildBinning(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const double c = 1.0 - 1.0 / static_cast<double>(state.range(1));
    const ToeplitzSpec spec(1.0, 0.0, n);
    const auto src = toeplitz_source(spec.sqrt_coeffs());
    std::size_t bins = 0;
    for (auto _ : state) {
        const auto b = build_binning(src, n, {c, 1.0 / static_cast<double>(n)});
        bins = b.size();
        benchmark::DoNotOptimize(bins);
    }
    state.counters["bin_size"] = static_cast<double>(bins);
}
BENCHMARK(BM_BuildBinning)->Args({1 << 12, 10})->Args({1 << 12, 100})->Args({1 << 14, 10})->Args({1 << 14, 100});

// Per-step cost of the online evaluator (binning generated on the fly).
void BM_StreamStep(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const double c = 1.0 - 1.0 / static_cast<double>(state.range(1));
    const ToeplitzSpec spec(1.0, 0.0, n);
    const auto src = toeplitz_source(spec.sqrt_coeffs());
    std::mt19937_64 rng(1);
    std::normal_distribution<double> normal;
    std::vector<double> z(n);
    for (auto& v : z) v = normal(rng);
    std::size_t peak = 0;
    for (auto _ : state) {
        BinnedStreamEvaluator ev(src, n, {c, 1.0 / static_cast<double>(n)});
        for (double v : z) benchmark::DoNotOptimize(ev.push(v));
        peak = ev.peak_buffer();
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) * static_cast<std::int64_t>(n));
    state.counters["peak_buffer"] = static_cast<double>(peak);
}
BENCHMARK(BM_StreamStep)->Args({1 << 12, 10})->Args({1 << 12, 100})->Args({1 << 16, 10});

void BM_BinnedReport(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const ToeplitzSpec spec(1.0, 0.0, n);
    for (auto _ : state) benchmark::DoNotOptimize(sqrt_binned_report(spec, {0.9, 1.0 / static_cast<double>(n)}));
}
BENCHMARK(BM_BinnedReport)->Arg(512)->Arg(2048)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
