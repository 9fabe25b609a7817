#include "vpersona/matching.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace vpersona;

namespace {

WeightMatrix random_matrix(std::size_t n, std::size_t m, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> w(n * m);
    for (auto& x : w) x = u(gen);
    return WeightMatrix(n, m, w);
}

void BM_Greedy(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto w = random_matrix(n, 2 * n, 1);
    for (auto _ : state) benchmark::DoNotOptimize(match_greedy(w));
    state.SetComplexityN(state.range(0));
}

void BM_MaxWeight(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto w = random_matrix(n, 2 * n, 2);
    for (auto _ : state) benchmark::DoNotOptimize(match_max_weight(w));
    state.SetComplexityN(state.range(0));
}

void BM_Random(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto w = random_matrix(n, 2 * n, 3);
    Rng rng(4);
    for (auto _ : state) benchmark::DoNotOptimize(match_random(w, rng));
}

} // namespace

BENCHMARK(BM_Greedy)->RangeMultiplier(4)->Range(16, 1024)->Complexity();
BENCHMARK(BM_MaxWeight)->RangeMultiplier(4)->Range(16, 1024)->Complexity();
BENCHMARK(BM_Random)->RangeMultiplier(4)->Range(16, 1024);
