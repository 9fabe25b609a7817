#include "support/test_support.hpp"
#include "vpersona/metrics.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace vpersona;
using vpersona::testing::likert;
using vpersona::testing::matrix_of;
using vpersona::testing::random_distribution;

namespace {

std::vector<std::vector<int>> random_rows(std::size_t n, std::size_t q, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::vector<std::vector<int>> rows(n, std::vector<int>(q));
    for (auto& row : rows)
        for (auto& x : row) x = static_cast<int>(gen() % 5);
    return rows;
}

Survey likert_survey(std::size_t q) {
    Survey survey{"bench", {}};
    for (std::size_t i = 0; i < q; ++i) survey.questions.push_back(likert("Q" + std::to_string(i + 1), 5));
    return survey;
}

void BM_Wasserstein(benchmark::State& state) {
    std::mt19937_64 gen(1);
    const auto p = random_distribution(gen, static_cast<std::size_t>(state.range(0)));
    const auto q = random_distribution(gen, static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(wasserstein_1d(p, q));
}

void BM_Evaluate(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto survey = likert_survey(8);
    const auto v = matrix_of(random_rows(n, 8, 2));
    const auto h = matrix_of(random_rows(n, 8, 3));
    for (auto _ : state) benchmark::DoNotOptimize(evaluate(v, h, survey));
}

void BM_LowerBound(benchmark::State& state) {
    const auto survey = likert_survey(8);
    const auto h = matrix_of(random_rows(static_cast<std::size_t>(state.range(0)), 8, 4));
    for (auto _ : state) benchmark::DoNotOptimize(human_lower_bound(h, survey, 100, 5));
}

} // namespace

BENCHMARK(BM_Wasserstein)->Arg(5)->Arg(64)->Arg(1024);
BENCHMARK(BM_Evaluate)->Arg(200)->Arg(2000);
BENCHMARK(BM_LowerBound)->Arg(200)->Unit(benchmark::kMillisecond);
