#include <benchmark/benchmark.h>

#include "gml/eigensolver.hpp"
#include "gml/lp.hpp"
#include "gml/objective.hpp"
#include "gml/optimizer.hpp"
#include "gml/rng.hpp"

using namespace gml;

namespace {

void BM_DenseEigen(benchmark::State& state) {
    Rng rng(1);
    const auto m = random_graph_metric(rng, static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(smallest_eigenpair_dense(m));
    }
}
BENCHMARK(BM_DenseEigen)->Arg(10)->Arg(30)->Arg(100);

void BM_LobpcgCold(benchmark::State& state) {
    Rng rng(1);
    const auto m = random_graph_metric(rng, static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(smallest_eigenpair_lobpcg(m));
    }
}
BENCHMARK(BM_LobpcgCold)->Arg(10)->Arg(30)->Arg(100);

// Warm start from the eigenvector of a slightly perturbed matrix, as in
// consecutive scalar updates.
void BM_LobpcgWarm(benchmark::State& state) {
    Rng rng(1);
    const auto dim = static_cast<std::size_t>(state.range(0));
    const auto m = random_graph_metric(rng, dim);
    SymmetricMatrix nearby = m;
    for (std::size_t i = 0; i < dim; ++i) {
        nearby.at(i, i) += 1e-3 * uniform_unit(rng);
    }
    const auto start = smallest_eigenpair_dense(nearby).vector;
    for (auto _ : state) {
        benchmark::DoNotOptimize(smallest_eigenpair_lobpcg(m, std::span<const double>(start)));
    }
}
BENCHMARK(BM_LobpcgWarm)->Arg(10)->Arg(30)->Arg(100);

void BM_GlrValue(benchmark::State& state) {
    Rng rng(2);
    const auto s = random_binary_samples(rng, static_cast<std::size_t>(state.range(0)), 8);
    const ObjectiveContext ctx(s.features, s.labels);
    const auto m = random_graph_metric(rng, 8);
    for (auto _ : state) {
        benchmark::DoNotOptimize(glr_value(ctx, m));
    }
}
BENCHMARK(BM_GlrValue)->Arg(50)->Arg(150)->Arg(300);

void BM_Simplex(benchmark::State& state) {
    Rng rng(3);
    const auto n = static_cast<std::size_t>(state.range(0));
    LinearProgram lp = LinearProgram::with_variables(n);
    for (std::size_t i = 0; i < n; ++i) {
        lp.objective[i] = uniform_real(rng, -1.0, 1.0);
        lp.lower_bounds[i] = -1.0;
        lp.upper_bounds[i] = 0.0;
    }
    lp.add(std::vector<double>(n, 1.0), Sense::GreaterEqual, -0.5 * static_cast<double>(n));
    for (auto _ : state) {
        benchmark::DoNotOptimize(solve_lp(lp));
    }
}
BENCHMARK(BM_Simplex)->Arg(4)->Arg(12)->Arg(30);

void BM_LearnMetric(benchmark::State& state) {
    Rng rng(4);
    const auto s = random_binary_samples(rng, 75, static_cast<std::size_t>(state.range(0)));
    const GlrObjective obj(ObjectiveContext(s.features, s.labels));
    const auto cfg = OptimizerConfig::defaults_for(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(learn_metric(obj, cfg));
    }
}
BENCHMARK(BM_LearnMetric)->Arg(4)->Arg(13)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
