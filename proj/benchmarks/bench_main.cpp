#include "deadcore/fraclap.hpp"
#include "deadcore/profiles.hpp"
#include "deadcore/solver.hpp"

#include <benchmark/benchmark.h>

#include <cmath>

using namespace deadcore;

namespace {

GridPtr grid_for(int level) { return make_grid(GridSpec{1.0, 8.0, std::ldexp(1.0, -level)}); }

void BM_Assemble(benchmark::State& state) {
    const GridPtr grid = grid_for(static_cast<int>(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(assemble(grid, 0.95));
    }
    state.counters["unknowns"] = static_cast<double>(grid->interior().size());
}
BENCHMARK(BM_Assemble)->DenseRange(6, 9)->Unit(benchmark::kMillisecond);

void BM_SolveRamp(benchmark::State& state) {
    const GridPtr grid = grid_for(static_cast<int>(state.range(0)));
    const FracLapOperator op = assemble(grid, 0.95);
    const GridFunction g = odd_exterior_builder(OddShape::Ramp, 16.0).on(grid);
    const ReactionSpec spec{0.2, ReactionMode::TwoPhase, 0.0};
    int iterations = 0;
    for (auto _ : state) {
        const SolveReport rep = solve(op, g, spec);
        iterations = rep.iterations;
        benchmark::DoNotOptimize(rep.u.values.data());
    }
    state.counters["newton"] = iterations;
}
BENCHMARK(BM_SolveRamp)->DenseRange(6, 9)->Unit(benchmark::kMillisecond);

void BM_SolveLocal(benchmark::State& state) {
    const GridPtr grid = grid_for(static_cast<int>(state.range(0)));
    const LocalProfile p = exact_local_profile(0.2);
    const ReactionSpec spec{0.2, ReactionMode::TwoPhase, 0.0};
    for (auto _ : state) {
        benchmark::DoNotOptimize(solve_local(grid, {p(-1.0), p(1.0)}, spec).u.values.data());
    }
}
BENCHMARK(BM_SolveLocal)->DenseRange(8, 12, 2)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
