#include "sketchplan/bench.hpp"
#include "sketchplan/planner.hpp"
#include "sketchplan/sketch.hpp"
#include "sketchplan/tamp_space.hpp"

#include <benchmark/benchmark.h>

using namespace sketchplan;

namespace {

Task sorting(int tables, int goals, int obstacles, Clutter clutter) {
    BenchSpec spec;
    spec.n_tables = tables;
    spec.n_goal_objects = goals;
    spec.n_obstacle_objects = obstacles;
    spec.clutter = clutter;
    return generate(spec);
}

void BM_DiscInCorridor(benchmark::State &state) {
    Vec2 a{0.0, 0.0}, b{0.6, 0.2};
    double y = 0.0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(disc_in_corridor(a, b, 0.045, Vec2{0.3, y}, 0.035));
        y = y > 0.2 ? 0.0 : y + 0.001;
    }
}
BENCHMARK(BM_DiscInCorridor);

void BM_MakeSamples(benchmark::State &state) {
    Task task = sorting(4, 6, 6, Clutter::Medium);
    std::uint64_t seed = 0;
    for (auto _ : state)
        benchmark::DoNotOptimize(make_samples(task, task.start, SamplingDensity{}, seed++));
}
BENCHMARK(BM_MakeSamples)->Unit(benchmark::kMicrosecond);

void BM_Features(benchmark::State &state) {
    BenchSpec spec;
    spec.family = Family::NonMonotonic;
    Task task = generate(spec);
    SampleSet samples = make_samples(task, task.start, SamplingDensity{}, 1);
    FeatureEvaluator ev(task, samples);
    const bool with_I = state.range(0) != 0;
    for (auto _ : state)
        benchmark::DoNotOptimize(ev.features(task.start, with_I));
}
BENCHMARK(BM_Features)->Arg(0)->Arg(1)->Unit(benchmark::kMicrosecond);

void BM_Successors(benchmark::State &state) {
    Task task = sorting(1, 2, 6, Clutter::High);
    SampleSet samples = make_samples(task, task.start, SamplingDensity{}, 1);
    const auto mode = state.range(0) ? ValidationMode::Full : ValidationMode::Lazy;
    for (auto _ : state) {
        PipelineStats stats;
        TampSpace space(task, samples, mode, stats, ExecParams{}, 7, [](const WorldState &) { return false; });
        benchmark::DoNotOptimize(space.successors(space.intern(task.start)));
    }
}
BENCHMARK(BM_Successors)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_Solve(benchmark::State &state) {
    Task task = sorting(3, 2, 0, Clutter::Low);
    PlannerConfig config;
    config.planner = static_cast<PlannerKind>(state.range(0));
    for (auto _ : state)
        benchmark::DoNotOptimize(solve(task, config));
}
BENCHMARK(BM_Solve)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
